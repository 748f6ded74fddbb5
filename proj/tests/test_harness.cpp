#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "heavywalk/harness.hpp"

using namespace heavywalk;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json trivial_envelope_check() {
  return {{"name", "upper-envelope"}, {"theta", 1.0},
          {"phi", 0.0},              {"eps", 0.5},
          {"burn_in", 3},            {"max_violating_replicas", 0}};
}

json unit_drift_walk(long long horizon, long long replicas, json checks) {
  return {{"horizon", horizon},
          {"replicas", replicas},
          {"master_seed", 99},
          {"model",
           {{"kind", "walk"},
            {"law",
             {{"pos", {{"kind", "constant"}, {"value", 1.0}}},
              {"neg", {{"kind", "zero"}}},
              {"p_pos", 1.0}}}}},
          {"checks", std::move(checks)}};
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_CASE("config validation reports every problem at once") {
  json doc = {{"horizon", 1},
              {"replicas", 0},
              {"model",
               {{"kind", "walk"},
                {"law",
                 {{"pos", {{"kind", "constant"}, {"value", 1.0}}},
                  {"neg", {{"kind", "zero"}}},
                  {"p_pos", 1.0}}}}},
              {"checks", json::array({trivial_envelope_check()})}};
  // horizon too small, replicas too small, master_seed missing
  try {
    parse_config(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.issues.size() >= 3);
    CHECK(std::string(e.what()).find("horizon") != std::string::npos);
    CHECK(std::string(e.what()).find("replicas") != std::string::npos);
  }
}

TEST_CASE("unknown check names are rejected before any simulation") {
  json doc = unit_drift_walk(64, 1, json::array({{{"name", "no-such-check"}}}));
  CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("a deterministic walk passes the trivial envelope check") {
  ExperimentConfig cfg =
      parse_config(unit_drift_walk(4096, 1, json::array({trivial_envelope_check()})));
  RunReport rep = run(cfg);
  CHECK(rep.all_pass);
  CHECK(rep.replicas_completed == 1);
  CHECK(rep.aborted_replicas.empty());
  REQUIRE(rep.checks.size() == 1);
  CHECK(rep.checks[0].name == "upper-envelope");
  CHECK(rep.checks[0].pass);
}

TEST_CASE("growth ratio reads the terminal exponent off a deterministic walk") {
  // X_t = t exactly, so log X_T / log T = 1 at any horizon.
  json in_band = {{"name", "growth-ratio"}, {"band_lo", 0.9}, {"band_hi", 1.1}};
  RunReport rep = run(parse_config(unit_drift_walk(4096, 3, json::array({in_band}))));
  CHECK(rep.all_pass);
  REQUIRE(rep.checks.size() == 1);
  CHECK(rep.checks[0].details.at("median_ratio").get<double>() == doctest::Approx(1.0).epsilon(1e-9));

  json off_band = {{"name", "growth-ratio"}, {"band_lo", 2.0}, {"band_hi", 3.0}};
  RunReport miss = run(parse_config(unit_drift_walk(4096, 3, json::array({off_band}))));
  CHECK_FALSE(miss.all_pass);
}

TEST_CASE("growth ratio requires its band up front") {
  json no_band = {{"name", "growth-ratio"}, {"band_lo", 0.9}};
  CHECK_THROWS_AS(parse_config(unit_drift_walk(4096, 1, json::array({no_band}))),
                  ConfigError);
}

TEST_CASE("identical configs give byte identical payloads") {
  ExperimentConfig cfg =
      parse_config(unit_drift_walk(4096, 4, json::array({trivial_envelope_check()})));
  RunReport a = run(cfg);
  RunReport b = run(cfg);
  CHECK(a.payload().dump() == b.payload().dump());
  CHECK(a.to_json().contains("wall_clock_seconds"));
  CHECK_FALSE(a.payload().contains("wall_clock_seconds"));
}

TEST_CASE("thread count does not leak into the results") {
  json doc = unit_drift_walk(4096, 8, json::array({trivial_envelope_check()}));
  doc["model"]["law"] = {{"pos", {{"kind", "pareto"}, {"alpha", 0.5}, {"x0", 1.0}}},
                         {"neg", {{"kind", "bounded-uniform"}, {"bound", 1.0}}},
                         {"p_pos", 0.5}};
  ExperimentConfig cfg = parse_config(doc);
  setenv(kThreadsEnvVar, "3", 1);
  std::string with_three = run(cfg).payload().dump();
  setenv(kThreadsEnvVar, "1", 1);
  std::string with_one = run(cfg).payload().dump();
  unsetenv(kThreadsEnvVar);
  CHECK(with_three == with_one);
}

TEST_CASE("replicas that overflow are recorded and the run continues") {
  json doc = {{"horizon", 1000},
              {"replicas", 40},
              {"master_seed", 7},
              {"levels", json::array()},
              {"model",
               {{"kind", "walk"},
                {"law",
                 {{"pos", {{"kind", "pareto"}, {"alpha", 0.01}, {"x0", 1.0}}},
                  {"neg", {{"kind", "zero"}}},
                  {"p_pos", 1.0}}}}},
              {"checks", json::array({{{"name", "transience"},
                                       {"floor", 1.0},
                                       {"min_fraction", 0.5}}})}};
  ExperimentConfig cfg = parse_config(doc);
  RunReport rep = run(cfg);
  CHECK_FALSE(rep.aborted_replicas.empty());
  CHECK(rep.replicas_completed > 0);
  CHECK(rep.replicas_completed < 40);
  CHECK(rep.replicas_completed + static_cast<long long>(rep.aborted_replicas.size()) == 40);
  CHECK(rep.all_pass);  // survivors only ever step upward

  RunReport again = run(cfg);
  CHECK(again.aborted_replicas == rep.aborted_replicas);
}

TEST_CASE("a check that errors at run time counts as a failure") {
  json doc = unit_drift_walk(100, 150, json::array({{{"name", "survival-slope"},
                                                     {"source", "tau"},
                                                     {"level", 1e9},
                                                     {"grid_lo", 2.0},
                                                     {"grid_hi", 50.0},
                                                     {"grid_points", 4},
                                                     {"band_lo", -3.0},
                                                     {"band_hi", -1.0}}}));
  doc["levels"] = json::array({1e9});
  ExperimentConfig cfg = parse_config(doc);
  RunReport rep = run(cfg);  // level is unreachable, every passage time censors
  CHECK_FALSE(rep.all_pass);
  REQUIRE(rep.checks.size() == 1);
  CHECK_FALSE(rep.checks[0].pass);
  CHECK(rep.checks[0].details.contains("error"));
}

TEST_CASE("walk runs write checkpoint and stopping tables") {
  fs::path dir = fs::temp_directory_path() / "heavywalk_csv_walk";
  fs::remove_all(dir);
  json doc = unit_drift_walk(64, 2, json::array({trivial_envelope_check()}));
  doc["levels"] = json::array({1.0});
  doc["output_dir"] = dir.string();
  run(parse_config(doc));
  CHECK(fs::exists(dir / "report.json"));
  CHECK(first_line(dir / "walk_checkpoints.csv") == "seed,t,x,run_min,run_max,max_inc");
  CHECK(first_line(dir / "stopping.csv") == "seed,level,tau,lambda,censor_flags");
  fs::remove_all(dir);
}

TEST_CASE("strip runs write line occupation and excursion tables") {
  fs::path dir = fs::temp_directory_path() / "heavywalk_csv_strip";
  fs::remove_all(dir);
  json doc = {{"horizon", 64},
              {"replicas", 2},
              {"master_seed", 3},
              {"output_dir", dir.string()},
              {"model",
               {{"kind", "strip"},
                {"kernel",
                 {{"induced", {{"kind", "reflected-srw"}}},
                  {"boundary",
                   {{"pos", {{"kind", "constant"}, {"value", 1.0}}},
                    {"neg", {{"kind", "zero"}}},
                    {"p_pos", 1.0}}},
                  {"bulk",
                   {{"pos", {{"kind", "bounded-uniform"}, {"bound", 1.0}}},
                    {"neg", {{"kind", "bounded-uniform"}, {"bound", 1.0}}},
                    {"p_pos", 0.5}}}}}}},
              {"checks", json::array({{{"name", "loglog-slope"},
                                       {"burn_in", 2},
                                       {"band_lo", -10.0},
                                       {"band_hi", 10.0}}})}};
  run(parse_config(doc));
  CHECK(first_line(dir / "strip_checkpoints.csv") == "seed,t,u_is_boundary,v");
  CHECK(first_line(dir / "excursions.csv") == "seed,n,sigma,nu");
  fs::remove_all(dir);
}

TEST_CASE("the config hash follows the seed") {
  json doc = unit_drift_walk(16, 1, json::array({trivial_envelope_check()}));
  RunReport a = run(parse_config(doc));
  doc["master_seed"] = 100;
  RunReport b = run(parse_config(doc));
  CHECK(a.config_hash != b.config_hash);
  CHECK(a.config_hash.size() == 16);
}

TEST_CASE("configs survive a round trip through their canonical form") {
  json doc = unit_drift_walk(4096, 4, json::array({trivial_envelope_check()}));
  ExperimentConfig cfg = parse_config(doc);
  json canon = config_to_json(cfg);
  ExperimentConfig back = parse_config(canon);
  CHECK(config_to_json(back).dump() == canon.dump());
}

TEST_CASE("the preset catalog parses end to end") {
  std::vector<std::string> names = list_presets();
  CHECK(names.size() == 12);
  auto has = [&](const char* n) {
    return std::find(names.begin(), names.end(), n) != names.end();
  };
  CHECK(has("escape-rate"));
  CHECK(has("lamperti-gamma"));
  CHECK(has("strip-null-boundary-phase"));
  CHECK(has("drift-lemmas"));
  for (const std::string& n : names) CHECK_NOTHROW(preset_config(n));
  CHECK_THROWS_AS(preset_config("no-such-preset"), ConfigError);
}

TEST_CASE("fast presets run green") {
  RunReport oracles = run(preset_config("analytic-oracles"));
  CHECK(oracles.all_pass);
  RunReport invariance = run(preset_config("risk-invariance"));
  CHECK(invariance.all_pass);
}
