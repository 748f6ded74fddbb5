#include "heavywalk/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "heavywalk/estimators.hpp"

namespace heavywalk {

namespace {

using nlohmann::json;

// ------------------------------------------------------------------
// name tables

const char* tail_kind_name(TailKind k) {
  switch (k) {
    case TailKind::pareto: return "pareto";
    case TailKind::pareto_log: return "pareto-log";
    case TailKind::bounded_uniform: return "bounded-uniform";
    case TailKind::constant: return "constant";
    case TailKind::zero: return "zero";
  }
  return "zero";
}

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::walk: return "walk";
    case ModelKind::strip: return "strip";
    case ModelKind::lamperti_returns: return "lamperti-returns";
    case ModelKind::drift: return "drift";
    case ModelKind::analytic: return "analytic";
  }
  return "walk";
}

const char* chain_kind_name(ChainKind k) {
  switch (k) {
    case ChainKind::finite_ergodic: return "finite-ergodic";
    case ChainKind::reflected_srw: return "reflected-srw";
    case ChainKind::lamperti: return "lamperti";
  }
  return "reflected-srw";
}

const char* lyapunov_kind_name(LyapunovKind k) {
  switch (k) {
    case LyapunovKind::f_power_decay: return "f-power-decay";
    case LyapunovKind::w_power: return "w-power";
    case LyapunovKind::concave_h: return "concave-h";
    case LyapunovKind::identity: return "identity";
  }
  return "identity";
}

const char* direction_name(DriftDirection d) {
  switch (d) {
    case DriftDirection::supermartingale: return "supermartingale";
    case DriftDirection::submartingale: return "submartingale";
    case DriftDirection::strong_drift: return "strong-drift";
  }
  return "supermartingale";
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::boundary_dominates: return "boundary-dominates";
    case Regime::bulk_dominates: return "bulk-dominates";
    case Regime::unclassified: return "unclassified";
  }
  return "unclassified";
}

// ------------------------------------------------------------------
// JSON <-> domain objects

struct Issues {
  std::vector<std::string> list;
  void add(const std::string& where, const std::string& what) {
    list.push_back(where + ": " + what);
  }
};

TailLaw tail_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "pareto")
    return TailLaw::pareto(j.at("alpha").get<double>(), j.value("x0", 1.0));
  if (kind == "pareto-log")
    return TailLaw::pareto_log(j.at("alpha").get<double>(), j.at("phi").get<double>(),
                               j.at("x0").get<double>());
  if (kind == "bounded-uniform") return TailLaw::bounded_uniform(j.at("bound").get<double>());
  if (kind == "constant") return TailLaw::constant(j.at("value").get<double>());
  if (kind == "zero") return TailLaw::zero();
  throw std::invalid_argument("unknown tail kind '" + kind + "'");
}

json tail_to_json(const TailLaw& law) {
  json j{{"kind", tail_kind_name(law.kind)}};
  switch (law.kind) {
    case TailKind::pareto:
      j["alpha"] = law.alpha;
      j["x0"] = law.cutoff_x0;
      break;
    case TailKind::pareto_log:
      j["alpha"] = law.alpha;
      j["phi"] = law.log_phi;
      j["x0"] = law.cutoff_x0;
      break;
    case TailKind::bounded_uniform:
      j["bound"] = law.bound;
      break;
    case TailKind::constant:
      j["value"] = law.bound;
      break;
    case TailKind::zero:
      break;
  }
  return j;
}

IncrementLaw law_from_json(const json& j) {
  IncrementLaw law;
  law.pos = tail_from_json(j.at("pos"));
  law.neg = tail_from_json(j.at("neg"));
  law.sign.base_p = j.value("p_pos", 0.5);
  if (j.contains("bands"))
    for (const json& b : j.at("bands"))
      law.sign.bands.push_back(
          {b.at("lo").get<double>(), b.at("hi").get<double>(), b.at("p").get<double>()});
  law.drift_shift = j.value("drift_shift", 0.0);
  law.validate();
  return law;
}

json law_to_json(const IncrementLaw& law) {
  json j{{"pos", tail_to_json(law.pos)},
         {"neg", tail_to_json(law.neg)},
         {"p_pos", law.sign.base_p},
         {"drift_shift", law.drift_shift}};
  if (!law.sign.bands.empty()) {
    json bands = json::array();
    for (const auto& b : law.sign.bands)
      bands.push_back({{"lo", b.lo}, {"hi", b.hi}, {"p", b.p}});
    j["bands"] = bands;
  }
  return j;
}

InducedChainSpec chain_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "reflected-srw") {
    InducedChainSpec spec;
    spec.kind = ChainKind::reflected_srw;
    return spec;
  }
  if (kind == "lamperti")
    return build_lamperti(j.at("gamma").get<double>(), j.value("sigma2", 1.0));
  if (kind == "finite-ergodic") {
    InducedChainSpec spec;
    spec.kind = ChainKind::finite_ergodic;
    const json& rows = j.at("matrix");
    spec.k = static_cast<int>(rows.size());
    for (const json& row : rows)
      for (const json& w : row) spec.matrix.push_back(w.get<double>());
    spec.validate();
    return spec;
  }
  throw std::invalid_argument("unknown induced chain kind '" + kind + "'");
}

json chain_to_json(const InducedChainSpec& spec) {
  json j{{"kind", chain_kind_name(spec.kind)}};
  switch (spec.kind) {
    case ChainKind::finite_ergodic: {
      json rows = json::array();
      for (int a = 0; a < spec.k; ++a) {
        json row = json::array();
        for (int b = 0; b < spec.k; ++b)
          row.push_back(spec.matrix[static_cast<std::size_t>(a * spec.k + b)]);
        rows.push_back(row);
      }
      j["matrix"] = rows;
      break;
    }
    case ChainKind::lamperti:
      j["gamma"] = spec.gamma;
      j["sigma2"] = spec.sigma2;
      break;
    case ChainKind::reflected_srw:
      break;
  }
  return j;
}

StripKernel kernel_from_json(const json& j) {
  StripKernel kernel;
  kernel.induced = chain_from_json(j.at("induced"));
  kernel.boundary_jump = law_from_json(j.at("boundary"));
  kernel.bulk_jump = law_from_json(j.at("bulk"));
  kernel.validate();
  return kernel;
}

json kernel_to_json(const StripKernel& kernel) {
  return {{"induced", chain_to_json(kernel.induced)},
          {"boundary", law_to_json(kernel.boundary_jump)},
          {"bulk", law_to_json(kernel.bulk_jump)}};
}

LyapunovSpec lyapunov_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "f-power-decay")
    return LyapunovSpec::f_power_decay(j.at("z").get<double>(), j.at("delta").get<double>());
  if (kind == "w-power")
    return LyapunovSpec::w_power(j.at("y").get<double>(), j.at("gamma").get<double>());
  if (kind == "concave-h") return LyapunovSpec::concave_h(j.at("theta").get<double>());
  if (kind == "identity") return LyapunovSpec::identity();
  throw std::invalid_argument("unknown lyapunov kind '" + kind + "'");
}

json lyapunov_to_json(const LyapunovSpec& spec) {
  json j{{"kind", lyapunov_kind_name(spec.kind)}};
  switch (spec.kind) {
    case LyapunovKind::f_power_decay:
      j["z"] = spec.z;
      j["delta"] = spec.delta;
      break;
    case LyapunovKind::w_power:
      j["y"] = spec.y;
      j["gamma"] = spec.gamma;
      break;
    case LyapunovKind::concave_h:
      j["theta"] = spec.theta;
      break;
    case LyapunovKind::identity:
      break;
  }
  return j;
}

DriftTarget target_from_json(const json& j) {
  std::string d = j.at("direction").get<std::string>();
  if (d == "supermartingale") return DriftTarget::supermartingale();
  if (d == "submartingale") return DriftTarget::submartingale();
  if (d == "strong-drift")
    return DriftTarget::strong_drift(j.at("eta").get<double>(), j.at("eps").get<double>());
  throw std::invalid_argument("unknown drift direction '" + d + "'");
}

json target_to_json(const DriftTarget& t) {
  json j{{"direction", direction_name(t.direction)}};
  if (t.direction == DriftDirection::strong_drift) {
    j["eta"] = t.eta;
    j["eps"] = t.eps;
  }
  return j;
}

std::vector<double> grid_from_json(const json& j) {
  std::vector<double> grid;
  if (j.is_array()) {
    for (const json& v : j) grid.push_back(v.get<double>());
  } else {
    // dyadic generator: states origin + sign * 2^e for e in [exp_lo, exp_hi]
    double origin = j.value("origin", 0.0);
    double sign = j.value("sign", 1.0);
    int lo = j.at("exp_lo").get<int>();
    int hi = j.at("exp_hi").get<int>();
    if (lo > hi) throw std::invalid_argument("grid exp_lo must be <= exp_hi");
    for (int e = lo; e <= hi; ++e) grid.push_back(origin + sign * std::ldexp(1.0, e));
  }
  if (grid.empty()) throw std::invalid_argument("grid is empty");
  return grid;
}

// ------------------------------------------------------------------
// check validation (before any simulation)

bool is_verdict_word(const std::string& s) {
  return s == "converging" || s == "diverging" || s == "inconclusive";
}

bool is_regime_word(const std::string& s) {
  return s == "boundary-dominates" || s == "bulk-dominates" || s == "unclassified";
}

long long checkpoints_past(long long horizon, long long burn_in) {
  long long n = 0;
  for (long long t : dyadic_checkpoints(horizon))
    if (t >= burn_in && t >= 1) ++n;
  return n;
}

void require_param(const json& p, const char* key, const std::string& where, Issues& issues) {
  if (!p.contains(key)) issues.add(where, std::string("missing parameter '") + key + "'");
}

void validate_source(const ExperimentConfig& cfg, const json& p, const std::string& where,
                     Issues& issues) {
  std::string source = p.value("source", "");
  if (source == "tau" || source == "lambda") {
    if (cfg.model != ModelKind::walk) {
      issues.add(where, "source '" + source + "' needs a walk model");
      return;
    }
    require_param(p, "level", where, issues);
    if (p.contains("level")) {
      double level = p.at("level").get<double>();
      if (std::find(cfg.levels.begin(), cfg.levels.end(), level) == cfg.levels.end())
        issues.add(where, "level is not in the config levels list");
    }
  } else if (source == "nu") {
    if (cfg.model != ModelKind::lamperti_returns) {
      issues.add(where, "source 'nu' needs a lamperti-returns model");
      return;
    }
    auto s = p.value("scenario", 0LL);
    if (s < 0 || static_cast<std::size_t>(s) >= cfg.lamperti.size())
      issues.add(where, "scenario index out of range");
  } else {
    issues.add(where, "source must be one of tau, lambda, nu");
  }
}

void validate_check(const ExperimentConfig& cfg, const CheckSpec& check, std::size_t index,
                    Issues& issues) {
  const json& p = check.params;
  std::string where = "checks[" + std::to_string(index) + "] (" + check.name + ")";
  try {
    if (check.name == "loglog-slope") {
      if (cfg.model != ModelKind::walk && cfg.model != ModelKind::strip)
        issues.add(where, "needs a walk or strip model");
      require_param(p, "burn_in", where, issues);
      require_param(p, "band_lo", where, issues);
      require_param(p, "band_hi", where, issues);
      if (p.contains("burn_in") && checkpoints_past(cfg.horizon, p.at("burn_in").get<long long>()) < 5)
        issues.add(where, "fewer than 5 checkpoints past burn_in at this horizon");
    } else if (check.name == "growth-ratio") {
      if (cfg.model != ModelKind::walk && cfg.model != ModelKind::strip)
        issues.add(where, "needs a walk or strip model");
      require_param(p, "band_lo", where, issues);
      require_param(p, "band_hi", where, issues);
      if (cfg.horizon < 2) issues.add(where, "needs horizon at least 2");
    } else if (check.name == "upper-envelope") {
      if (cfg.model != ModelKind::walk) issues.add(where, "needs a walk model");
      for (const char* key : {"theta", "phi", "eps", "burn_in", "max_violating_replicas"})
        require_param(p, key, where, issues);
      if (p.contains("theta") && !(p.at("theta").get<double>() > 0.0))
        issues.add(where, "theta must be positive");
      if (p.contains("eps") && !(p.at("eps").get<double>() > 0.0))
        issues.add(where, "eps must be positive");
      if (p.contains("burn_in") && p.at("burn_in").get<long long>() < 3)
        issues.add(where, "burn_in must be at least 3");
    } else if (check.name == "lower-bounds") {
      if (cfg.model != ModelKind::walk) issues.add(where, "needs a walk model");
      for (const char* key : {"alpha", "eps", "burn_in", "min_clean_replicas"})
        require_param(p, key, where, issues);
      if (p.contains("alpha") && !(p.at("alpha").get<double>() > 0.0))
        issues.add(where, "alpha must be positive");
      if (p.contains("burn_in") && p.at("burn_in").get<long long>() < 3)
        issues.add(where, "burn_in must be at least 3");
      if (p.contains("min_clean_replicas") &&
          p.at("min_clean_replicas").get<long long>() > cfg.replicas)
        issues.add(where, "min_clean_replicas exceeds replica count");
    } else if (check.name == "transience") {
      if (cfg.model != ModelKind::walk && cfg.model != ModelKind::strip)
        issues.add(where, "needs a walk or strip model");
      require_param(p, "min_fraction", where, issues);
    } else if (check.name == "survival-slope") {
      validate_source(cfg, p, where, issues);
      for (const char* key : {"grid_lo", "grid_hi", "grid_points", "band_lo", "band_hi"})
        require_param(p, key, where, issues);
      if (p.contains("grid_lo") && p.contains("grid_hi") &&
          !(p.at("grid_lo").get<double>() > 0.0 &&
            p.at("grid_hi").get<double>() > p.at("grid_lo").get<double>()))
        issues.add(where, "grid must satisfy 0 < grid_lo < grid_hi");
      if (p.contains("grid_points") && p.at("grid_points").get<int>() < 4)
        issues.add(where, "grid_points must be at least 4");
    } else if (check.name == "moment-diagnostic") {
      validate_source(cfg, p, where, issues);
      require_param(p, "p", where, issues);
      require_param(p, "expect", where, issues);
      if (p.contains("expect") && !is_verdict_word(p.at("expect").get<std::string>()))
        issues.add(where, "expect must be converging, diverging, or inconclusive");
      long long n = cfg.replicas;
      if (cfg.model == ModelKind::lamperti_returns) {
        auto s = p.value("scenario", 0LL);
        n = s >= 0 && static_cast<std::size_t>(s) < cfg.lamperti.size()
                ? cfg.lamperti[static_cast<std::size_t>(s)].excursions
                : 0;
      }
      if (n < 1000) issues.add(where, "needs at least 1000 samples");
    } else if (check.name == "hill") {
      if (cfg.model != ModelKind::lamperti_returns)
        issues.add(where, "needs a lamperti-returns model");
      require_param(p, "scenario", where, issues);
      require_param(p, "band_lo", where, issues);
      require_param(p, "band_hi", where, issues);
      auto s = p.value("scenario", 0LL);
      if (cfg.model == ModelKind::lamperti_returns &&
          (s < 0 || static_cast<std::size_t>(s) >= cfg.lamperti.size()))
        issues.add(where, "scenario index out of range");
      auto k = p.value("k", 0LL);
      if (k != 0 && k < 10) issues.add(where, "k must be 0 (default) or at least 10");
      if (cfg.model == ModelKind::lamperti_returns && s >= 0 &&
          static_cast<std::size_t>(s) < cfg.lamperti.size() && k != 0 &&
          k >= cfg.lamperti[static_cast<std::size_t>(s)].excursions)
        issues.add(where, "k must be below the excursion count");
    } else if (check.name == "classify" || check.name == "classify-invariance") {
      if (cfg.model != ModelKind::strip) issues.add(where, "needs a strip model");
      if (check.name == "classify") {
        require_param(p, "expect", where, issues);
        if (p.contains("expect") && !is_regime_word(p.at("expect").get<std::string>()))
          issues.add(where, "expect must be a regime name");
      } else {
        require_param(p, "shifts", where, issues);
        if (p.contains("shifts") && (!p.at("shifts").is_array() || p.at("shifts").empty()))
          issues.add(where, "shifts must be a nonempty array");
      }
    } else if (check.name == "final-negative") {
      if (cfg.model != ModelKind::strip) issues.add(where, "needs a strip model");
      require_param(p, "min_fraction", where, issues);
    } else if (check.name == "drift-region") {
      if (cfg.model != ModelKind::drift) issues.add(where, "needs a drift model");
      require_param(p, "scenario", where, issues);
      auto s = p.value("scenario", 0LL);
      if (cfg.model == ModelKind::drift &&
          (s < 0 || static_cast<std::size_t>(s) >= cfg.drift.size()))
        issues.add(where, "scenario index out of range");
    } else if (check.name == "analytic-oracles") {
      if (cfg.model != ModelKind::analytic) issues.add(where, "needs an analytic model");
      if (p.value("identity_rel_tol", 1e-9) <= 0.0 || p.value("karamata_rel_tol", 1e-3) <= 0.0)
        issues.add(where, "tolerances must be positive");
    } else {
      issues.add(where, "unknown check name");
    }
  } catch (const std::exception& e) {
    issues.add(where, e.what());
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&problems] {
        std::string msg = "invalid config:";
        for (const std::string& s : problems) msg += "\n  - " + s;
        return msg;
      }()),
      issues(std::move(problems)) {}

ExperimentConfig parse_config(const json& doc) {
  Issues issues;
  ExperimentConfig cfg;

  cfg.preset = doc.value("preset", "");
  try {
    cfg.horizon = doc.at("horizon").get<long long>();
    if (cfg.horizon < 2) issues.add("horizon", "must be at least 2");
  } catch (const std::exception& e) {
    issues.add("horizon", e.what());
  }
  try {
    cfg.replicas = doc.at("replicas").get<long long>();
    if (cfg.replicas < 1) issues.add("replicas", "must be at least 1");
  } catch (const std::exception& e) {
    issues.add("replicas", e.what());
  }
  try {
    cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();
  } catch (const std::exception& e) {
    issues.add("master_seed", e.what());
  }
  try {
    if (doc.contains("levels"))
      for (const json& v : doc.at("levels")) cfg.levels.push_back(v.get<double>());
  } catch (const std::exception& e) {
    issues.add("levels", e.what());
  }
  cfg.output_dir = doc.value("output_dir", "");

  try {
    const json& model = doc.at("model");
    std::string kind = model.at("kind").get<std::string>();
    if (kind == "walk") {
      cfg.model = ModelKind::walk;
      cfg.law = law_from_json(model.at("law"));
    } else if (kind == "strip") {
      cfg.model = ModelKind::strip;
      cfg.kernel = kernel_from_json(model.at("kernel"));
    } else if (kind == "lamperti-returns") {
      cfg.model = ModelKind::lamperti_returns;
      for (const json& s : model.at("scenarios")) {
        LampertiScenario sc;
        sc.label = s.value("label", "");
        sc.gamma = s.at("gamma").get<double>();
        sc.sigma2 = s.value("sigma2", 1.0);
        sc.excursions = s.at("excursions").get<long long>();
        sc.cap = s.at("cap").get<long long>();
        if (sc.excursions < 1) issues.add("model.scenarios", "excursions must be at least 1");
        if (sc.cap < 1) issues.add("model.scenarios", "cap must be at least 1");
        build_lamperti(sc.gamma, sc.sigma2);  // validates the parameters
        cfg.lamperti.push_back(std::move(sc));
      }
      if (cfg.lamperti.empty()) issues.add("model.scenarios", "need at least one scenario");
    } else if (kind == "drift") {
      cfg.model = ModelKind::drift;
      for (const json& s : model.at("scenarios")) {
        DriftScenario sc;
        sc.label = s.value("label", "");
        sc.law = law_from_json(s.at("law"));
        sc.lyapunov = lyapunov_from_json(s.at("lyapunov"));
        sc.target = target_from_json(s.at("target"));
        sc.grid = grid_from_json(s.at("grid"));
        sc.n = s.at("n").get<long long>();
        if (sc.n < 1000) issues.add("model.scenarios", "n must be at least 1000");
        cfg.drift.push_back(std::move(sc));
      }
      if (cfg.drift.empty()) issues.add("model.scenarios", "need at least one scenario");
    } else if (kind == "analytic") {
      cfg.model = ModelKind::analytic;
    } else {
      issues.add("model.kind", "unknown model kind '" + kind + "'");
    }
  } catch (const std::exception& e) {
    issues.add("model", e.what());
  }

  try {
    for (const json& c : doc.at("checks")) {
      CheckSpec spec;
      spec.name = c.at("name").get<std::string>();
      spec.params = c;
      spec.params.erase("name");
      cfg.checks.push_back(std::move(spec));
    }
  } catch (const std::exception& e) {
    issues.add("checks", e.what());
  }
  if (cfg.checks.empty()) issues.add("checks", "need at least one check");

  if (issues.list.empty())
    for (std::size_t i = 0; i < cfg.checks.size(); ++i)
      validate_check(cfg, cfg.checks[i], i, issues);

  if (!issues.list.empty()) throw ConfigError(std::move(issues.list));
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json model{{"kind", model_kind_name(cfg.model)}};
  switch (cfg.model) {
    case ModelKind::walk:
      model["law"] = law_to_json(cfg.law);
      break;
    case ModelKind::strip:
      model["kernel"] = kernel_to_json(cfg.kernel);
      break;
    case ModelKind::lamperti_returns: {
      json arr = json::array();
      for (const auto& s : cfg.lamperti)
        arr.push_back({{"label", s.label},
                       {"gamma", s.gamma},
                       {"sigma2", s.sigma2},
                       {"excursions", s.excursions},
                       {"cap", s.cap}});
      model["scenarios"] = arr;
      break;
    }
    case ModelKind::drift: {
      json arr = json::array();
      for (const auto& s : cfg.drift)
        arr.push_back({{"label", s.label},
                       {"law", law_to_json(s.law)},
                       {"lyapunov", lyapunov_to_json(s.lyapunov)},
                       {"target", target_to_json(s.target)},
                       {"grid", s.grid},
                       {"n", s.n}});
      model["scenarios"] = arr;
      break;
    }
    case ModelKind::analytic:
      break;
  }

  json checks = json::array();
  for (const auto& c : cfg.checks) {
    json entry = c.params;
    entry["name"] = c.name;
    checks.push_back(entry);
  }

  return {{"preset", cfg.preset},
          {"model", model},
          {"horizon", cfg.horizon},
          {"replicas", cfg.replicas},
          {"master_seed", cfg.master_seed},
          {"levels", cfg.levels},
          {"checks", checks},
          {"output_dir", cfg.output_dir}};
}

namespace {

// ------------------------------------------------------------------
// simulation products

struct RunData {
  std::vector<WalkResult> walks;
  std::vector<StripResult> strips;
  std::vector<ReturnSample> returns;
  std::vector<DriftReport> drifts;
};

StreamKey replica_key(const ExperimentConfig& cfg, long long i) {
  return StreamKey(cfg.master_seed).child("replica").child(static_cast<std::uint64_t>(i));
}

void execute_model(const ExperimentConfig& cfg, RunData& data) {
  switch (cfg.model) {
    case ModelKind::walk: {
      data.walks.resize(static_cast<std::size_t>(cfg.replicas));
#pragma omp parallel for schedule(dynamic)
      for (long long i = 0; i < cfg.replicas; ++i)
        data.walks[static_cast<std::size_t>(i)] =
            simulate_walk(cfg.law, cfg.horizon, replica_key(cfg, i), cfg.levels);
      break;
    }
    case ModelKind::strip: {
      data.strips.resize(static_cast<std::size_t>(cfg.replicas));
#pragma omp parallel for schedule(dynamic)
      for (long long i = 0; i < cfg.replicas; ++i)
        data.strips[static_cast<std::size_t>(i)] =
            simulate_strip(cfg.kernel, cfg.horizon, replica_key(cfg, i));
      break;
    }
    case ModelKind::lamperti_returns:
      for (std::size_t s = 0; s < cfg.lamperti.size(); ++s) {
        const LampertiScenario& sc = cfg.lamperti[s];
        data.returns.push_back(sample_return_times(
            build_lamperti(sc.gamma, sc.sigma2), static_cast<int>(sc.excursions), sc.cap,
            StreamKey(cfg.master_seed).child("scenario").child(s)));
      }
      break;
    case ModelKind::drift:
      for (std::size_t s = 0; s < cfg.drift.size(); ++s) {
        const DriftScenario& sc = cfg.drift[s];
        data.drifts.push_back(verify_drift_region(
            sc.law, sc.lyapunov, sc.grid, sc.target, sc.n,
            StreamKey(cfg.master_seed).child("scenario").child(s)));
      }
      break;
    case ModelKind::analytic:
      break;
  }
}

// ------------------------------------------------------------------
// CSV emission

void write_walk_csvs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                     const std::vector<WalkResult>& walks) {
  std::ofstream cp(dir / "walk_checkpoints.csv");
  cp.precision(12);
  cp << "seed,t,x,run_min,run_max,max_inc\n";
  std::ofstream st;
  if (!cfg.levels.empty()) {
    st.open(dir / "stopping.csv");
    st.precision(12);
    st << "seed,level,tau,lambda,censor_flags\n";
  }
  for (long long i = 0; i < cfg.replicas; ++i) {
    const WalkResult& w = walks[static_cast<std::size_t>(i)];
    std::uint64_t seed = replica_key(cfg, i).value();
    const Trajectory& tr = w.traj;
    for (std::size_t j = 0; j < tr.times.size(); ++j)
      cp << seed << ',' << tr.times[j] << ',' << tr.values[j] << ',' << tr.run_min[j] << ','
         << tr.run_max[j] << ',' << tr.max_inc[j] << '\n';
    if (w.aborted) continue;
    for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
      // censor_flags bitmask: 1 passage censored, 2 last exit unresolved,
      // 4 level never visited from below.
      int flags = 0;
      if (w.stopping.tau[l].status == PassageStatus::censored) flags |= 1;
      if (w.stopping.lambda[l].status == ExitStatus::unresolved) flags |= 2;
      if (w.stopping.lambda[l].status == ExitStatus::none) flags |= 4;
      if (st.is_open())
        st << seed << ',' << cfg.levels[l] << ',' << w.stopping.tau[l].time << ','
           << w.stopping.lambda[l].time << ',' << flags << '\n';
    }
  }
}

void write_strip_csvs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                      const std::vector<StripResult>& strips) {
  std::ofstream cp(dir / "strip_checkpoints.csv");
  cp.precision(12);
  cp << "seed,t,u_is_boundary,v\n";
  std::ofstream ex(dir / "excursions.csv");
  ex << "seed,n,sigma,nu\n";
  for (long long i = 0; i < cfg.replicas; ++i) {
    const StripResult& s = strips[static_cast<std::size_t>(i)];
    std::uint64_t seed = replica_key(cfg, i).value();
    for (std::size_t j = 0; j < s.v.times.size(); ++j)
      cp << seed << ',' << s.v.times[j] << ',' << (s.cp_on_boundary[j] ? 1 : 0) << ','
         << s.v.values[j] << '\n';
    for (std::size_t n = 0; n < s.boundary.nu.size(); ++n)
      ex << seed << ',' << n + 1 << ',' << s.boundary.sigma[n + 1] << ',' << s.boundary.nu[n]
         << '\n';
  }
}

void write_returns_csv(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                       const std::vector<ReturnSample>& returns) {
  std::ofstream out(dir / "returns.csv");
  out << "scenario,label,index,nu,capped\n";
  for (std::size_t s = 0; s < returns.size(); ++s)
    for (std::size_t i = 0; i < returns[s].nu.size(); ++i)
      out << s << ',' << cfg.lamperti[s].label << ',' << i << ',' << returns[s].nu[i] << ','
          << (returns[s].capped[i] ? 1 : 0) << '\n';
}

// ------------------------------------------------------------------
// checks

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const Trajectory* replica_trajectory(const ExperimentConfig& cfg, const RunData& data,
                                     std::size_t i) {
  if (cfg.model == ModelKind::walk)
    return data.walks[i].aborted ? nullptr : &data.walks[i].traj;
  return data.strips[i].aborted ? nullptr : &data.strips[i].v;
}

std::size_t level_index(const ExperimentConfig& cfg, double level) {
  auto it = std::find(cfg.levels.begin(), cfg.levels.end(), level);
  return static_cast<std::size_t>(it - cfg.levels.begin());
}

// Stopping or return-time samples with censor flags; censored entries carry
// the cap they were cut at.
void collect_samples(const ExperimentConfig& cfg, const RunData& data, const json& p,
                     std::vector<double>& values, std::vector<bool>& censored) {
  std::string source = p.at("source").get<std::string>();
  if (source == "nu") {
    const ReturnSample& rs = data.returns[static_cast<std::size_t>(p.value("scenario", 0LL))];
    for (std::size_t i = 0; i < rs.nu.size(); ++i) {
      values.push_back(static_cast<double>(rs.nu[i]));
      censored.push_back(rs.capped[i]);
    }
    return;
  }
  std::size_t li = level_index(cfg, p.at("level").get<double>());
  for (const WalkResult& w : data.walks) {
    if (w.aborted) continue;
    if (source == "tau") {
      values.push_back(static_cast<double>(w.stopping.tau[li].time));
      censored.push_back(w.stopping.tau[li].status == PassageStatus::censored);
    } else {
      values.push_back(static_cast<double>(w.stopping.lambda[li].time));
      censored.push_back(w.stopping.lambda[li].status == ExitStatus::unresolved);
    }
  }
}

json estimate_to_json(const ExponentEstimate& est) {
  return {{"point", est.point},
          {"ci_lo", est.ci_lo},
          {"ci_hi", est.ci_hi},
          {"n_effective", est.n_effective}};
}

// Quadrature for the truncated-mean identity, independent of the closed
// forms it cross-checks.
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol * std::max(1.0, std::abs(whole)), 56);
}

double survival_integral(const TailLaw& law, double z) {
  switch (law.kind) {
    case TailKind::zero:
      return 0.0;
    case TailKind::bounded_uniform:
    case TailKind::constant: {
      double edge = std::min(z, law.bound);
      return integrate([&](double y) { return law.tail_prob(y); }, 0.0, edge, 1e-12);
    }
    case TailKind::pareto:
    case TailKind::pareto_log: {
      double total = std::min(z, law.cutoff_x0);  // survival is exactly 1 here
      if (z > law.cutoff_x0)
        total += integrate(
            [&](double w) {
              double y = std::exp(w);
              return law.tail_prob(y) * y;
            },
            std::log(law.cutoff_x0), std::log(z), 1e-12);
      return total;
    }
  }
  return 0.0;
}

CheckResult eval_check(const ExperimentConfig& cfg, const RunData& data, const CheckSpec& check) {
  const json& p = check.params;
  CheckResult result;
  result.name = check.name;

  if (check.name == "loglog-slope") {
    long long burn_in = p.at("burn_in").get<long long>();
    bool use_abs = p.value("use_abs", false);
    // Fit one slope through the replica-median path rather than taking the
    // median of per-replica slopes: when a handful of record jumps carry a
    // path, individual least-squares slopes skew right and their median
    // lands well below the growth exponent, while the median path tracks it.
    std::vector<const Trajectory*> trs;
    for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.replicas); ++i) {
      const Trajectory* tr = replica_trajectory(cfg, data, i);
      if (tr) trs.push_back(tr);
    }
    if (trs.empty()) throw std::runtime_error("no usable replicas");
    Trajectory med;
    med.times = trs[0]->times;
    med.horizon = trs[0]->horizon;
    for (std::size_t j = 0; j < med.times.size(); ++j) {
      std::vector<double> at_j;
      at_j.reserve(trs.size());
      for (const Trajectory* tr : trs) {
        if (tr->values.size() != med.times.size())
          throw std::runtime_error("replica checkpoint grids differ");
        at_j.push_back(use_abs ? std::fabs(tr->values[j]) : tr->values[j]);
      }
      med.values.push_back(median_of(at_j));
    }
    double slope = loglog_slope(med, burn_in).point;
    double lo = p.at("band_lo").get<double>(), hi = p.at("band_hi").get<double>();
    result.pass = slope >= lo && slope <= hi;
    result.details = {{"median_slope", slope},
                      {"band", {lo, hi}},
                      {"replicas_used", trs.size()}};
  } else if (check.name == "growth-ratio") {
    // Finite-horizon growth exponent log |X_T| / log T, median across
    // replicas.  Dividing by the full log-horizon rather than fitting a line
    // over checkpoints makes the statistic far less sensitive to the single
    // record jumps that dominate these paths.
    bool use_abs = p.value("use_abs", false);
    std::vector<double> terminal;
    for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.replicas); ++i) {
      const Trajectory* tr = replica_trajectory(cfg, data, i);
      if (!tr) continue;
      double v = tr->values.back();
      terminal.push_back(use_abs ? std::fabs(v) : v);
    }
    if (terminal.empty()) throw std::runtime_error("no usable replicas");
    double med = median_of(terminal);
    double ratio = std::log(std::max(med, 1.0)) / std::log(static_cast<double>(cfg.horizon));
    double lo = p.at("band_lo").get<double>(), hi = p.at("band_hi").get<double>();
    result.pass = ratio >= lo && ratio <= hi;
    result.details = {{"median_ratio", ratio},
                      {"band", {lo, hi}},
                      {"replicas_used", terminal.size()}};
  } else if (check.name == "upper-envelope") {
    double theta = p.at("theta").get<double>(), phi = p.at("phi").get<double>(),
           eps = p.at("eps").get<double>();
    long long burn_in = p.at("burn_in").get<long long>();
    long long allowed = p.at("max_violating_replicas").get<long long>();
    long long violating = 0, used = 0;
    for (const WalkResult& w : data.walks) {
      if (w.aborted) continue;
      ++used;
      if (count_upper_violations(w.traj, theta, phi, eps, burn_in).violations > 0) ++violating;
    }
    result.pass = violating <= allowed;
    result.details = {{"violating_replicas", violating},
                      {"allowed", allowed},
                      {"replicas_used", used}};
  } else if (check.name == "lower-bounds") {
    double alpha = p.at("alpha").get<double>(), eps = p.at("eps").get<double>();
    long long burn_in = p.at("burn_in").get<long long>();
    long long need = p.at("min_clean_replicas").get<long long>();
    long long clean = 0, used = 0;
    for (const WalkResult& w : data.walks) {
      if (w.aborted) continue;
      ++used;
      bool ok = count_lower_violations(w.traj, alpha, eps, burn_in).violations == 0 &&
                count_max_inc_violations(w.traj, alpha, eps, burn_in).violations == 0;
      if (ok) ++clean;
    }
    result.pass = clean >= need;
    result.details = {{"clean_replicas", clean}, {"required", need}, {"replicas_used", used}};
  } else if (check.name == "transience") {
    double floor = p.value("floor", 0.0);
    double need = p.at("min_fraction").get<double>();
    long long above = 0, used = 0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.replicas); ++i) {
      const Trajectory* tr = replica_trajectory(cfg, data, i);
      if (!tr) continue;
      ++used;
      if (tr->values.back() > floor) ++above;
    }
    if (used == 0) throw std::runtime_error("no usable replicas");
    double frac = static_cast<double>(above) / static_cast<double>(used);
    result.pass = frac >= need;
    result.details = {{"fraction_above", frac}, {"floor", floor}, {"required", need}};
  } else if (check.name == "survival-slope") {
    std::vector<double> values;
    std::vector<bool> flags;
    collect_samples(cfg, data, p, values, flags);
    std::vector<double> grid = geometric_grid(p.at("grid_lo").get<double>(),
                                              p.at("grid_hi").get<double>(),
                                              p.at("grid_points").get<int>());
    SurvivalFit fit = survival_slope(values, flags, grid);
    double lo = p.at("band_lo").get<double>(), hi = p.at("band_hi").get<double>();
    result.pass = fit.estimate.point >= lo && fit.estimate.point <= hi;
    result.details = {{"estimate", estimate_to_json(fit.estimate)},
                      {"band", {lo, hi}},
                      {"n_censored", fit.n_censored},
                      {"head_slope", fit.head_slope},
                      {"tail_slope", fit.tail_slope},
                      {"all_moments_finite_hint", fit.all_moments_finite_hint}};
  } else if (check.name == "moment-diagnostic") {
    std::vector<double> values;
    std::vector<bool> flags;
    collect_samples(cfg, data, p, values, flags);
    double mp = p.at("p").get<double>();
    MomentVerdict verdict = moment_diagnostic(values, mp);
    std::string expect = p.at("expect").get<std::string>();
    result.pass = to_string(verdict) == expect;
    result.details = {{"verdict", to_string(verdict)},
                      {"expect", expect},
                      {"p", mp},
                      {"n_samples", values.size()}};
  } else if (check.name == "hill") {
    const ReturnSample& rs = data.returns[static_cast<std::size_t>(p.at("scenario").get<long long>())];
    // Capped excursions stay in the sample at the cap value and the point is
    // scaled by the uncensored share of the averaging window. Dropping them
    // instead would push the estimate up, badly so for the heaviest tails.
    std::vector<double> samples;
    samples.reserve(rs.nu.size());
    for (long long v : rs.nu) samples.push_back(static_cast<double>(v));
    long long k = p.value("k", 0LL);
    if (k == 0) k = hill_default_k(samples.size());
    if (rs.n_capped >= k)
      throw std::domain_error("hill check: more censored samples than the window holds");
    ExponentEstimate est = hill_estimate(samples, k);
    double uncensored_share =
        1.0 - static_cast<double>(rs.n_capped) / static_cast<double>(k);
    est.point *= uncensored_share;
    est.ci_lo *= uncensored_share;
    est.ci_hi *= uncensored_share;
    double lo = p.at("band_lo").get<double>(), hi = p.at("band_hi").get<double>();
    result.pass = est.point >= lo && est.point <= hi;
    result.details = {{"estimate", estimate_to_json(est)},
                      {"band", {lo, hi}},
                      {"k", k},
                      {"capped_in_sample", rs.n_capped},
                      {"uncensored_share", uncensored_share}};
  } else if (check.name == "classify") {
    RegimeReport rep = classify_regime(cfg.kernel);
    std::string expect = p.at("expect").get<std::string>();
    result.pass = regime_name(rep.regime) == expect;
    if (p.contains("slope"))
      result.pass = result.pass && std::abs(rep.slope - p.at("slope").get<double>()) <= 1e-9;
    if (p.contains("direction"))
      result.pass = result.pass && rep.direction == p.at("direction").get<int>();
    result.details = {{"regime", regime_name(rep.regime)},
                      {"slope", rep.slope},
                      {"direction", rep.direction},
                      {"basis", rep.basis}};
  } else if (check.name == "classify-invariance") {
    RegimeReport base = classify_regime(cfg.kernel);
    json rows = json::array();
    bool equal = true;
    for (const json& sv : p.at("shifts")) {
      StripKernel shifted = cfg.kernel;
      shifted.bulk_jump.drift_shift = sv.get<double>();
      RegimeReport rep = classify_regime(shifted);
      equal = equal && rep.regime == base.regime && rep.slope == base.slope &&
              rep.direction == base.direction;
      rows.push_back({{"shift", sv.get<double>()},
                      {"regime", regime_name(rep.regime)},
                      {"slope", rep.slope},
                      {"direction", rep.direction}});
    }
    result.pass = equal;
    result.details = {{"base_regime", regime_name(base.regime)}, {"shifted", rows}};
  } else if (check.name == "final-negative") {
    double need = p.at("min_fraction").get<double>();
    long long below = 0, used = 0;
    for (const StripResult& s : data.strips) {
      if (s.aborted) continue;
      ++used;
      if (s.v.values.back() < 0.0) ++below;
    }
    if (used == 0) throw std::runtime_error("no usable replicas");
    double frac = static_cast<double>(below) / static_cast<double>(used);
    result.pass = frac >= need;
    result.details = {{"fraction_negative", frac}, {"required", need}};
  } else if (check.name == "drift-region") {
    const DriftScenario& sc = cfg.drift[static_cast<std::size_t>(p.at("scenario").get<long long>())];
    const DriftReport& rep = data.drifts[static_cast<std::size_t>(p.at("scenario").get<long long>())];
    DriftVerdict want = sc.target.direction == DriftDirection::submartingale
                            ? DriftVerdict::ge_confirmed
                            : DriftVerdict::le_confirmed;
    bool stable = rep.stable_from >= 0;
    bool suffix_ok = stable;
    for (std::size_t j = stable ? static_cast<std::size_t>(rep.stable_from) : 0;
         stable && j < rep.grid.size(); ++j)
      suffix_ok = suffix_ok && rep.verdict[j] == want;
    result.pass = stable && suffix_ok;
    json verdicts = json::array();
    for (std::size_t j = 0; j < rep.grid.size(); ++j)
      verdicts.push_back({{"state", rep.grid[j]},
                          {"mean", rep.mean_drift[j]},
                          {"ci_half_width", rep.ci_half_width[j]},
                          {"threshold", rep.threshold[j]},
                          {"verdict", to_string(rep.verdict[j])},
                          {"cap_hits", rep.cap_hits[j]}});
    result.details = {{"label", sc.label},
                      {"stable_from", rep.stable_from},
                      {"region_start",
                       stable ? json(rep.grid[static_cast<std::size_t>(rep.stable_from)]) : json()},
                      {"states", verdicts}};
  } else if (check.name == "analytic-oracles") {
    double id_tol = p.value("identity_rel_tol", 1e-9);
    double ka_tol = p.value("karamata_rel_tol", 1e-3);
    double ka_alpha = p.value("karamata_alpha", 0.5);
    double ka_z = p.value("karamata_z", 1e8);

    struct Row {
      TailLaw law;
      double z;
    };
    const Row battery[] = {
        {TailLaw::pareto(0.5, 1.0), 10.0},    {TailLaw::pareto(0.5, 1.0), 1e4},
        {TailLaw::pareto(0.5, 1.0), 1e8},     {TailLaw::pareto(0.75, 2.0), 16.0},
        {TailLaw::pareto(0.75, 2.0), 4096.0}, {TailLaw::pareto(1.5, 1.0), 100.0},
        {TailLaw::bounded_uniform(1.0), 0.5}, {TailLaw::bounded_uniform(1.0), 2.0},
        {TailLaw::constant(2.5), 1.0},        {TailLaw::constant(2.5), 3.0},
    };
    json rows = json::array();
    bool identity_ok = true;
    for (const Row& row : battery) {
      double lhs = row.law.truncated_mean(row.z) + row.z * row.law.tail_prob(row.z);
      double rhs = survival_integral(row.law, row.z);
      double rel = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
      identity_ok = identity_ok && rel <= id_tol;
      rows.push_back({{"law", tail_kind_name(row.law.kind)},
                      {"z", row.z},
                      {"lhs", lhs},
                      {"rhs", rhs},
                      {"rel_err", rel}});
    }
    TailLaw ka = TailLaw::pareto(ka_alpha, 1.0);
    double ratio = ka.truncated_mean(ka_z) / ka.karamata_asymptote(ka_z);
    bool karamata_ok = std::abs(ratio - 1.0) <= ka_tol;
    result.pass = identity_ok && karamata_ok;
    result.details = {{"identity_rows", rows},
                      {"identity_ok", identity_ok},
                      {"karamata_ratio", ratio},
                      {"karamata_ok", karamata_ok}};
  } else {
    throw std::runtime_error("unknown check '" + check.name + "'");
  }
  return result;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

json RunReport::payload() const {
  json checks_json = json::array();
  for (const CheckResult& c : checks)
    checks_json.push_back({{"name", c.name}, {"pass", c.pass}, {"details", c.details}});
  return {{"preset", preset},
          {"config_hash", config_hash},
          {"master_seed", master_seed},
          {"replicas_requested", replicas_requested},
          {"replicas_completed", replicas_completed},
          {"aborted_replicas", aborted_replicas},
          {"checks", checks_json},
          {"all_pass", all_pass}};
}

json RunReport::to_json() const {
  json j = payload();
  j["wall_clock_seconds"] = wall_clock_seconds;
  return j;
}

RunReport run(const ExperimentConfig& cfg) {
#ifdef _OPENMP
  if (const char* env = std::getenv(kThreadsEnvVar)) {
    int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif

  auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  report.preset = cfg.preset;
  report.master_seed = cfg.master_seed;
  report.replicas_requested = cfg.replicas;
  report.config_hash = hex16(StreamKey::fnv1a(config_to_json(cfg).dump()));

  RunData data;
  execute_model(cfg, data);

  for (long long i = 0; i < cfg.replicas; ++i) {
    bool aborted = false;
    if (cfg.model == ModelKind::walk)
      aborted = data.walks[static_cast<std::size_t>(i)].aborted;
    else if (cfg.model == ModelKind::strip)
      aborted = data.strips[static_cast<std::size_t>(i)].aborted;
    if (aborted) report.aborted_replicas.push_back(i);
  }
  report.replicas_completed =
      cfg.replicas - static_cast<long long>(report.aborted_replicas.size());

  if (!cfg.output_dir.empty()) {
    std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    if (cfg.model == ModelKind::walk) write_walk_csvs(dir, cfg, data.walks);
    if (cfg.model == ModelKind::strip) write_strip_csvs(dir, cfg, data.strips);
    if (cfg.model == ModelKind::lamperti_returns) write_returns_csv(dir, cfg, data.returns);
  }

  for (const CheckSpec& check : cfg.checks) {
    CheckResult result;
    try {
      result = eval_check(cfg, data, check);
    } catch (const std::exception& e) {
      result.name = check.name;
      result.pass = false;
      result.details = {{"error", e.what()}};
    }
    report.all_pass = report.all_pass && result.pass;
    report.checks.push_back(std::move(result));
  }

  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!cfg.output_dir.empty()) {
    std::ofstream out(std::filesystem::path(cfg.output_dir) / "report.json");
    out << report.to_json().dump(2) << '\n';
  }
  return report;
}

}  // namespace heavywalk
