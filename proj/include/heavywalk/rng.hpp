#pragma once

#include <cstdint>
#include <string_view>

namespace heavywalk {

// Counter-based generator (splitmix64). The state is a counter advanced by a
// fixed odd increment; each output is a bijective finalizer of the counter.
// Two instances seeded with different keys therefore produce unrelated
// streams, which is what the replica/sub-task seeding contract relies on.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : counter_(seed) {}

  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~0ULL; }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t operator()() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix(counter_);
  }

  // Uniform on [0,1) with 53 random mantissa bits; never returns 1.0.
  double u01() { return static_cast<double>(operator()() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t counter_;
};

// Hierarchical stream derivation.  A key is split into child keys by integer
// index or by name, e.g.
//   StreamKey(master).child("replica").child(i)          per-replica stream
//   StreamKey(master).child("replica").child(i).child("induced")
// The derivation is pure arithmetic, so the stream attached to a path is
// independent of evaluation order and of the worker count.
class StreamKey {
 public:
  explicit constexpr StreamKey(std::uint64_t key) : key_(key) {}

  StreamKey child(std::uint64_t label) const {
    return StreamKey(SplitMix64::mix(key_ + 0x9e3779b97f4a7c15ULL * (label + 0x632be59bd9b4e019ULL)));
  }

  StreamKey child(std::string_view name) const { return child(fnv1a(name)); }

  SplitMix64 stream() const { return SplitMix64(key_); }

  std::uint64_t value() const { return key_; }

  static constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  std::uint64_t key_;
};

}  // namespace heavywalk
