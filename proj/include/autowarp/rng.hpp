#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace autowarp {

/// Deterministic generator. Draws are built from raw 64-bit engine output
/// only (no std distributions), so streams are identical across standard
/// library implementations. `substream(name)` derives an independent child
/// generator keyed by name.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  Rng substream(std::string_view name) const;
  Rng substream(std::uint64_t k) const;

 private:
  static std::uint64_t mix(std::uint64_t x);

  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline Rng seeded_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace autowarp
