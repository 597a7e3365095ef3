#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace petacat {

/// Seeded generator whose output is identical on every platform.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the C++ standard.
/// The standard distributions are implementation-defined, so the uniform and
/// normal draws are done here: uniform() takes the top 53 bits of one engine
/// word, normal() is the Box-Muller transform using two uniforms (the second
/// variate of each pair is cached).
class Rng {
public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+u53+box-muller";
  static constexpr int kAlgorithmVersion = 1;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace petacat
