#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace djd {

/// Portable random stream: std::mt19937_64 bits with our own conversions, since the standard
/// distributions are implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t bound);  // uniform in [0, bound)
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Order-sensitive mix of integers into one seed.
std::uint64_t stable_hash(std::initializer_list<std::uint64_t> parts);

/// Fisher-Yates permutation of [0, n).
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed);

}  // namespace djd
