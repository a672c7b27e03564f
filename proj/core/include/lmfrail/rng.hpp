// Deterministic random number generation (xoshiro256++ seeded through
// splitmix64) with hand-rolled distributions, so simulation output is
// reproducible across platforms and standard libraries. Child streams
// derived from (master seed, stream index) are independent, which makes
// replicate runs order- and thread-invariant.
#pragma once

#include <cstdint>

namespace lmfrail {

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Stream for replicate `stream` of a run seeded with `master_seed`.
  static Rng child(std::uint64_t master_seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1).
  double uniform01();

  // Box-Muller.
  double normal(double mean = 0.0, double sd = 1.0);

  // Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
  double gamma(double shape, double scale);

  double beta(double a, double b);

 private:
  std::uint64_t s_[4];
};

}  // namespace lmfrail
