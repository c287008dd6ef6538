#ifndef BDI_RNG_HPP
#define BDI_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace bdi {

// Deterministic random source. The mt19937_64 output sequence is pinned by
// the standard; the transforms below are hand-rolled because the std::
// distributions are implementation-defined and would break cross-compiler
// reproducibility of datasets and reports.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t integer(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    std::uint64_t x;
    do {
      x = engine_();
    } while (x < threshold);
    return x % n;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bdi

#endif  // BDI_RNG_HPP
