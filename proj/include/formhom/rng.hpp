#ifndef FORMHOM_RNG_HPP
#define FORMHOM_RNG_HPP

#include <cmath>
#include <cstdint>

// Counter-based generator: every draw is a hash of (key, counter), so a
// stream is a pure function of its key and draw index.  Streams for distinct
// (seed, sample, cell) keys are independent of iteration order and threads.

namespace formhom {

inline std::uint64_t rngMix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t rngCombine(std::uint64_t a, std::uint64_t b) {
  return rngMix(a ^ (rngMix(b) + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2)));
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  template <typename... Ks>
  static std::uint64_t key(std::uint64_t k0, Ks... rest) {
    std::uint64_t k = rngMix(k0);
    ((k = rngCombine(k, static_cast<std::uint64_t>(rest))), ...);
    return k;
  }

  std::uint64_t next() { return rngMix(key_ + 0xA0761D6478BD642FULL * (++ctr_)); }

  /// uniform in [0,1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// standard normal (Box-Muller, two draws per call)
  double gaussian() {
    double u1 = 1.0 - uniform();  // (0,1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  bool bernoulli(double p = 0.5) { return uniform() < p; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace formhom

#endif
