#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sleepgp {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Mixes a base seed with stream tags so that distinct pipeline stages,
// repetitions, generations etc. each get an independent stream.
inline std::uint64_t derive_seed(std::uint64_t base) { return splitmix64(base); }

template <class... Rest>
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, Rest... rest) {
  return derive_seed(splitmix64(base ^ (tag + 0x9e3779b97f4a7c15ULL)), rest...);
}

// Seeded generator with hand-rolled mappings. std:: distributions are
// implementation-defined, which would break the reproducibility contract;
// the mt19937_64 engine itself is fully specified by the standard.
class rng_t {
 public:
  explicit rng_t(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // uniform in [0, n); n must be > 0
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  double normal(double mean = 0.0, double sd = 1.0) {
    // Box-Muller; the tiny offset keeps log() away from zero.
    double u1 = uniform01() + 0x1.0p-54;
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(6.283185307179586 * u2);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace sleepgp
