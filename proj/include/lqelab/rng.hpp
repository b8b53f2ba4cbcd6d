#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lqelab {

// Deterministic random source for simulations. mt19937_64 is fully specified
// by the standard, and all transforms below are hand-rolled, so a given seed
// produces the same stream on every platform and standard library.
class SimRng {
 public:
  explicit SimRng(std::uint64_t seed = 1) : gen_(seed) {}

  // Derives an independent generator for a named stream of one run, so that
  // e.g. channel sampling and MAC backoff draws do not interleave.
  static SimRng for_stream(std::uint64_t seed, std::uint64_t stream) {
    return SimRng(splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1))));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

  // Inclusive range [lo, hi].
  int uniform_int(int lo, int hi) {
    if (hi <= lo) return lo;
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
  }

  // Box-Muller, one value per call (no cached second draw, so the stream
  // position is a pure function of the call count).
  double gaussian(double mean, double sigma) {
    if (sigma <= 0.0) return mean;
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + sigma * z;
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace lqelab
