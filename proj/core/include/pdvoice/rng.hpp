#pragma once

// Seeded randomness helpers. mt19937_64 is fully specified by the standard,
// but the <random> distributions are not, so anything that must reproduce
// bit-identically (shuffles, gaussians, index draws) is implemented here on
// top of the raw engine output.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace pdvoice {

// splitmix64; used to derive independent per-unit seeds (per tree, per fold,
// per repeat) from one base seed so results do not depend on scheduling.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, n). Modulo bias is < 2^-32 for any n that fits our data.
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>(next_u64() % n);
  }

  double next_double() {  // [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_gaussian() {  // Box-Muller, one value per call
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {  // Fisher-Yates
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = next_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace pdvoice
