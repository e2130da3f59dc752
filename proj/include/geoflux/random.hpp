#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace geoflux {

// Deterministic random stream: mt19937_64 with explicit double/normal
// generation so outputs are bit-identical across platforms and thread counts.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  double uniform() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {  // polar Box-Muller
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  // Stream seed for replica `index` of a run keyed by `master`.
  static std::uint64_t derive(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace geoflux
