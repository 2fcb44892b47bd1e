#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "bcs/scalar.hpp"

namespace bcs {

/// SplitMix64 step, used to derive independent stream seeds from a base seed
/// plus salts. The derivation is pure arithmetic, identical on every platform.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = base;
  std::uint64_t out = splitmix64(s);
  s ^= a * 0xff51afd7ed558ccdULL;
  out ^= splitmix64(s);
  s ^= b * 0xc4ceb9fe1a85ec53ULL;
  out ^= splitmix64(s);
  s ^= c * 0x2545f4914f6cdd1dULL;
  out ^= splitmix64(s);
  return out;
}

/// Deterministic random stream. Samplers are hand-rolled on top of the
/// standard-pinned mt19937_64 engine so that sequences are bit-identical
/// across standard libraries (std distributions are not pinned).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t v = eng_();
    while (v >= limit) v = eng_();
    return v % n;
  }

  /// Standard normal via Box-Muller (cached pair).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Standard Gaussian in the scalar field T: N(0,1) for real T,
  /// circularly-symmetric CN(0,1) for complex T.
  template <Scalar T>
  T standard_gaussian() {
    if constexpr (is_complex_v<T>) {
      const double s = 0.7071067811865475244;  // 1/sqrt(2)
      const double re = normal();
      const double im = normal();
      return T(re * s, im * s);
    } else {
      return static_cast<T>(normal());
    }
  }

  /// Unit-magnitude scalar: random sign for real T, uniform phase for complex.
  template <Scalar T>
  T unit_amplitude() {
    if constexpr (is_complex_v<T>) {
      const double a = 2.0 * 3.141592653589793238462643383279502884 * uniform01();
      return T(std::cos(a), std::sin(a));
    } else {
      return (bits() & 1u) ? T(1) : T(-1);
    }
  }

  template <typename V>
  void shuffle(std::vector<V>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bcs
