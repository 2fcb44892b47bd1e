#pragma once

#include <cmath>
#include <complex>
#include <type_traits>

namespace bcs {

template <typename T>
struct is_complex : std::false_type {};
template <typename R>
struct is_complex<std::complex<R>> : std::true_type {};

template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <typename T>
struct real_of {
  using type = T;
};
template <typename R>
struct real_of<std::complex<R>> {
  using type = R;
};

/// Underlying real type of a scalar field (double for both double and
/// std::complex<double>).
template <typename T>
using real_t = typename real_of<T>::type;

template <typename T>
concept Scalar = std::is_floating_point_v<T> ||
                 (is_complex_v<T> && std::is_floating_point_v<real_t<T>>);

template <Scalar T>
constexpr T conjugate(T v) {
  if constexpr (is_complex_v<T>) {
    return std::conj(v);
  } else {
    return v;
  }
}

/// |v|^2 without the sqrt of std::abs.
template <Scalar T>
constexpr real_t<T> abs_sq(T v) {
  if constexpr (is_complex_v<T>) {
    return v.real() * v.real() + v.imag() * v.imag();
  } else {
    return v * v;
  }
}

template <Scalar T>
bool is_finite(T v) {
  if constexpr (is_complex_v<T>) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  } else {
    return std::isfinite(v);
  }
}

}  // namespace bcs
