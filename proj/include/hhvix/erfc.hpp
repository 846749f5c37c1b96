#pragma once

#include <cmath>
#include <complex>

namespace hhvix {

namespace detail {

using cplxl = std::complex<long double>;

inline constexpr long double kInvSqrtPiL = 0.564189583547756286948079451560772586L;

/// erf(z) by its Maclaurin series, summed in extended precision.
inline cplxl erf_series(cplxl z) {
  const cplxl mz2 = -z * z;
  cplxl term = z;  // z^{2n+1} (-1)^n / n!
  cplxl sum = z;
  for (int n = 1; n < 2000; ++n) {
    term *= mz2 / static_cast<long double>(n);
    const cplxl add = term / static_cast<long double>(2 * n + 1);
    sum += add;
    if (std::abs(add) <= 1e-21L * std::abs(sum)) break;
  }
  return 2.0L * kInvSqrtPiL * sum;
}

/// erfc(z) for Re(z) > 0 from the Laplace continued fraction
/// erfc(z) = e^{-z^2}/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))),
/// evaluated with the modified Lentz method.
inline cplxl erfc_cfrac(cplxl z) {
  constexpr long double tiny = 1e-300L;
  cplxl f = z;
  cplxl C = f;
  cplxl D = 0.0L;
  for (int n = 1; n < 20000; ++n) {
    const long double a = 0.5L * n;
    D = z + a * D;
    if (std::abs(D) < tiny) D = tiny;
    C = z + a / C;
    if (std::abs(C) < tiny) C = tiny;
    D = 1.0L / D;
    const cplxl delta = C * D;
    f *= delta;
    if (std::abs(delta - 1.0L) < 1e-20L) break;
  }
  return std::exp(-z * z) * kInvSqrtPiL / f;
}

}  // namespace detail

/// Complementary error function of a complex argument.
///
/// Regions: the Maclaurin series of erf where |Re z| is small enough that
/// 1 - erf(z) does not cancel badly (|Re z| < 2.345, |z| < 12); the Laplace
/// continued fraction for Re z > 0 elsewhere; erfc(-z) = 2 - erfc(z) for the
/// left half-plane.
inline std::complex<double> erfc_complex(std::complex<double> z) {
  using detail::cplxl;
  const cplxl zl(z.real(), z.imag());
  const long double x = zl.real();
  if (std::abs(x) < 2.345L && std::abs(zl) < 12.0L) {
    const cplxl r = 1.0L - detail::erf_series(zl);
    return {static_cast<double>(r.real()), static_cast<double>(r.imag())};
  }
  if (z.imag() == 0.0) {
    // Real axis: erfc(x) underflows to 0 / saturates at 2 without trouble.
    return x > 0 ? std::erfc(z.real()) : 2.0 - std::erfc(-z.real());
  }
  cplxl r;
  if (x >= 0.0L) {
    r = detail::erfc_cfrac(zl);
  } else {
    r = 2.0L - detail::erfc_cfrac(-zl);
  }
  return {static_cast<double>(r.real()), static_cast<double>(r.imag())};
}

}  // namespace hhvix
