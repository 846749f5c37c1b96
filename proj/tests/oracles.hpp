#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library's numerical kernels.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

namespace oracle {

using cplx = std::complex<double>;

/// Riccati G from its textbook form 2k / (s^2 + e^{k tau}(2k/phi - s^2)).
inline cplx G(double kappa, double sigma, cplx phi, double tau) {
  return 2.0 * kappa / (sigma * sigma + std::exp(kappa * tau) * (2.0 * kappa / phi - sigma * sigma));
}

struct HawkesRiccati {
  double kappa, sigma, alpha, beta, eta;
  std::function<cplx(cplx)> mgf;  // jump MGF at a complex argument
  cplx phi;
};

/// Fixed-step RK4 in tau for h' = -beta h + e^{alpha h} M(eta G) - 1 from
/// h(0) = psi. Returns h on the uniform tau grid (n + 1 values).
inline std::vector<cplx> rk4_H(const HawkesRiccati& m, cplx psi, double T, long n) {
  auto f = [&](double tau, cplx h) {
    const cplx g = G(m.kappa, m.sigma, m.phi, tau);
    const cplx mj = m.eta == 0.0 ? cplx(1.0) : m.mgf(m.eta * g);
    return -m.beta * h + std::exp(m.alpha * h) * mj - 1.0;
  };
  const double dt = T / static_cast<double>(n);
  std::vector<cplx> out(static_cast<std::size_t>(n) + 1);
  cplx h = psi;
  out[0] = h;
  for (long i = 0; i < n; ++i) {
    const double tau = dt * static_cast<double>(i);
    const cplx k1 = f(tau, h);
    const cplx k2 = f(tau + dt / 2, h + dt / 2 * k1);
    const cplx k3 = f(tau + dt / 2, h + dt / 2 * k2);
    const cplx k4 = f(tau + dt, h + dt * k3);
    h += dt / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out[static_cast<std::size_t>(i) + 1] = h;
  }
  return out;
}

/// Fixed-step RK4 for the G ODE dG/dtau = -(k G - s^2 G^2 / 2), G(0) = phi.
inline cplx rk4_G(double kappa, double sigma, cplx phi, double tau_end, long n) {
  auto f = [&](cplx g) { return -(kappa * g - 0.5 * sigma * sigma * g * g); };
  const double dt = tau_end / static_cast<double>(n);
  cplx g = phi;
  for (long i = 0; i < n; ++i) {
    const cplx k1 = f(g), k2 = f(g + dt / 2 * k1), k3 = f(g + dt / 2 * k2), k4 = f(g + dt * k3);
    g += dt / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return g;
}

/// Composite Simpson on samples y[0..n] with spacing dx (n even).
template <class T>
T simpson(const std::vector<T>& y, double dx) {
  const std::size_t n = y.size() - 1;
  T s = y[0] + y[n];
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * y[i];
  return s * (dx / 3.0);
}

template <class F>
double simpson(F&& f, double a, double b, long n) {
  const double dx = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (long i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + dx * static_cast<double>(i));
  return s * dx / 3.0;
}

/// E[exp(phi v_T) | v_t = v] for CIR(kappa, vbar, sigma), tau = T - t.
inline cplx cir_laplace(double kappa, double vbar, double sigma, cplx phi, double v, double tau) {
  const double c = sigma * sigma * (1.0 - std::exp(-kappa * tau)) / (4.0 * kappa);
  const cplx d = 1.0 - 2.0 * c * phi;
  return std::exp(v * std::exp(-kappa * tau) * phi / d) * std::pow(d, -2.0 * kappa * vbar / (sigma * sigma));
}

namespace detail {

template <unsigned Digits>
cplx erfc_series_at(cplx z, int needed) {
  using namespace boost::multiprecision;
  using real = number<cpp_bin_float<Digits>>;
  using cx = number<complex_adaptor<cpp_bin_float<Digits>>>;
  const cx zz(real(z.real()), real(z.imag()));
  const cx mz2 = -zz * zz;
  cx term = zz;
  cx sum = zz;
  // Stop once terms fall below the absolute accuracy the result needs.
  const real cutoff = pow(real(10), -needed);
  for (int n = 1; n < 5000; ++n) {
    term *= mz2 / n;
    const cx add = term / (2 * n + 1);
    sum += add;
    if (n > 2 * std::norm(z) && real(abs(add.real()) + abs(add.imag())) < cutoff) break;
  }
  const cx r = cx(1) - 2 * sum / sqrt(boost::math::constants::pi<real>());
  return {static_cast<double>(r.real()), static_cast<double>(r.imag())};
}

}  // namespace detail

/// erfc by the Maclaurin series of erf in extended-precision complex
/// arithmetic. The working precision covers the largest partial sums
/// (about e^{|z|^2}) plus the smallest result (about e^{-Re z^2}) plus 25
/// digits of margin.
inline cplx erfc_series(cplx z) {
  const double x = z.real(), y = z.imag();
  const double lost = (x * x + y * y) / std::log(10.0);
  const double tiny = std::max(0.0, (x * x - y * y) / std::log(10.0) + std::log10(1.0 + std::abs(z)));
  const int needed = static_cast<int>(std::ceil(tiny + 25.0));
  const int digits = static_cast<int>(std::ceil(lost + tiny + 25.0));
  if (digits <= 50) return detail::erfc_series_at<50>(z, needed);
  if (digits <= 80) return detail::erfc_series_at<80>(z, needed);
  return detail::erfc_series_at<120>(z, needed);
}

/// Largest c on a uniform n-point grid of (0, cmax] satisfying `feasible`
/// (scanning every point), then refined with a bracketing root solve of the
/// boundary function `boundary` (positive when feasible).
template <class Feasible, class Boundary>
double grid_sup(Feasible&& feasible, Boundary&& boundary, double cmax, long n) {
  long last = 0;
  for (long i = 1; i <= n; ++i) {
    if (feasible(cmax * static_cast<double>(i) / static_cast<double>(n))) last = i;
  }
  if (last == n) return cmax;
  const double lo = cmax * static_cast<double>(last) / static_cast<double>(n);
  const double hi = cmax * static_cast<double>(last + 1) / static_cast<double>(n);
  if (last == 0 || boundary(lo) * boundary(hi) > 0.0) return lo;
  boost::uintmax_t it = 200;
  const auto r = boost::math::tools::toms748_solve(
      boundary, lo, hi, boost::math::tools::eps_tolerance<double>(50), it);
  return 0.5 * (r.first + r.second);
}

/// Lambda(c) from the direct formula in terms of D(c) and e^{DT}.
inline double lambda_c(double kappa, double sigma, double eta, double T, double c) {
  const double D = std::sqrt(kappa * kappa - 2.0 * sigma * sigma * c);
  if (D < 1e-7) {
    // D -> 0 limit of the same expression.
    return 2.0 * eta * c * T / (2.0 + kappa * T);
  }
  const double e = std::exp(D * T);
  return 2.0 * eta * c * (e - 1.0) / (D - kappa + (D + kappa) * e);
}

}  // namespace oracle
