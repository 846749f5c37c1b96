#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hhvix/error.hpp"
#include "hhvix/jumps.hpp"
#include "hhvix/params.hpp"

namespace hhvix {

/// Everything the generalized Riccati system needs under a fixed measure.
struct RiccatiModel {
  MeasureShift shift;
  double sigma = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double lambda0 = 0.0;
  double horizon = 0.0;  // model horizon; the domain bounds are taken here
  double L_J = 0.0;
  JumpLaw jump = JumpLaw::exponential(1.0);

  static RiccatiModel from(const ModelParams& p, const MeasureShift& shift, const JumpLaw& jump) {
    RiccatiModel m;
    m.shift = shift;
    m.sigma = p.sigma;
    m.alpha = p.alpha;
    m.beta = p.beta;
    m.eta = p.eta;
    m.lambda0 = p.lambda0;
    m.horizon = p.T;
    m.L_J = compute_L_J(p, jump);
    m.jump = jump;
    return m;
  }

  /// 2 kappa_a / (sigma^2 (2 e^{kappa_a T} - 1)).
  [[nodiscard]] double phi_riccati_bound() const {
    const double k = shift.kappa_a;
    return 2.0 * k / (sigma * sigma * (2.0 * std::exp(k * horizon) - 1.0));
  }
  [[nodiscard]] double phi_bound() const { return std::min(phi_riccati_bound(), L_J); }
  [[nodiscard]] double psi_bound() const { return (beta - alpha) / (alpha * beta); }

  /// E[exp(eta z J)]; identically 1 when eta == 0.
  [[nodiscard]] cplx jump_mgf(cplx z) const { return eta == 0.0 ? cplx(1.0) : jump.mgf(eta * z); }
  /// d/dz E[exp(eta z J)].
  [[nodiscard]] cplx jump_mgf_derivative(cplx z) const {
    return eta == 0.0 ? cplx(0.0) : eta * jump.mgf_derivative(eta * z);
  }
};

struct TransformArgs {
  cplx phi;
  cplx psi;
  std::vector<double> t_eval;
};

struct DomainVerdict {
  bool pass = false;
  std::string binding;  // which constraint is closest to failing (or failed)
  double slack = 0.0;   // distance to the binding constraint; negative on failure
  std::string message;
};

/// Checks 0 < Re(phi) < min{riccati bound, L_J} and Re(psi) < (beta-alpha)/(alpha beta).
inline DomainVerdict domain_check(const RiccatiModel& m, cplx phi, cplx psi) {
  DomainVerdict v;
  const double re_phi = phi.real();
  const double re_psi = psi.real();
  if (!(re_phi > 0.0)) {
    v.binding = "Re(phi) > 0";
    v.slack = re_phi;
    v.message = "Re(phi) must be strictly positive";
    return v;
  }
  const double rb = m.phi_riccati_bound();
  struct Candidate {
    const char* name;
    double slack;
  };
  const std::array<Candidate, 4> cs{{
      {"Re(phi) > 0", re_phi},
      {"Re(phi) < 2 kappa_a / (sigma^2 (2 e^{kappa_a T} - 1))", rb - re_phi},
      {"Re(phi) < L_J", m.L_J - re_phi},
      {"Re(psi) < (beta - alpha) / (alpha beta)", m.psi_bound() - re_psi},
  }};
  const auto* worst = &cs[0];
  for (const auto& c : cs) {
    if (c.slack < worst->slack) worst = &c;
  }
  v.binding = worst->name;
  v.slack = worst->slack;
  v.pass = worst->slack > 0.0;
  v.message = v.pass ? "ok" : std::string("violated: ") + worst->name;
  return v;
}

namespace detail {

/// log(1 + z) accurate for small |z|.
inline cplx log1p(cplx z) {
  if (std::abs(z) < 0.5) {
    const cplx u = z / (2.0 + z);
    const cplx u2 = u * u;
    cplx term = u;
    cplx sum = u;
    for (int n = 1; n < 60; ++n) {
      term *= u2;
      const cplx add = term / static_cast<double>(2 * n + 1);
      sum += add;
      if (std::abs(add) <= 1e-17 * std::abs(sum)) break;
    }
    return 2.0 * sum;
  }
  return std::log(1.0 + z);
}

/// x(tau) = (1 - e^{-kappa tau}) sigma^2 phi / (2 kappa); G = phi e^{-kappa tau} / (1 - x).
inline cplx riccati_x(double kappa, double sigma, cplx phi, double tau) {
  return -std::expm1(-kappa * tau) * (sigma * sigma / (2.0 * kappa)) * phi;
}

}  // namespace detail

/// Closed-form G(t; phi) with terminal G(T) = phi, written in the
/// time-to-maturity variable tau = T - t.
inline cplx solve_G_tau(double kappa_a, double sigma, cplx phi, double tau) {
  const cplx one_minus_x = 1.0 - detail::riccati_x(kappa_a, sigma, phi, tau);
  if (std::abs(one_minus_x) < 1e-30) {
    throw Error(ErrorCode::DegenerateDenominator, "G denominator vanished; domain check bypassed?");
  }
  return phi * std::exp(-kappa_a * tau) / one_minus_x;
}

/// G(t; phi) = 2 kappa_a / (sigma^2 + e^{kappa_a (T-t)} (2 kappa_a / phi - sigma^2)).
inline cplx solve_G(const MeasureShift& shift, double sigma, double T, cplx phi, double t) {
  if (t < 0.0 || t > T) throw Error(ErrorCode::OutOfGrid, "t outside [0, T] in solve_G");
  return solve_G_tau(shift.kappa_a, sigma, phi, T - t);
}

/// kappa_a vbar_a * int_t^T G(s) ds in closed form (tau = T - t).
inline cplx integrate_G_tau(const MeasureShift& shift, double sigma, cplx phi, double tau) {
  const cplx x = detail::riccati_x(shift.kappa_a, sigma, phi, tau);
  return shift.kappa_a * shift.vbar_a * (2.0 / (sigma * sigma)) * (-detail::log1p(-x));
}

struct SolverOptions {
  double tol = 1e-10;     // absolute and relative tolerance of the H integrator
  int n_grid = 512;       // uniform dense-output points on [0, T]
  long max_steps = 2'000'000;
};

/// Backward-in-time solution of (G, H, F) on [0, T]. Knots are every
/// accepted integrator step plus the uniform and requested grid points;
/// values and t-derivatives are stored at each knot.
struct OdeSolution {
  cplx phi;
  cplx psi;
  double T = 0.0;  // terminal time of the transform
  std::vector<double> grid;  // increasing, grid.front() == 0, grid.back() == T
  std::vector<cplx> G_vals, H_vals, F_vals;
  std::vector<cplx> dG, dH, dF;
  std::vector<cplx> d2G, d2H, d2F;
  double tol_abs = 0.0;
  double tol_rel = 0.0;
  long steps_accepted = 0;
  long steps_rejected = 0;

  [[nodiscard]] std::size_t size() const { return grid.size(); }

  struct State {
    cplx G, H, F;
  };

  /// Quintic Hermite interpolation from values and first and second
  /// t-derivatives at the knots.
  [[nodiscard]] State at(double t) const {
    if (!(t >= grid.front() && t <= grid.back())) {
      throw Error(ErrorCode::OutOfGrid, "t = " + std::to_string(t) + " outside solved grid [0, " +
                                            std::to_string(grid.back()) + "]");
    }
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    std::size_t i = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
    if (i + 1 >= grid.size()) i = grid.size() - 2;
    const double t0 = grid[i];
    const double h = grid[i + 1] - t0;
    const double s = (t - t0) / h;
    if (s == 0.0) return {G_vals[i], H_vals[i], F_vals[i]};
    if (s == 1.0) return {G_vals[i + 1], H_vals[i + 1], F_vals[i + 1]};
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double s4 = s3 * s;
    const double s5 = s4 * s;
    const double w0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    const double w1 = (s - 6 * s3 + 8 * s4 - 3 * s5) * h;
    const double w2 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5) * h * h;
    const double w3 = 10 * s3 - 15 * s4 + 6 * s5;
    const double w4 = (-4 * s3 + 7 * s4 - 3 * s5) * h;
    const double w5 = 0.5 * (s3 - 2 * s4 + s5) * h * h;
    auto herm = [&](const std::vector<cplx>& y, const std::vector<cplx>& dy, const std::vector<cplx>& d2y) {
      return w0 * y[i] + w1 * dy[i] + w2 * d2y[i] + w3 * y[i + 1] + w4 * dy[i + 1] + w5 * d2y[i + 1];
    };
    return {herm(G_vals, dG, d2G), herm(H_vals, dH, d2H), herm(F_vals, dF, d2F)};
  }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DP45 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  // b - bhat (error weights).
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/// Integrates H backward from H(T) = psi with adaptive Dormand-Prince in
/// tau = T - t; G comes from its closed form. F is left empty (see solve_F).
/// `T` is the terminal time of the transform and may be below the model
/// horizon.
inline OdeSolution solve_H(const RiccatiModel& m, cplx phi, cplx psi, double T,
                           std::span<const double> extra_times = {}, const SolverOptions& opt = {}) {
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "terminal time must be > 0");
  const double kappa = m.shift.kappa_a;
  const double sigma = m.sigma;

  // Checkpoints in tau, ascending, starting at 0 and ending at T.
  std::vector<double> marks;
  marks.reserve(static_cast<std::size_t>(opt.n_grid) + extra_times.size() + 2);
  for (int i = 0; i <= opt.n_grid; ++i) marks.push_back(T * i / opt.n_grid);
  for (double t : extra_times) {
    if (t < 0.0 || t > T) throw Error(ErrorCode::OutOfGrid, "requested time outside [0, T]");
    marks.push_back(T - t);
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  marks.front() = 0.0;
  marks.back() = T;

  auto g_at = [&](double tau) { return solve_G_tau(kappa, sigma, phi, tau); };
  // dh/dtau = -beta h + e^{alpha h} M_J(eta g) - 1
  auto rhs = [&](double tau, cplx h) { return -m.beta * h + std::exp(m.alpha * h) * m.jump_mgf(g_at(tau)) - 1.0; };

  const double U = m.eta == 0.0 ? 1.0 : m.jump.mgf(m.eta * phi.real());
  const double guard = std::log(m.beta / (m.alpha * U)) / m.alpha + 10.0;

  std::vector<double> taus{0.0};
  std::vector<cplx> hs{psi};
  std::vector<cplx> dhs{rhs(0.0, psi)};

  const double atol = opt.tol, rtol = opt.tol;
  const double min_step = 1e-14 * T;
  double tau = 0.0;
  cplx h = psi;
  cplx k1 = dhs.front();
  double step = std::min(T / opt.n_grid, 1e-3 * T);
  std::size_t next_mark = 1;
  long accepted = 0, rejected = 0;
  using D = detail::DP45;

  while (next_mark < marks.size()) {
    if (accepted + rejected > opt.max_steps) {
      throw Error(ErrorCode::StepSizeUnderflow, "Riccati integrator exceeded the step budget");
    }
    const double target = marks[next_mark];
    bool hits = false;
    double dt = step;
    if (tau + dt >= target - 1e-15 * T) {
      dt = target - tau;
      hits = true;
    }
    const cplx k2 = rhs(tau + D::c2 * dt, h + dt * (D::a21 * k1));
    const cplx k3 = rhs(tau + D::c3 * dt, h + dt * (D::a31 * k1 + D::a32 * k2));
    const cplx k4 = rhs(tau + D::c4 * dt, h + dt * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3));
    const cplx k5 = rhs(tau + D::c5 * dt, h + dt * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4));
    const double tau6 = hits ? target : tau + dt;
    const cplx k6 =
        rhs(tau6, h + dt * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 + D::a65 * k5));
    const cplx h_new = h + dt * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
    const cplx k7 = rhs(tau6, h_new);
    const cplx err = dt * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 + D::e7 * k7);
    const double scale = atol + rtol * std::max(std::abs(h), std::abs(h_new));
    const double err_norm = std::abs(err) / scale;

    if (!std::isfinite(err_norm)) {
      step = 0.25 * dt;
      ++rejected;
      if (step < min_step) throw Error(ErrorCode::StepSizeUnderflow, "non-finite Riccati step");
      continue;
    }
    if (err_norm <= 1.0) {
      tau = tau6;
      h = h_new;
      k1 = k7;
      ++accepted;
      if (h.real() >= guard) {
        throw Error(ErrorCode::ExplosionGuard, "Re(H) = " + std::to_string(h.real()) +
                                                   " passed the explosion guard " + std::to_string(guard) +
                                                   " at t = " + std::to_string(T - tau));
      }
      taus.push_back(tau);
      hs.push_back(h);
      dhs.push_back(k7);
      if (hits) ++next_mark;
    } else {
      ++rejected;
    }
    const double fac = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
    // A clipped step says nothing about the natural step size when it succeeds.
    if (!(hits && err_norm <= 1.0)) step = dt * fac;
    if (step < min_step) {
      throw Error(ErrorCode::StepSizeUnderflow,
                  "Riccati step size underflow at t = " + std::to_string(T - tau));
    }
    step = std::min(step, T);
  }
  taus.back() = T;

  // Assemble in physical time, t ascending (tau descending).
  const std::size_t n = taus.size();
  OdeSolution sol;
  sol.phi = phi;
  sol.psi = psi;
  sol.T = T;
  sol.tol_abs = atol;
  sol.tol_rel = rtol;
  sol.steps_accepted = accepted;
  sol.steps_rejected = rejected;
  sol.grid.resize(n);
  sol.G_vals.resize(n);
  sol.H_vals.resize(n);
  sol.dG.resize(n);
  sol.dH.resize(n);
  sol.d2G.resize(n);
  sol.d2H.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = n - 1 - j;
    const cplx g = j == 0 ? phi : g_at(taus[j]);
    sol.grid[i] = T - taus[j];
    sol.G_vals[i] = g;
    sol.H_vals[i] = hs[j];
    // dG/dt = kappa G - sigma^2 G^2 / 2, dH/dt = -dh/dtau.
    const cplx dg = kappa * g - 0.5 * sigma * sigma * g * g;
    const cplx dh = -dhs[j];
    sol.dG[i] = dg;
    sol.dH[i] = dh;
    sol.d2G[i] = (kappa - sigma * sigma * g) * dg;
    const cplx e = std::exp(m.alpha * hs[j]);
    sol.d2H[i] = m.beta * dh - e * (m.alpha * dh * m.jump_mgf(g) + m.jump_mgf_derivative(g) * dg);
  }
  sol.grid.front() = 0.0;
  // Knots reconstructed as T - tau can miss a requested time by an ulp.
  for (double t : extra_times) {
    auto it = std::lower_bound(sol.grid.begin(), sol.grid.end(), t);
    if (it != sol.grid.end() && *it - t <= 1e-12 * T) *it = t;
    else if (it != sol.grid.begin() && t - *(it - 1) <= 1e-12 * T) *(it - 1) = t;
  }
  return sol;
}

/// F(t) = int_t^T [kappa_a vbar_a G + beta lambda0 H] ds on the knots of `sol`:
/// the G part in closed form, the H part by end-corrected trapezoid sums of
/// the stored H values and first two derivatives. F(T) = 0 exactly.
inline void solve_F(const RiccatiModel& m, OdeSolution& sol) {
  const std::size_t n = sol.grid.size();
  const double kv = m.shift.kappa_a * m.shift.vbar_a;
  const double bl = m.beta * m.lambda0;
  sol.F_vals.assign(n, cplx(0.0));
  sol.dF.resize(n);
  sol.d2F.resize(n);
  cplx h_int = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 < n) {
      const double d = sol.grid[i + 1] - sol.grid[i];
      h_int += 0.5 * d * (sol.H_vals[i] + sol.H_vals[i + 1]) + d * d / 10.0 * (sol.dH[i] - sol.dH[i + 1]) +
               d * d * d / 120.0 * (sol.d2H[i] + sol.d2H[i + 1]);
      sol.F_vals[i] = integrate_G_tau(m.shift, m.sigma, sol.phi, sol.T - sol.grid[i]) + bl * h_int;
    }
    sol.dF[i] = -(kv * sol.G_vals[i] + bl * sol.H_vals[i]);
    sol.d2F[i] = -(kv * sol.dG[i] + bl * sol.dH[i]);
  }
}

/// Full (G, H, F) solution.
inline OdeSolution solve_riccati(const RiccatiModel& m, cplx phi, cplx psi, double T,
                                 std::span<const double> extra_times = {}, const SolverOptions& opt = {}) {
  OdeSolution sol = solve_H(m, phi, psi, T, extra_times, opt);
  solve_F(m, sol);
  return sol;
}

}  // namespace hhvix
