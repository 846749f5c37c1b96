#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "hhvix/charfn.hpp"
#include "hhvix/erfc.hpp"
#include "hhvix/params.hpp"
#include "hhvix/parallel.hpp"
#include "hhvix/vix.hpp"

namespace hhvix {

struct QuadratureConfig {
  double phi_R_fraction = 0.5;
  double tol = 1e-8;
  long max_nodes = 200'000;
};

struct PricingRequest {
  double t = 0.0;       // valuation time
  double T_mat = 0.5;   // option maturity, t <= T_mat <= horizon
  double K = 20.0;      // strike in VIX points
  double v_t = 0.04;
  double lambda_t = 1.0;
  QuadratureConfig quadrature;
  unsigned threads = 1;  // 0 = all cores
};

struct PricingResult {
  double price = 0.0;
  double phi_R = 0.0;
  long nodes_used = 0;
  double est_quad_error = 0.0;
  double discount = 1.0;
  double truncation = 0.0;  // upper end of the phi_I range actually integrated
};

/// Model, measure and VIX loadings needed by the pricer.
struct PricingContext {
  ModelParams params;
  MeasureShift shift;
  JumpLaw jump = JumpLaw::exponential(1.0);
  VixCoefficients coeffs;
  double L_J = 0.0;

  /// No admissibility checks beyond those of the shift itself; used for
  /// limiting cases such as eta = 0.
  static PricingContext from(const ModelParams& p, const MeasureShift& shift, const JumpLaw& jump) {
    PricingContext c;
    c.params = p;
    c.shift = shift;
    c.jump = jump;
    c.coeffs = vix_coefficients(shift, p, jump.mean());
    c.L_J = compute_L_J(p, jump);
    return c;
  }

  /// Full admissibility pipeline: base invariants, c_l, L_J, a_max and the
  /// validated shift.
  static PricingContext build(const ModelParams& p, const JumpLaw& jump, double a,
                              const AssumptionConfig& cfg = {}) {
    const auto report = assess(p, jump, cfg);
    if (!report.admissible()) {
      std::string failed;
      for (const auto& f : report.flags) {
        if (!f.passed) failed += (failed.empty() ? "" : "; ") + f.name;
      }
      throw Error(ErrorCode::AssumptionViolated, "inadmissible parameters: " + failed);
    }
    return from(p, check_shift(p, a, report), jump);
  }

  [[nodiscard]] RiccatiModel riccati() const { return RiccatiModel::from(params, shift, jump); }
};

/// phi_R = fraction * min{2 kappa_a / (sigma^2 A (2 e^{kappa_a T} - 1)), L_J / A,
/// (beta - alpha) / (B alpha beta)}; the last bound is dropped when B == 0.
inline double choose_phi_R(const VixCoefficients& coeffs, const MeasureShift& shift, const ModelParams& p,
                           double L_J, double fraction = 0.5) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "phi_R fraction must lie in (0, 1)");
  }
  const double k = shift.kappa_a;
  double bound = 2.0 * k / (p.sigma * p.sigma * coeffs.A * (2.0 * std::exp(k * p.T) - 1.0));
  bound = std::min(bound, L_J / coeffs.A);
  if (coeffs.B > 0.0) bound = std::min(bound, (p.beta - p.alpha) / (coeffs.B * p.alpha * p.beta));
  return fraction * bound;
}

/// phi -> erfc(k sqrt(phi)) phi^{-3/2} e^{phi C} f(t, v, lambda; A phi, B phi)
/// along the vertical line Re(phi) = phi_R.
class PricingIntegrand {
 public:
  PricingIntegrand(const PricingContext& ctx, const PricingRequest& req, double phi_R)
      : ctx_(ctx), req_(req), phi_R_(phi_R), k_(req.K / 100.0), model_(ctx.riccati()) {
    if (!(phi_R > 0.0)) throw Error(ErrorCode::InvalidArgument, "phi_R must be > 0");
  }

  /// The complex bracket whose real part is integrated.
  [[nodiscard]] cplx bracket(double phi_I) const {
    const cplx phi(phi_R_, phi_I);
    // Re(phi) > 0 keeps sqrt and the 3/2 power off the branch cut.
    const cplx log_phi = std::log(phi);
    const cplx sqrt_phi = std::exp(0.5 * log_phi);
    const auto& c = ctx_.coeffs;
    // Nodes never repeat, so each solution is used once and dropped.
    const auto sol = make_char_fn(model_, c.A * phi, c.B * phi, req_.T_mat, {req_.t});
    const cplx expo = phi * c.C - 1.5 * log_phi + char_fn_exponent(sol, req_.t, req_.v_t, req_.lambda_t);
    const cplx e = erfc_complex(k_ * sqrt_phi);
    if (e == 0.0) return 0.0;
    return e * std::exp(expo);
  }

  double operator()(double phi_I) const { return bracket(phi_I).real(); }

  [[nodiscard]] double phi_R() const { return phi_R_; }

 private:
  const PricingContext& ctx_;
  PricingRequest req_;
  double phi_R_;
  double k_;
  RiccatiModel model_;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule.
inline constexpr std::array<double, 8> kXgk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                            0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  double integral;  // Kronrod estimate
  double error;
  double l1;  // Kronrod estimate of int |f|
};

inline std::array<double, 15> gk_nodes(double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<double, 15> x{};
  for (int j = 0; j < 7; ++j) {
    x[2 * j] = c - h * kXgk[j];
    x[2 * j + 1] = c + h * kXgk[j];
  }
  x[14] = c;
  return x;
}

inline Segment gk_combine(double a, double b, const double* f) {
  const double h = 0.5 * (b - a);
  const double fc = f[14];
  double rk = kWgk[7] * fc;
  double rg = kWg[3] * fc;
  double l1 = kWgk[7] * std::abs(fc);
  for (int j = 0; j < 7; ++j) {
    const double s = f[2 * j] + f[2 * j + 1];
    rk += kWgk[j] * s;
    l1 += kWgk[j] * (std::abs(f[2 * j]) + std::abs(f[2 * j + 1]));
    if (j % 2 == 1) rg += kWg[j / 2] * s;
  }
  const double mean = 0.5 * rk;
  double asc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) asc += kWgk[j] * (std::abs(f[2 * j] - mean) + std::abs(f[2 * j + 1] - mean));
  double err = std::abs((rk - rg) * h);
  asc *= std::abs(h);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  return {a, b, rk * h, err, l1 * std::abs(h)};
}

}  // namespace detail

/// Semi-analytic VIX call price:
/// 100 e^{-r(T_mat - t)} / (2 sqrt(pi)) int_0^inf Re[bracket(phi_I)] dphi_I.
///
/// The half-line is covered by panels [0, 64], [64, 128], [128, 256], ...;
/// each panel is refined adaptively with Gauss-Kronrod 7/15 segments and the
/// doubling stops once a whole panel carries less than tol * |integral| in
/// absolute mass.
inline PricingResult price_call(const PricingRequest& req, const PricingContext& ctx) {
  const auto& p = ctx.params;
  if (!(req.t >= 0.0 && req.t <= req.T_mat && req.T_mat <= p.T * (1.0 + 1e-12))) {
    throw Error(ErrorCode::InvalidArgument, "need 0 <= t <= T_mat <= T");
  }
  if (!(req.K > 0.0)) throw Error(ErrorCode::InvalidArgument, "strike must be > 0");
  if (!(req.v_t > 0.0)) throw Error(ErrorCode::InvalidArgument, "v_t must be > 0");
  if (!(req.lambda_t >= p.lambda0)) throw Error(ErrorCode::InvalidArgument, "lambda_t must be >= lambda0");

  PricingResult res;
  res.discount = std::exp(-p.r * (req.T_mat - req.t));
  res.phi_R = choose_phi_R(ctx.coeffs, ctx.shift, p, ctx.L_J, req.quadrature.phi_R_fraction);

  if (req.T_mat == req.t) {
    // Payoff is known.
    res.price = res.discount * std::max(vix_value(ctx.coeffs, req.v_t, req.lambda_t) - req.K, 0.0);
    return res;
  }

  const PricingIntegrand f(ctx, req, res.phi_R);
  const double tol = req.quadrature.tol;
  constexpr double kAbsFloor = 1e-300;
  constexpr double kMaxPhi = 1048576.0;  // 2^20

  long nodes = 0;
  auto evaluate = [&](std::vector<detail::Segment>& out, const std::vector<std::pair<double, double>>& ivs) {
    std::vector<double> x(15 * ivs.size()), fx(x.size());
    for (std::size_t s = 0; s < ivs.size(); ++s) {
      const auto nd = detail::gk_nodes(ivs[s].first, ivs[s].second);
      std::copy(nd.begin(), nd.end(), x.begin() + static_cast<std::ptrdiff_t>(15 * s));
    }
    nodes += static_cast<long>(x.size());
    if (nodes > req.quadrature.max_nodes) {
      throw Error(ErrorCode::QuadratureNotConverged, "node budget of " +
                                                         std::to_string(req.quadrature.max_nodes) + " exceeded");
    }
    parallel_for(x.size(), req.threads, [&](std::size_t i) { fx[i] = f(x[i]); });
    for (std::size_t s = 0; s < ivs.size(); ++s) {
      out.push_back(detail::gk_combine(ivs[s].first, ivs[s].second, fx.data() + 15 * s));
    }
  };

  std::vector<double> panel_values;
  double acc = 0.0;
  double err_total = 0.0;
  // Noise floor: the integrand is only as accurate as the Riccati solve, so
  // under heavy cancellation the attainable error scales with its L1 mass.
  const double kNoise = 10.0 * SolverOptions{}.tol;
  double l1_done = 0.0;
  double a = 0.0, b = 64.0;
  for (;;) {
    std::vector<detail::Segment> segs;
    std::vector<std::pair<double, double>> init;
    constexpr int kInitial = 4;
    for (int i = 0; i < kInitial; ++i) init.emplace_back(a + (b - a) * i / kInitial, a + (b - a) * (i + 1) / kInitial);
    evaluate(segs, init);
    for (;;) {
      double I = 0.0, E = 0.0, L = 0.0;
      for (const auto& s : segs) {
        I += s.integral;
        E += s.error;
        L += s.l1;
      }
      if (E <= std::max(0.1 * tol * std::abs(acc + I), kNoise * (l1_done + L)) || E <= kAbsFloor) break;
      auto worst = std::max_element(segs.begin(), segs.end(),
                                    [](const auto& x, const auto& y) { return x.error < y.error; });
      const double lo = worst->a, hi = worst->b, mid = 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi) || hi - lo < 1e-9 * std::max(1.0, hi)) {
        throw Error(ErrorCode::QuadratureNotConverged, "segment [" + std::to_string(lo) + ", " +
                                                           std::to_string(hi) + "] cannot be refined further");
      }
      segs.erase(worst);
      evaluate(segs, {{lo, mid}, {mid, hi}});
    }
    std::sort(segs.begin(), segs.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    std::vector<double> vals;
    double l1 = 0.0;
    for (const auto& s : segs) {
      vals.push_back(s.integral);
      err_total += s.error;
      l1 += s.l1;
    }
    const double panel = pairwise_sum(vals);
    panel_values.push_back(panel);
    acc = pairwise_sum(panel_values);
    l1_done += l1;
    if (a > 0.0 && (l1 <= std::max(tol * std::abs(acc), kNoise * l1_done) || l1 <= kAbsFloor)) {
      err_total += l1;
      break;
    }
    a = b;
    b *= 2.0;
    if (b > kMaxPhi) {
      throw Error(ErrorCode::QuadratureNotConverged, "integrand tail still significant at phi_I = 2^20");
    }
  }

  const double scale = 100.0 * res.discount / (2.0 * std::sqrt(std::numbers::pi));
  res.price = std::max(0.0, scale * acc);
  res.est_quad_error = scale * err_total;
  res.nodes_used = nodes;
  res.truncation = b;
  return res;
}

}  // namespace hhvix
