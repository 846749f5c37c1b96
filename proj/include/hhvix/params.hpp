#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hhvix/error.hpp"
#include "hhvix/jumps.hpp"

namespace hhvix {

/// Heston-Hawkes model parameters. Rates are per year, times in years.
struct ModelParams {
  double mu = 0.02;       // physical drift (constant)
  double r = 0.02;        // risk-free rate
  double rho = -0.7;      // spot-vol correlation
  double v0 = 0.04;       // initial variance
  double kappa = 3.0;     // variance mean reversion
  double vbar = 0.04;     // long-term variance
  double sigma = 0.3;     // vol of vol
  double eta = 0.01;      // jump scaling
  double lambda0 = 1.0;   // baseline Hawkes intensity
  double alpha = 1.0;     // self-excitation
  double beta = 2.0;      // intensity mean reversion
  double T = 1.0;         // horizon
  double delta = 30.0 / 365.0;  // VIX window
};

/// Free constants of the martingale-measure subset: Q2 in (1, bound), and
/// the moment slacks eps1, eps2.
struct AssumptionConfig {
  double Q2 = 2.0;
  double eps1 = 1.0;
  double eps2 = 1.0;

  [[nodiscard]] double Q1() const { return Q2 / (Q2 - 1.0); }
  [[nodiscard]] double s() const { return 2.0 + eps1; }
};

struct Violation {
  std::string condition;
  std::string detail;
};

/// Risk-neutral parameters under the measure indexed by `a`.
struct MeasureShift {
  double a = 0.0;
  double kappa_a = 0.0;
  double vbar_a = 0.0;

  /// Relative tolerance for the excluded case kappa_a == beta - alpha.
  static constexpr double kSingularTol = 1e-10;

  /// Builds the shifted parameters without checking |a| against a_max.
  static MeasureShift from(const ModelParams& p, double a) {
    MeasureShift m;
    m.a = a;
    m.kappa_a = p.kappa + a * p.sigma;
    if (!(m.kappa_a > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "shifted mean reversion kappa + a*sigma = " + std::to_string(m.kappa_a) + " must be > 0");
    }
    m.vbar_a = p.kappa * p.vbar / m.kappa_a;
    const double gap = p.beta - p.alpha;
    if (std::abs(m.kappa_a - gap) <= kSingularTol * std::max(1.0, gap)) {
      throw Error(ErrorCode::SingularShift,
                  "kappa_a = " + std::to_string(m.kappa_a) + " coincides with beta - alpha");
    }
    return m;
  }
};

struct ConditionFlag {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct AdmissibilityReport {
  double c_l = std::numeric_limits<double>::quiet_NaN();
  double L_J = std::numeric_limits<double>::quiet_NaN();
  double a_max = std::numeric_limits<double>::quiet_NaN();
  double Q1 = std::numeric_limits<double>::quiet_NaN();
  double Q2 = std::numeric_limits<double>::quiet_NaN();
  double eps1 = std::numeric_limits<double>::quiet_NaN();
  double eps2 = std::numeric_limits<double>::quiet_NaN();
  /// Upper bound allowed for Q2 (infinite when mu == r).
  double Q2_bound = std::numeric_limits<double>::quiet_NaN();
  std::vector<ConditionFlag> flags;

  [[nodiscard]] bool admissible() const {
    return !flags.empty() && std::all_of(flags.begin(), flags.end(), [](const auto& f) { return f.passed; });
  }
};

// ---------------------------------------------------------------------------
// Base invariants

inline std::vector<Violation> validate_base(const ModelParams& p) {
  std::vector<Violation> out;
  auto positive = [&out](const char* name, double x) {
    if (!(x > 0.0)) out.push_back({std::string(name) + " > 0", std::string(name) + " = " + std::to_string(x)});
  };
  positive("v0", p.v0);
  positive("kappa", p.kappa);
  positive("vbar", p.vbar);
  positive("sigma", p.sigma);
  positive("eta", p.eta);
  positive("lambda0", p.lambda0);
  positive("T", p.T);
  positive("delta", p.delta);
  if (!(p.alpha > 0.0)) out.push_back({"alpha > 0", "alpha = " + std::to_string(p.alpha)});
  if (!(p.alpha < p.beta)) {
    out.push_back({"stability alpha < beta",
                   "alpha = " + std::to_string(p.alpha) + ", beta = " + std::to_string(p.beta)});
  }
  if (!(2.0 * p.kappa * p.vbar >= p.sigma * p.sigma)) {
    out.push_back({"Feller 2*kappa*vbar >= sigma^2", "2*kappa*vbar = " + std::to_string(2.0 * p.kappa * p.vbar) +
                                                         ", sigma^2 = " + std::to_string(p.sigma * p.sigma)});
  }
  if (!(p.rho * p.rho < 1.0)) out.push_back({"rho^2 < 1", "rho = " + std::to_string(p.rho)});
  return out;
}

// ---------------------------------------------------------------------------
// Exponential-moment constant c_l

/// Upper end of the c range, kappa^2 / (2 sigma^2).
inline double c_upper(const ModelParams& p) { return p.kappa * p.kappa / (2.0 * p.sigma * p.sigma); }

/// Lambda(c) = 2 eta c (e^{DT}-1) / (D - kappa + (D + kappa) e^{DT}),
/// D = sqrt(kappa^2 - 2 sigma^2 c). Written with E = (e^{DT}-1)/D so the
/// D -> 0 endpoint is exact.
inline double exponent_bound(const ModelParams& p, double c) {
  const double disc = std::max(0.0, p.kappa * p.kappa - 2.0 * p.sigma * p.sigma * c);
  const double D = std::sqrt(disc);
  const double E = D > 0.0 ? std::expm1(D * p.T) / D : p.T;
  return 2.0 * p.eta * c * E / (2.0 + (D + p.kappa) * E);
}

/// (beta/alpha) exp(alpha/beta - 1), the Hawkes-stability ceiling on M_J.
inline double hawkes_mgf_ceiling(const ModelParams& p) {
  return p.beta / p.alpha * std::exp(p.alpha / p.beta - 1.0);
}

/// Both conditions in the definition of c_l at a single c.
inline bool c_feasible(const ModelParams& p, const JumpLaw& jump, double c) {
  const double lam = exponent_bound(p, c);
  if (!(lam < jump.eps_J())) return false;
  return jump.mgf(lam) <= hawkes_mgf_ceiling(p);
}

namespace detail {

inline double bisect_feasible(const ModelParams& p, const JumpLaw& jump, double lo, double hi) {
  // lo feasible (or the 0+ limit), hi infeasible.
  constexpr double kTol = 1e-12;
  while (hi - lo > kTol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (c_feasible(p, jump, mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace detail

/// c_l = sup{c <= kappa^2/(2 sigma^2) : Lambda(c) < eps_J, M_J(Lambda(c)) <= ceiling}.
/// Bisection assumes the feasible set is a down-set; a 64-point scan checks
/// that first and a refined scan takes over if it is not.
inline double compute_c_l(const ModelParams& p, const JumpLaw& jump) {
  const double cmax = c_upper(p);
  // Lambda(0+) = 0 and M_J(0) = 1 < ceiling, so tiny c must be feasible.
  const double c_tiny = cmax * 1e-14;
  if (!c_feasible(p, jump, c_tiny)) {
    throw Error(ErrorCode::NoAdmissibleC, "c -> 0+ violates the c_l conditions; jump law is inconsistent");
  }
  // A feasible endpoint is the sup regardless of any interior holes.
  if (c_feasible(p, jump, cmax)) return cmax;

  constexpr int kScan = 64;
  std::array<bool, kScan + 1> ok{};
  ok[0] = true;
  for (int i = 1; i <= kScan; ++i) ok[i] = c_feasible(p, jump, cmax * i / kScan);
  int first_bad = 1;
  while (first_bad <= kScan && ok[first_bad]) ++first_bad;
  bool monotone = true;
  for (int i = first_bad; i <= kScan; ++i) monotone = monotone && !ok[i];

  if (monotone) {
    return detail::bisect_feasible(p, jump, cmax * (first_bad - 1) / kScan, cmax * first_bad / kScan);
  }

  // Non-monotone: locate the right-most feasible point on a finer grid and
  // bisect between it and its infeasible neighbour.
  constexpr int kFine = 1 << 16;
  int last_ok = 0;
  for (int i = 1; i < kFine; ++i) {
    if (c_feasible(p, jump, cmax * i / kFine)) last_ok = i;
  }
  return detail::bisect_feasible(p, jump, cmax * last_ok / kFine, cmax * (last_ok + 1) / kFine);
}

/// L_J = (1/eta) M_J^{-1}((beta/alpha) exp(alpha/beta - 1)); +inf when eta == 0.
inline double compute_L_J(const ModelParams& p, const JumpLaw& jump) {
  if (p.eta == 0.0) return std::numeric_limits<double>::infinity();
  return jump.mgf_inverse(hawkes_mgf_ceiling(p)) / p.eta;
}

// ---------------------------------------------------------------------------
// Measure shift bounds

/// Largest admissible |a|: minimum of the martingale-measure bounds and the
/// (q, s) subset bounds.
inline double max_shift(const ModelParams& p, double c_l, double Q1, double s) {
  const double rho2 = p.rho * p.rho;
  if (!(rho2 < c_l)) {
    throw Error(ErrorCode::AssumptionViolated,
                "rho^2 = " + std::to_string(rho2) + " must be below c_l = " + std::to_string(c_l));
  }
  const double qs = Q1 * s;
  const double b1 = std::sqrt(2.0 * c_l) / 2.0;
  const double b2 = std::sqrt(c_l - rho2);
  const double b3 = std::sqrt(c_l / 2.0) / qs;
  const double b4 = std::sqrt((1.0 - rho2) * c_l / (qs * (2.0 * qs * (1.0 - rho2) + rho2 * s - 1.0)));
  return std::min({b1, b2, b3, b4});
}

/// Bound that Q2 must stay below; +inf when mu == r (D = 0).
inline double q2_upper_bound(const ModelParams& p, double eps1) {
  const double D = (p.mu - p.r) * (p.mu - p.r);
  if (D == 0.0) return std::numeric_limits<double>::infinity();
  const double s = 2.0 + eps1;
  const double feller_gap = (2.0 * p.kappa * p.vbar - p.sigma * p.sigma) / (2.0 * p.sigma);
  return (1.0 - p.rho * p.rho) / (D * (s * s - s)) * feller_gap * feller_gap;
}

/// Runs every admissibility computation and records per-condition verdicts.
inline AdmissibilityReport assess(const ModelParams& p, const JumpLaw& jump, const AssumptionConfig& cfg = {}) {
  AdmissibilityReport rep;
  rep.Q2 = cfg.Q2;
  rep.Q1 = cfg.Q1();
  rep.eps1 = cfg.eps1;
  rep.eps2 = cfg.eps2;

  const auto base = validate_base(p);
  rep.flags.push_back({"base invariants", base.empty(), base.empty() ? "" : base.front().condition});
  for (const auto& v : base) rep.flags.push_back({v.condition, false, v.detail});
  if (!base.empty()) return rep;

  rep.c_l = compute_c_l(p, jump);
  rep.L_J = compute_L_J(p, jump);
  rep.flags.push_back({"c_l > 0", rep.c_l > 0.0, "c_l = " + std::to_string(rep.c_l)});
  rep.flags.push_back({"L_J > 0", rep.L_J > 0.0, "L_J = " + std::to_string(rep.L_J)});

  const double rho2 = p.rho * p.rho;
  rep.flags.push_back({"rho^2 < c_l", rho2 < rep.c_l, "rho^2 = " + std::to_string(rho2)});

  rep.Q2_bound = q2_upper_bound(p, cfg.eps1);
  rep.flags.push_back({"drift bound > 1", rep.Q2_bound > 1.0, "bound = " + std::to_string(rep.Q2_bound)});
  rep.flags.push_back({"1 < Q2 < bound", cfg.Q2 > 1.0 && cfg.Q2 < rep.Q2_bound,
                       "Q2 = " + std::to_string(cfg.Q2)});
  rep.flags.push_back({"eps1 > 0, eps2 > 0", cfg.eps1 > 0.0 && cfg.eps2 > 0.0, ""});
  const double lhs = 2.0 * p.kappa * p.vbar;
  const double rhs = (1.0 + cfg.eps2) * p.sigma * p.sigma;
  rep.flags.push_back({"2*kappa*vbar > (1+eps2)*sigma^2", lhs > rhs,
                       std::to_string(lhs) + " vs " + std::to_string(rhs)});

  if (rho2 < rep.c_l && cfg.Q2 > 1.0 && cfg.eps1 > 0.0) {
    rep.a_max = max_shift(p, rep.c_l, rep.Q1, cfg.s());
  } else {
    rep.a_max = 0.0;
  }
  return rep;
}

/// Validated measure shift: |a| < a_max and kappa_a away from beta - alpha.
inline MeasureShift check_shift(const ModelParams& p, double a, const AdmissibilityReport& report) {
  if (!(std::abs(a) < report.a_max)) {
    throw Error(ErrorCode::ShiftOutOfRange,
                "|a| = " + std::to_string(std::abs(a)) + " must be below a_max = " + std::to_string(report.a_max));
  }
  return MeasureShift::from(p, a);
}

}  // namespace hhvix
