#pragma once

#include <cmath>
#include <string>

#include "hhvix/error.hpp"
#include "hhvix/params.hpp"

namespace hhvix {

/// A_k(h) = (1/h) int_0^h e^{-k u} du = (1 - e^{-kh}) / (kh).
inline double a_k(double k, double h) {
  const double x = k * h;
  if (x < 1e-4) return 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
  return -std::expm1(-x) / x;
}

/// Constants shared by the forward variance, the variance swap and VIX^2.
struct VarianceConstants {
  double kappa_a = 0.0;
  double vbar_a = 0.0;
  double gap = 0.0;  // beta - alpha
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;

  static VarianceConstants from(const MeasureShift& shift, const ModelParams& p, double jump_mean) {
    VarianceConstants c;
    c.kappa_a = shift.kappa_a;
    c.vbar_a = shift.vbar_a;
    c.gap = p.beta - p.alpha;
    const double denom = c.kappa_a - c.gap;
    if (std::abs(denom) <= MeasureShift::kSingularTol * std::max(1.0, c.gap)) {
      throw Error(ErrorCode::SingularShift, "kappa_a == beta - alpha");
    }
    const double ej = p.eta * jump_mean;
    c.C1 = ej / denom;
    c.C2 = ej * p.beta * p.lambda0 / denom;
    c.C3 = ej * p.beta * p.lambda0 / (c.kappa_a * c.gap) + c.vbar_a;
    return c;
  }
};

namespace detail {

inline void require_ordered(double s, double t, bool strict) {
  if (!(s >= 0.0) || (strict ? !(s < t) : !(s <= t))) {
    throw Error(ErrorCode::InvalidArgument,
                "need 0 <= s " + std::string(strict ? "<" : "<=") + " t, got s = " + std::to_string(s) +
                    ", t = " + std::to_string(t));
  }
}

}  // namespace detail

/// xi_s(t) = E[v_t | F_s] = D1(h) v_s + D2(h) lambda_s + D3(h), h = t - s.
inline double forward_variance(const MeasureShift& shift, const ModelParams& p, double jump_mean, double s,
                               double t, double v_s, double lambda_s) {
  detail::require_ordered(s, t, false);
  const auto c = VarianceConstants::from(shift, p, jump_mean);
  const double h = t - s;
  const double ek = std::exp(-c.kappa_a * h);
  const double eg = std::exp(-c.gap * h);
  const double D1 = ek;
  const double D2 = c.C1 * (eg - ek);
  const double D3 = (c.C2 / c.kappa_a - c.vbar_a) * ek - c.C2 / c.gap * eg + c.C3;
  return D1 * v_s + D2 * lambda_s + D3;
}

struct SwapLoadings {
  double K1 = 0.0;
  double K2 = 0.0;
  double K3 = 0.0;
};

inline SwapLoadings swap_loadings(const VarianceConstants& c, double h) {
  const double ak = a_k(c.kappa_a, h);
  const double ag = a_k(c.gap, h);
  return {ak, c.C1 * (ag - ak), (c.C2 / c.kappa_a - c.vbar_a) * ak - c.C2 / c.gap * ag + c.C3};
}

/// V_s(t) = (1/(t-s)) int_s^t xi_s(u) du = K1 v_s + K2 lambda_s + K3.
inline double variance_swap(const MeasureShift& shift, const ModelParams& p, double jump_mean, double s, double t,
                            double v_s, double lambda_s) {
  detail::require_ordered(s, t, true);
  const auto k = swap_loadings(VarianceConstants::from(shift, p, jump_mean), t - s);
  return k.K1 * v_s + k.K2 * lambda_s + k.K3;
}

/// VIX^2 / 100^2 = A v + B lambda + C, in variance units.
struct VixCoefficients {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  double delta = 0.0;
};

inline VixCoefficients vix_coefficients(const MeasureShift& shift, const ModelParams& p, double jump_mean) {
  const auto c = VarianceConstants::from(shift, p, jump_mean);
  const auto k = swap_loadings(c, p.delta);
  VixCoefficients out{k.K1, k.K2, k.K3, c.C1, c.C2, c.C3, p.delta};
  if (!(out.A > 0.0)) throw Error(ErrorCode::InvalidArgument, "VIX loading A must be > 0");
  // B vanishes only in the jump-free limit.
  if (p.eta * jump_mean > 0.0 && !(out.B > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "VIX loading B must be > 0 with jumps present");
  }
  return out;
}

/// 100 sqrt(A v + B lambda + C); radicands in [-1e-12, 0) are clamped to 0.
inline double vix_value(const VixCoefficients& c, double v, double lambda) {
  const double rad = c.A * v + c.B * lambda + c.C;
  if (rad < -1e-12) {
    throw Error(ErrorCode::NegativeVixSquared, "VIX^2 radicand " + std::to_string(rad) + " < 0");
  }
  return 100.0 * std::sqrt(std::max(rad, 0.0));
}

}  // namespace hhvix
