#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "common.hpp"
#include "oracles.hpp"

using namespace hhvix;
using hhvix::testing::test_jump;
using hhvix::testing::test_params;

namespace {

using big = boost::multiprecision::cpp_bin_float_50;

// A_k(h) by the exponential series in 50-digit arithmetic.
big a_k_big(big k, big h) {
  const big x = k * h;
  return -boost::multiprecision::expm1(-x) / x;
}

struct BigCoeffs {
  big A, B, C;
};

// The K -> A_k chain in 50-digit arithmetic.
BigCoeffs coeffs_big(big ka, big gap, big ej, big lam0, big beta, big va, big d) {
  const big C1 = ej / (ka - gap);
  const big C2 = ej * beta * lam0 / (ka - gap);
  const big C3 = ej * beta * lam0 / (ka * gap) + va;
  const big a1 = a_k_big(ka, d), a2 = a_k_big(gap, d);
  return {a1, C1 * (a2 - a1), (C2 / ka - va) * a1 - C2 / gap * a2 + C3};
}

}  // namespace

TEST(Vix, AkSmallArgument) { EXPECT_NEAR(a_k(1e-10, 1.0), 1.0 - 5e-11, 1e-15); }

TEST(Vix, AkMatchesRiemannSum) {
  for (auto [k, h] : {std::pair{1.0, 1.0}, std::pair{12.166, 30.0 / 365.0}, std::pair{0.3, 2.0}}) {
    const long n = 1'000'000;
    double s = 0.0;
    for (long i = 0; i < n; ++i) s += std::exp(-k * h * (i + 0.5) / n);
    EXPECT_NEAR(a_k(k, h), s / n, 1e-10) << k << " " << h;
  }
  EXPECT_NEAR(a_k(1.0, 1.0), 0.63212055882855768, 1e-16);
  EXPECT_NEAR(a_k(12.166, 30.0 / 365.0), 0.63213503803501196, 1e-15);
}

TEST(Vix, AkSeriesSwitchIsContinuous) {
  const double below = a_k(1.0, 1e-4 * (1 - 1e-12));
  const double above = a_k(1.0, 1e-4 * (1 + 1e-12));
  EXPECT_NEAR(below, above, 1e-15);
}

TEST(Vix, AkPositivityLemma) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 20.0), uh(0.001, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double k1 = u(rng), k2 = u(rng), h = uh(rng);
    if (k1 == k2) continue;
    EXPECT_GT((a_k(k2, h) - a_k(k1, h)) / (k1 - k2), 0.0);
  }
}

TEST(Vix, ForwardVarianceInitialCondition) {
  const auto p = test_params();
  const auto s = MeasureShift::from(p, 0.0);
  for (double v : {0.01, 0.04, 0.3}) {
    EXPECT_NEAR(forward_variance(s, p, 0.05, 0.3, 0.3, v, 1.7), v, 1e-12 * (1 + v));
  }
}

TEST(Vix, ConstantIdentity) {
  const auto p = test_params();
  for (double a : {-0.5, 0.0, 0.3}) {
    const auto c = VarianceConstants::from(MeasureShift::from(p, a), p, 0.05);
    EXPECT_NEAR(c.C2 / c.kappa_a - c.C2 / c.gap + c.C3 - c.vbar_a, 0.0, 1e-15);
  }
}

TEST(Vix, ForwardVarianceHestonLimit) {
  auto p = test_params();
  p.eta = 0.0;
  const auto s = MeasureShift::from(p, 0.0);
  for (double h : {0.1, 0.5, 1.0}) {
    const double want = std::exp(-s.kappa_a * h) * 0.07 + s.vbar_a * (1 - std::exp(-s.kappa_a * h));
    EXPECT_NEAR(forward_variance(s, p, 0.05, 0.0, h, 0.07, 1.0), want, 1e-15);
  }
}

TEST(Vix, ForwardVarianceOde) {
  const auto p = test_params();
  const auto s = MeasureShift::from(p, 0.1);
  const double ej = 0.05, lam_s = 1.6, v_s = 0.06, s0 = 0.2;
  const double gap = p.beta - p.alpha;
  const double d = 1e-5;
  for (int i = 1; i <= 50; ++i) {
    const double t = s0 + 0.8 * i / 50.0 - 2 * d;
    const double fd = (forward_variance(s, p, ej, s0, t + d, v_s, lam_s) -
                       forward_variance(s, p, ej, s0, t - d, v_s, lam_s)) /
                      (2 * d);
    const double xi = forward_variance(s, p, ej, s0, t, v_s, lam_s);
    const double ratio = p.beta * p.lambda0 / gap;
    const double rhs = -s.kappa_a * (xi - s.vbar_a) +
                       p.eta * ej * ((lam_s - ratio) * std::exp(-gap * (t - s0)) + ratio);
    EXPECT_NEAR(fd, rhs, 1e-6 * std::abs(rhs)) << t;
  }
}

TEST(Vix, VarianceSwapIsAverageForwardVariance) {
  const auto p = test_params();
  const auto s = MeasureShift::from(p, -0.2);
  for (auto [s0, t] : {std::pair{0.0, 0.5}, std::pair{0.1, 30.0 / 365.0 + 0.1}, std::pair{0.3, 1.0}}) {
    const double avg =
        oracle::simpson([&](double u) { return forward_variance(s, p, 0.05, s0, u, 0.05, 1.3); }, s0, t, 10'000) /
        (t - s0);
    EXPECT_NEAR(variance_swap(s, p, 0.05, s0, t, 0.05, 1.3), avg, 1e-9);
  }
}

TEST(Vix, VarianceSwapLimits) {
  auto p = test_params();
  const auto s = MeasureShift::from(p, 0.0);
  EXPECT_NEAR(variance_swap(s, p, 0.05, 0.2, 0.2 + 1e-8, 0.05, 1.3), 0.05, 1e-6);
  EXPECT_THROW(variance_swap(s, p, 0.05, 0.2, 0.2, 0.05, 1.3), Error);
  p.eta = 0.0;
  const double A = a_k(s.kappa_a, 0.5);
  EXPECT_NEAR(variance_swap(s, p, 0.05, 0.0, 0.5, 0.05, 1.3), A * 0.05 + s.vbar_a * (1 - A), 1e-15);
}

TEST(Vix, CoefficientsMatchHighPrecisionChain) {
  const auto p = test_params();
  const auto c = vix_coefficients(MeasureShift::from(p, 0.0), p, 0.05);
  const auto b = coeffs_big(3, 1, big("0.01") * big("0.05"), 1, 2, big("0.04"), big(30) / 365);
  EXPECT_NEAR(c.A, static_cast<double>(b.A), 1e-15);
  EXPECT_NEAR(c.B, static_cast<double>(b.B), 1e-19);
  EXPECT_NEAR(c.C, static_cast<double>(b.C), 1e-17);
  // Frozen 30-digit references.
  EXPECT_NEAR(c.A, 0.88625049268690595, 1e-15);
  EXPECT_NEAR(c.B, 1.8439192907077784e-05, 1e-19);
  EXPECT_NEAR(c.C, 0.0045510184091473046, 1e-17);
  EXPECT_NEAR(vix_value(c, 0.04, 1.0), 20.004868734768199, 1e-11);
}

TEST(Vix, HestonReduction) {
  auto p = test_params();
  p.eta = 0.0;
  const auto s = MeasureShift::from(p, 0.2);
  const auto c = vix_coefficients(s, p, 0.05);
  EXPECT_EQ(c.B, 0.0);
  EXPECT_NEAR(c.C, s.vbar_a * (1 - c.A), 1e-15);
  EXPECT_NEAR(c.A, a_k(s.kappa_a, p.delta), 0.0);
  EXPECT_NEAR(vix_value(c, s.vbar_a, p.lambda0), 100 * std::sqrt(s.vbar_a), 1e-12);
}

TEST(Vix, BPositiveUnderBothOrderings) {
  auto p = test_params();
  for (double kappa : {0.5, 3.0}) {  // below and above beta - alpha = 1
    p.kappa = kappa;
    p.vbar = 0.1;
    p.sigma = 0.2;
    const auto s = MeasureShift::from(p, 0.0);
    const auto c = vix_coefficients(s, p, 0.05);
    const double diff = a_k(p.beta - p.alpha, p.delta) - a_k(s.kappa_a, p.delta);
    EXPECT_EQ(c.C1 > 0, kappa > 1.0);
    EXPECT_EQ(diff > 0, kappa > 1.0);
    EXPECT_GT(c.B, 0.0);
  }
}

TEST(Vix, BPositiveOverGrid) {
  for (double kappa : {0.5, 1.5, 3.0, 8.0}) {
    for (double beta : {1.2, 2.0, 5.0}) {
      for (double eta : {0.001, 0.1, 1.0}) {
        ModelParams p = test_params();
        p.kappa = kappa;
        p.vbar = 0.09;
        p.sigma = 0.25;
        p.beta = beta;
        p.eta = eta;
        const auto s = MeasureShift::from(p, 0.0);
        EXPECT_GT(vix_coefficients(s, p, 0.05).B, 0.0);
      }
    }
  }
}

TEST(Vix, RadicandPositiveAtZeroVariance) {
  const auto p = test_params();
  const auto c = vix_coefficients(MeasureShift::from(p, 0.0), p, 0.05);
  EXPECT_GT(c.B * p.lambda0 + c.C, 0.0);
  EXPECT_GT(vix_value(c, 1e-300, p.lambda0), 0.0);
}

TEST(Vix, NegativeRadicand) {
  VixCoefficients c{1.0, 0.0, -1e-13, 0, 0, 0, 0};
  EXPECT_EQ(vix_value(c, 0.0, 1.0), 0.0);
  c.C = -1e-9;
  try {
    vix_value(c, 0.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeVixSquared);
  }
}

TEST(Vix, SingularShiftRejected) {
  auto p = test_params();
  p.kappa = 1.0;  // equals beta - alpha
  EXPECT_THROW(vix_coefficients(MeasureShift{0.0, 1.0, 0.04}, p, 0.05), Error);
}

TEST(Vix, ForwardVarianceMartingaleInS) {
  const auto p = test_params();
  const auto sh = MeasureShift::from(p, 0.0);
  const double s = 0.25, t = 0.75;
  SimConfig cfg;
  cfg.n_paths = 40'000;
  cfg.seed = 9;
  const std::vector<double> cps{s};
  const auto est = mc_estimate(cfg, hhvix::testing::sim_model(p, test_jump()), s, cps, 1,
                               [&](const PathSample& ps, double* out) {
                                 out[0] = forward_variance(sh, p, 0.05, s, t, ps.v_grid[0], ps.lambda_grid[0]);
                               });
  const double want = forward_variance(sh, p, 0.05, 0.0, t, p.v0, p.lambda0);
  EXPECT_TRUE(hhvix::testing::within_se(est[0].mean, want, est[0].se));
}
