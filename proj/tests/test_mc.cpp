#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"

using namespace hhvix;
using hhvix::testing::sim_model;
using hhvix::testing::test_jump;
using hhvix::testing::test_params;
using hhvix::testing::within_se;

TEST(Mc, PoissonLimit) {
  const int n = 100'000;
  const double lambda0 = 1.5, T = 2.0;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    auto rng = path_stream(1, i);
    const double k = static_cast<double>(simulate_hawkes(lambda0, 1e-12, 2.0, T, rng).events.size());
    s += k;
    s2 += k * k;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_TRUE(within_se(mean, lambda0 * T, se, 4.0)) << mean;
}

TEST(Mc, HawkesPathInvariants) {
  const auto p = test_params();
  for (int i = 0; i < 200; ++i) {
    auto rng = path_stream(3, i);
    const auto h = simulate_hawkes(p.lambda0, p.alpha, p.beta, p.T, rng);
    EXPECT_TRUE(std::is_sorted(h.events.begin(), h.events.end()));
    for (double e : h.events) {
      EXPECT_GT(e, 0.0);
      EXPECT_LE(e, p.T);
    }
    EXPECT_GE(h.lambda_T, p.lambda0);
    EXPECT_NEAR(h.lambda_T, intensity_at(p, h.events, p.T), 1e-12);
  }
}

TEST(Mc, IntegratedIntensityIsExact) {
  const auto p = test_params();
  auto rng = path_stream(8, 0);
  const auto h = simulate_hawkes(p.lambda0, p.alpha, p.beta, p.T, rng);
  double closed = p.lambda0 * p.T;
  for (double e : h.events) closed += p.alpha / p.beta * (1 - std::exp(-p.beta * (p.T - e)));
  EXPECT_NEAR(h.integrated_intensity, closed, 1e-12);
}

TEST(Mc, DeterministicReplay) {
  const auto p = test_params();
  auto r1 = path_stream(42, 7), r2 = path_stream(42, 7);
  EXPECT_EQ(simulate_hawkes(p.lambda0, p.alpha, p.beta, p.T, r1).events,
            simulate_hawkes(p.lambda0, p.alpha, p.beta, p.T, r2).events);
  auto r3 = path_stream(43, 7);
  auto r4 = path_stream(42, 8);
  EXPECT_NE(r3(), r4());
}

TEST(Mc, IntensityMean) {
  const auto p = test_params();
  SimConfig cfg;
  cfg.n_paths = 100'000;
  const std::vector<double> times{0.1, 0.5, 1.0};
  const auto est = mc_intensity_mean(cfg, sim_model(p, test_jump()), times);
  const double gap = p.beta - p.alpha, ratio = p.beta * p.lambda0 / gap;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double want = (p.lambda0 - ratio) * std::exp(-gap * times[i]) + ratio;
    EXPECT_TRUE(within_se(est[i].mean, want, est[i].se)) << times[i] << ": " << est[i].mean << " vs " << want;
  }
}

TEST(Mc, CirMeanWithoutJumps) {
  auto p = test_params();
  p.eta = 0.0;
  SimConfig cfg;
  cfg.n_paths = 50'000;
  const auto m = sim_model(p, test_jump(), 0.0);
  const std::vector<double> t{1.0};
  const auto est = mc_forward_variance(cfg, m, t);
  const double k = m.shift.kappa_a;
  const double want = std::exp(-k) * p.v0 + m.shift.vbar_a * (1 - std::exp(-k));
  EXPECT_TRUE(within_se(est[0].mean, want, est[0].se));
}

TEST(Mc, DeterministicDecayWithoutNoise) {
  auto p = test_params();
  p.eta = 0.0;
  p.sigma = 1e-9;
  p.v0 = 0.09;
  const auto m = sim_model(p, test_jump());
  SimConfig cfg;
  cfg.cir_scheme = CirScheme::Euler;  // the exact sampler is singular as sigma -> 0
  cfg.euler_steps_per_year = 1'000'000;
  auto rng = path_stream(1, 0);
  const std::vector<double> cps{0.3};
  const auto vs = simulate_variance(m, {}, {}, cps, 1.0, rng, cfg);
  // Euler carries an O(dt) bias of about dt kappa^2 |v0 - vbar|.
  const double bias = 1e-6 * p.kappa * p.kappa * std::abs(p.v0 - p.vbar);
  for (auto [t, v] : {std::pair{0.3, vs[0]}, std::pair{1.0, vs[1]}}) {
    const double want = p.vbar + (p.v0 - p.vbar) * std::exp(-p.kappa * t);
    EXPECT_NEAR(v, want, bias);
  }
}

TEST(Mc, ExactSchemeWithSmallSigma) {
  auto p = test_params();
  p.eta = 0.0;
  p.sigma = 1e-4;
  p.v0 = 0.09;
  const auto m = sim_model(p, test_jump());
  auto rng = path_stream(1, 0);
  const auto vs = simulate_variance(m, {}, {}, {}, 1.0, rng, SimConfig{});
  EXPECT_NEAR(vs[0], p.vbar + (p.v0 - p.vbar) * std::exp(-p.kappa), 1e-5);
}

TEST(Mc, VarianceMeanMatchesForwardVariance) {
  const auto p = test_params();
  SimConfig cfg;
  cfg.n_paths = 50'000;
  const auto m = sim_model(p, test_jump());
  const std::vector<double> times{0.25, 1.0};
  const auto est = mc_forward_variance(cfg, m, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double want = forward_variance(m.shift, p, 0.05, 0.0, times[i], p.v0, p.lambda0);
    EXPECT_TRUE(within_se(est[i].mean, want, est[i].se)) << times[i];
  }
}

TEST(Mc, PositiveVarianceAtCheckpoints) {
  const auto p = test_params();
  const auto m = sim_model(p, test_jump());
  const std::vector<double> cps{0.1, 0.2, 0.5, 0.9};
  for (int i = 0; i < 500; ++i) {
    auto rng = path_stream(12, i);
    const auto s = simulate_path(m, 1.0, cps, rng, SimConfig{});
    for (double v : s.v_grid) EXPECT_GT(v, 0.0);
    for (double l : s.lambda_grid) EXPECT_GE(l, p.lambda0);
    EXPECT_EQ(s.events.size(), s.jump_sizes.size());
  }
}

TEST(Mc, CharFnTrivialArguments) {
  SimConfig cfg;
  cfg.n_paths = 1000;
  const auto e = mc_char_fn(cfg, sim_model(test_params(), test_jump()), 0.0, 0.0, 1.0);
  EXPECT_EQ(e.mean, std::complex<double>(1.0));
  EXPECT_EQ(e.se_re, 0.0);
  EXPECT_EQ(e.se_im, 0.0);
}

TEST(Mc, CharFnModulusBound) {
  SimConfig cfg;
  cfg.n_paths = 20'000;
  const auto e = mc_char_fn(cfg, sim_model(test_params(), test_jump()), {0.0, 0.5}, 0.0, 1.0);
  EXPECT_LE(std::abs(e.mean), 1.0 + 3 * std::hypot(e.se_re, e.se_im));
}

TEST(Mc, SingleVariateSeIsFinite) {
  SimConfig cfg;
  cfg.n_paths = 1;
  const auto e = mc_char_fn(cfg, sim_model(test_params(), test_jump()), 0.05, 0.2, 1.0);
  EXPECT_TRUE(std::isfinite(e.se_re));
}

TEST(Mc, SeedDeterminismAndThreadIndependence) {
  const auto p = test_params();
  const auto m = sim_model(p, test_jump());
  const auto coeffs = vix_coefficients(m.shift, p, 0.05);
  SimConfig a;
  a.n_paths = 3000;
  SimConfig b = a;
  b.threads = 3;
  const auto ea = mc_vix_price(a, m, coeffs, 20.0, 0.5);
  const auto ea2 = mc_vix_price(a, m, coeffs, 20.0, 0.5);
  const auto eb = mc_vix_price(b, m, coeffs, 20.0, 0.5);
  EXPECT_EQ(ea.mean, ea2.mean);
  EXPECT_EQ(ea.mean, eb.mean);
  EXPECT_EQ(ea.se, eb.se);
}

TEST(Mc, ZeroStrikeDominates) {
  const auto p = test_params();
  const auto m = sim_model(p, test_jump());
  const auto coeffs = vix_coefficients(m.shift, p, 0.05);
  SimConfig cfg;
  cfg.n_paths = 20'000;
  EXPECT_GT(mc_vix_price(cfg, m, coeffs, 0.0, 0.5).mean, mc_vix_price(cfg, m, coeffs, 20.0, 0.5).mean);
}

TEST(Mc, Compensators) {
  const auto p = test_params();
  SimConfig cfg;
  cfg.n_paths = 100'000;
  const auto e = mc_compensators(cfg, sim_model(p, test_jump()), p.T);
  EXPECT_TRUE(within_se(e[0].mean, 0.0, e[0].se)) << e[0].mean << " se " << e[0].se;
  EXPECT_TRUE(within_se(e[1].mean, 0.0, e[1].se)) << e[1].mean << " se " << e[1].se;
}

TEST(Mc, ExactVersusEuler) {
  const auto p = test_params();
  const auto m = sim_model(p, test_jump());
  const auto coeffs = vix_coefficients(m.shift, p, 0.05);
  SimConfig exact;
  exact.n_paths = 20'000;
  SimConfig euler = exact;
  euler.cir_scheme = CirScheme::Euler;
  euler.seed = 1234;
  const auto a = mc_vix_price(exact, m, coeffs, 20.0, 0.5);
  const auto b = mc_vix_price(euler, m, coeffs, 20.0, 0.5);
  EXPECT_TRUE(within_se(a.mean, b.mean, std::hypot(a.se, b.se))) << a.mean << " vs " << b.mean;
}

TEST(Mc, HestonReductionPrice) {
  auto p = test_params();
  p.eta = 0.0;
  const auto m = sim_model(p, test_jump());
  const auto coeffs = vix_coefficients(m.shift, p, 0.05);
  ASSERT_EQ(coeffs.B, 0.0);
  SimConfig cfg;
  cfg.n_paths = 20'000;
  const auto hh = mc_vix_price(cfg, m, coeffs, 20.0, 0.5);

  // Independent pure-Heston path: Euler on v only, no Hawkes events.
  const int n = 20'000, steps = 1000;
  const double dt = 0.5 / steps, A = coeffs.A, C = p.vbar * (1 - A);
  std::vector<double> pay(n);
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(777 + i);
    std::normal_distribution<double> g(0.0, 1.0);
    double v = p.v0;
    for (int k = 0; k < steps; ++k) {
      const double vp = std::max(v, 0.0);
      v += p.kappa * (p.vbar - vp) * dt + p.sigma * std::sqrt(vp * dt) * g(rng);
    }
    pay[i] = std::max(100 * std::sqrt(A * std::max(v, 0.0) + C) - 20.0, 0.0);
  }
  double s = 0.0, s2 = 0.0;
  for (double x : pay) {
    s += x;
    s2 += x * x;
  }
  const double mean = std::exp(-p.r * 0.5) * s / n;
  const double se = std::exp(-p.r * 0.5) * std::sqrt((s2 / n - (s / n) * (s / n)) / n);
  EXPECT_TRUE(within_se(hh.mean, mean, std::hypot(hh.se, se))) << hh.mean << " vs " << mean;
}

TEST(Mc, ExactSchemeNeedsFeller) {
  auto p = test_params();
  p.sigma = 1.0;
  const auto m = sim_model(p, test_jump());
  auto rng = path_stream(0, 0);
  try {
    simulate_variance(m, {}, {}, {}, 1.0, rng, SimConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemeUnavailable);
  }
}
