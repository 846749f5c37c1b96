#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hhvix/error.hpp"
#include "hhvix/jumps.hpp"
#include "hhvix/parallel.hpp"
#include "hhvix/params.hpp"
#include "hhvix/vix.hpp"

namespace hhvix {

// Monte Carlo oracle under the shifted measure: exact Hawkes thinning, exact
// (or Euler) CIR between events, and deterministic per-path RNG streams.

enum class CirScheme { Exact, Euler };

struct SimConfig {
  long n_paths = 200'000;
  std::uint64_t seed = 42;
  CirScheme cir_scheme = CirScheme::Exact;
  int euler_steps_per_year = 2000;
  unsigned threads = 1;  // 0 = all cores; never changes results
};

struct SimModel {
  ModelParams params;
  MeasureShift shift;
  JumpLaw jump = JumpLaw::exponential(1.0);
};

struct HawkesPath {
  std::vector<double> events;
  double lambda_T = 0.0;
  double integrated_intensity = 0.0;  // int_0^T lambda_s ds
};

struct PathSample {
  std::vector<double> events;
  std::vector<double> jump_sizes;
  double v_T = 0.0;
  double lambda_T = 0.0;
  double integrated_intensity = 0.0;
  std::vector<double> v_grid;       // state at requested checkpoints
  std::vector<double> lambda_grid;

  [[nodiscard]] double L_T() const {
    double s = 0.0;
    for (double j : jump_sizes) s += j;
    return s;
  }
};

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

struct ComplexEstimate {
  std::complex<double> mean;
  double se_re = 0.0;
  double se_im = 0.0;
};

/// Independent stream for path `index`; the same (seed, index) always gives
/// the same engine state.
inline std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t index) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  };
  return std::mt19937_64(splitmix(splitmix(seed) ^ splitmix(index + 0x632BE59BD9B4E019ull)));
}

/// Ogata thinning for lambda_t = lambda0 + alpha sum e^{-beta (t - t_i)}.
/// The intensity only decays between events, so its current value bounds
/// it until the next acceptance.
inline HawkesPath simulate_hawkes(double lambda0, double alpha, double beta, double T, std::mt19937_64& rng) {
  if (!(alpha >= 0.0 && alpha < beta)) throw Error(ErrorCode::InvalidArgument, "need 0 <= alpha < beta");
  HawkesPath out;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double t = 0.0;
  double lam = lambda0;  // intensity at time t (right limit)
  double integral = 0.0;
  auto decay = [&](double from_lam, double dt) { return lambda0 + (from_lam - lambda0) * std::exp(-beta * dt); };
  auto area = [&](double from_lam, double dt) {
    return lambda0 * dt + (from_lam - lambda0) * (-std::expm1(-beta * dt)) / beta;
  };
  for (;;) {
    const double bound = lam;
    const double w = std::exponential_distribution<double>(bound)(rng);
    const double cand = t + w;
    if (cand > T) {
      integral += area(lam, T - t);
      lam = decay(lam, T - t);
      break;
    }
    integral += area(lam, w);
    lam = decay(lam, w);
    t = cand;
    if (unif(rng) * bound <= lam) {
      out.events.push_back(t);
      lam += alpha;
    }
  }
  out.lambda_T = lam;
  out.integrated_intensity = integral;
  return out;
}

namespace detail {

/// Exact CIR transition over dt via the noncentral chi-square law:
/// v' = c * chi'^2(d, nc) with c = sigma^2 (1 - e^{-kappa dt}) / (4 kappa),
/// d = 4 kappa vbar / sigma^2, nc = v e^{-kappa dt} / c.
inline double cir_exact_step(double v, double dt, double kappa, double vbar, double sigma, std::mt19937_64& rng) {
  if (dt <= 0.0) return v;
  const double c = sigma * sigma * (-std::expm1(-kappa * dt)) / (4.0 * kappa);
  const double d = 4.0 * kappa * vbar / (sigma * sigma);
  const double nc = v * std::exp(-kappa * dt) / c;
  double chi2;
  if (d > 1.0) {
    const double z = std::normal_distribution<double>(0.0, 1.0)(rng);
    const double g = std::gamma_distribution<double>(0.5 * (d - 1.0), 2.0)(rng);
    const double m = z + std::sqrt(nc);
    chi2 = m * m + g;
  } else {
    const auto n = std::poisson_distribution<long long>(0.5 * nc)(rng);
    chi2 = std::gamma_distribution<double>(0.5 * d + static_cast<double>(n), 2.0)(rng);
  }
  return c * chi2;
}

/// Full-truncation Euler over [0, dt] in fixed sub-steps of at most h.
inline double cir_euler_step(double v, double dt, double h, double kappa, double vbar, double sigma,
                             std::mt19937_64& rng) {
  if (dt <= 0.0) return v;
  std::normal_distribution<double> gauss(0.0, 1.0);
  const long n = std::max(1L, static_cast<long>(std::ceil(dt / h - 1e-9)));
  const double step = dt / static_cast<double>(n);
  const double sq = std::sqrt(step);
  for (long i = 0; i < n; ++i) {
    const double vp = std::max(v, 0.0);
    v += kappa * (vbar - vp) * step + sigma * std::sqrt(vp) * sq * gauss(rng);
  }
  return v;
}

}  // namespace detail

/// Variance path given the Hawkes events and jump sizes: exact (or Euler)
/// CIR transitions between consecutive event/checkpoint times, plus eta*J at
/// each event. Returns the state at each checkpoint followed by v_T.
inline std::vector<double> simulate_variance(const SimModel& m, std::span<const double> events,
                                             std::span<const double> jump_sizes,
                                             std::span<const double> checkpoints, double T, std::mt19937_64& rng,
                                             const SimConfig& cfg) {
  const auto& p = m.params;
  const double kappa = m.shift.kappa_a;
  const double vbar = m.shift.vbar_a;
  const double sigma = p.sigma;
  if (cfg.cir_scheme == CirScheme::Exact && !(2.0 * kappa * vbar >= sigma * sigma)) {
    throw Error(ErrorCode::SchemeUnavailable, "exact CIR scheme needs the Feller condition");
  }
  const double h = 1.0 / cfg.euler_steps_per_year;
  auto advance = [&](double v, double dt) {
    return cfg.cir_scheme == CirScheme::Exact ? detail::cir_exact_step(v, dt, kappa, vbar, sigma, rng)
                                              : detail::cir_euler_step(v, dt, h, kappa, vbar, sigma, rng);
  };
  std::vector<double> out;
  out.reserve(checkpoints.size() + 1);
  double v = p.v0;
  double t = 0.0;
  std::size_t ie = 0, ic = 0;
  while (ie < events.size() || ic < checkpoints.size()) {
    // Events before checkpoints at equal times (right-continuous paths).
    const bool take_event = ie < events.size() && (ic >= checkpoints.size() || events[ie] <= checkpoints[ic]);
    const double next = take_event ? events[ie] : checkpoints[ic];
    v = advance(v, next - t);
    t = next;
    if (take_event) {
      v += p.eta * jump_sizes[ie];
      ++ie;
    } else {
      out.push_back(cfg.cir_scheme == CirScheme::Euler ? std::max(v, 0.0) : v);
      ++ic;
    }
  }
  v = advance(v, T - t);
  out.push_back(cfg.cir_scheme == CirScheme::Euler ? std::max(v, 0.0) : v);
  return out;
}

/// Intensity at time t from the event list (events at t included).
inline double intensity_at(const ModelParams& p, std::span<const double> events, double t) {
  double lam = p.lambda0;
  for (double s : events) {
    if (s > t) break;
    lam += p.alpha * std::exp(-p.beta * (t - s));
  }
  return lam;
}

/// One full realization on [0, T] with the state recorded at `checkpoints`
/// (sorted, within [0, T]).
inline PathSample simulate_path(const SimModel& m, double T, std::span<const double> checkpoints,
                                std::mt19937_64& rng, const SimConfig& cfg) {
  const auto& p = m.params;
  PathSample s;
  auto hk = simulate_hawkes(p.lambda0, p.alpha, p.beta, T, rng);
  s.events = std::move(hk.events);
  s.lambda_T = hk.lambda_T;
  s.integrated_intensity = hk.integrated_intensity;
  s.jump_sizes.reserve(s.events.size());
  for (std::size_t i = 0; i < s.events.size(); ++i) s.jump_sizes.push_back(m.jump.sample(rng));
  auto vs = simulate_variance(m, s.events, s.jump_sizes, checkpoints, T, rng, cfg);
  s.v_T = vs.back();
  vs.pop_back();
  s.v_grid = std::move(vs);
  s.lambda_grid.reserve(checkpoints.size());
  for (double c : checkpoints) s.lambda_grid.push_back(intensity_at(p, s.events, c));
  return s;
}

/// Runs cfg.n_paths paths and reduces `k` statistics per path to means and
/// standard errors. Per-path values are stored by path index and summed
/// pairwise, so the result is identical for any thread count.
inline std::vector<Estimate> mc_estimate(const SimConfig& cfg, const SimModel& m, double T,
                                         std::span<const double> checkpoints, std::size_t k,
                                         const std::function<void(const PathSample&, double*)>& stat) {
  if (cfg.n_paths < 1) throw Error(ErrorCode::InvalidArgument, "n_paths must be >= 1");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) {
    throw Error(ErrorCode::InvalidArgument, "checkpoints must be sorted");
  }
  const auto n = static_cast<std::size_t>(cfg.n_paths);
  std::vector<double> vals(n * k);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    auto rng = path_stream(cfg.seed, i);
    const auto path = simulate_path(m, T, checkpoints, rng, cfg);
    stat(path, vals.data() + i * k);
  });
  std::vector<Estimate> out(k);
  std::vector<double> col(n);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = vals[i * k + j];
    const double mean = pairwise_sum(col) / static_cast<double>(n);
    for (auto& x : col) x = (x - mean) * (x - mean);
    const double var = n > 1 ? pairwise_sum(col) / static_cast<double>(n - 1) : 0.0;
    out[j] = {mean, std::sqrt(var / static_cast<double>(n))};
  }
  return out;
}

/// E[exp(phi v_T + psi lambda_T)] at t = 0 from (v0, lambda0).
inline ComplexEstimate mc_char_fn(const SimConfig& cfg, const SimModel& m, std::complex<double> phi,
                                  std::complex<double> psi, double T) {
  const auto e = mc_estimate(cfg, m, T, {}, 2, [&](const PathSample& s, double* out) {
    const auto z = std::exp(phi * s.v_T + psi * s.lambda_T);
    out[0] = z.real();
    out[1] = z.imag();
  });
  return {{e[0].mean, e[1].mean}, e[0].se, e[1].se};
}

/// Path means of v_t at each requested time.
inline std::vector<Estimate> mc_forward_variance(const SimConfig& cfg, const SimModel& m,
                                                 std::span<const double> times) {
  std::vector<double> cps(times.begin(), times.end());
  std::sort(cps.begin(), cps.end());
  const double T = cps.empty() ? m.params.T : cps.back();
  const auto order = cps;
  auto res = mc_estimate(cfg, m, T, cps, cps.size(), [&](const PathSample& s, double* out) {
    for (std::size_t j = 0; j < s.v_grid.size(); ++j) out[j] = s.v_grid[j];
  });
  // Back to the caller's order.
  std::vector<Estimate> out;
  for (double t : times) {
    const auto it = std::lower_bound(order.begin(), order.end(), t);
    out.push_back(res[static_cast<std::size_t>(it - order.begin())]);
  }
  return out;
}

/// Path means of lambda_t at each requested time (sorted input).
inline std::vector<Estimate> mc_intensity_mean(const SimConfig& cfg, const SimModel& m,
                                               std::span<const double> times) {
  return mc_estimate(cfg, m, times.back(), times, times.size(), [&](const PathSample& s, double* out) {
    for (std::size_t j = 0; j < s.lambda_grid.size(); ++j) out[j] = s.lambda_grid[j];
  });
}

/// e^{-r T_mat} E[max(100 sqrt(A v + B lambda + C) - K, 0)] from t = 0.
inline Estimate mc_vix_price(const SimConfig& cfg, const SimModel& m, const VixCoefficients& coeffs, double K,
                             double T_mat) {
  const double disc = std::exp(-m.params.r * T_mat);
  auto e = mc_estimate(cfg, m, T_mat, {}, 1, [&](const PathSample& s, double* out) {
    const double rad = std::max(0.0, coeffs.A * s.v_T + coeffs.B * s.lambda_T + coeffs.C);
    out[0] = std::max(100.0 * std::sqrt(rad) - K, 0.0);
  });
  return {disc * e[0].mean, disc * e[0].se};
}

/// Means of N_T - int lambda and L_T - E[J] int lambda (both martingales at 0).
inline std::vector<Estimate> mc_compensators(const SimConfig& cfg, const SimModel& m, double T) {
  const double ej = m.jump.mean();
  return mc_estimate(cfg, m, T, {}, 2, [&](const PathSample& s, double* out) {
    out[0] = static_cast<double>(s.events.size()) - s.integrated_intensity;
    out[1] = s.L_T() - ej * s.integrated_intensity;
  });
}

}  // namespace hhvix
