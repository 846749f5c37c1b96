#pragma once

#include <array>
#include <atomic>
#include <bit>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hhvix/riccati.hpp"

namespace hhvix {

/// Joint conditional transform E[exp(phi v_T + psi lambda_T) | F_t] for one
/// (phi, psi), backed by a solved Riccati trajectory.
struct CharFnSolution {
  TransformArgs args;
  std::shared_ptr<const OdeSolution> ode;
  MeasureShift shift;
  double sigma = 0.0;
  double lambda0 = 0.0;
};

/// Solves the Riccati system for (phi, psi) with terminal time T after
/// checking the transform domain.
inline CharFnSolution make_char_fn(const RiccatiModel& m, cplx phi, cplx psi, double T,
                                   std::vector<double> t_eval = {}, const SolverOptions& opt = {}) {
  const auto verdict = domain_check(m, phi, psi);
  if (!verdict.pass) throw Error(ErrorCode::DomainViolation, verdict.message);
  CharFnSolution s;
  s.ode = std::make_shared<const OdeSolution>(solve_riccati(m, phi, psi, T, t_eval, opt));
  s.args = {phi, psi, std::move(t_eval)};
  s.shift = m.shift;
  s.sigma = m.sigma;
  s.lambda0 = m.lambda0;
  return s;
}

/// Exponent F(t) + G(t) v + H(t) lambda; G is exact, H and F are
/// interpolated from the dense output.
inline cplx char_fn_exponent(const CharFnSolution& sol, double t, double v, double lambda) {
  const auto& ode = *sol.ode;
  if (!(t >= 0.0 && t <= ode.T)) {
    throw Error(ErrorCode::OutOfGrid, "t = " + std::to_string(t) + " outside [0, " + std::to_string(ode.T) + "]");
  }
  if (!(v > 0.0)) throw Error(ErrorCode::InvalidArgument, "variance state must be > 0");
  if (!(lambda >= sol.lambda0 * (1.0 - 1e-12))) {
    throw Error(ErrorCode::InvalidArgument, "intensity state must be >= lambda0");
  }
  const auto st = ode.at(t);
  const cplx G = solve_G_tau(sol.shift.kappa_a, sol.sigma, ode.phi, ode.T - t);
  return st.F + G * v + st.H * lambda;
}

inline cplx char_fn(const CharFnSolution& sol, double t, double v, double lambda) {
  return std::exp(char_fn_exponent(sol, t, v, lambda));
}

/// Memoizing front end for many transforms sharing the model and terminal
/// time. Entries are keyed by the exact bit patterns of (phi, psi); lookups
/// and inserts are safe from concurrent callers and results never depend on
/// scheduling.
class CharFnCache {
 public:
  CharFnCache(RiccatiModel model, double T, std::vector<double> t_eval = {}, SolverOptions opt = {})
      : model_(std::move(model)), T_(T), t_eval_(std::move(t_eval)), opt_(opt) {}

  [[nodiscard]] const RiccatiModel& model() const { return model_; }
  [[nodiscard]] double terminal() const { return T_; }

  /// Cached solution; solves on a miss.
  CharFnSolution get(cplx phi, cplx psi) {
    const Key key = make_key(phi, psi);
    {
      std::lock_guard lock(mu_);
      if (auto it = cache_.find(key); it != cache_.end()) {
        ++hits_;
        return it->second;
      }
    }
    CharFnSolution sol = make_char_fn(model_, phi, psi, T_, t_eval_, opt_);
    std::lock_guard lock(mu_);
    auto [it, inserted] = cache_.emplace(key, std::move(sol));
    if (inserted) {
      ++misses_;
    } else {
      ++hits_;
    }
    return it->second;
  }

  cplx evaluate(double t, double v, double lambda, cplx phi, cplx psi) {
    return char_fn(get(phi, psi), t, v, lambda);
  }

  [[nodiscard]] long hits() const { return hits_.load(); }
  [[nodiscard]] long misses() const { return misses_.load(); }
  [[nodiscard]] std::size_t size() const {
    std::lock_guard lock(mu_);
    return cache_.size();
  }

 private:
  using Key = std::array<std::uint64_t, 4>;
  static Key make_key(cplx phi, cplx psi) {
    return {std::bit_cast<std::uint64_t>(phi.real()), std::bit_cast<std::uint64_t>(phi.imag()),
            std::bit_cast<std::uint64_t>(psi.real()), std::bit_cast<std::uint64_t>(psi.imag())};
  }

  RiccatiModel model_;
  double T_;
  std::vector<double> t_eval_;
  SolverOptions opt_;
  mutable std::mutex mu_;
  std::map<Key, CharFnSolution> cache_;
  std::atomic<long> hits_{0};
  std::atomic<long> misses_{0};
};

/// Element-wise transform over a list of (phi, psi) pairs. A failing element
/// is reported with its index.
inline std::vector<cplx> char_fn_batch(CharFnCache& cache, double t, double v, double lambda,
                                       std::span<const std::pair<cplx, cplx>> args) {
  std::vector<cplx> out;
  out.reserve(args.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    try {
      out.push_back(cache.evaluate(t, v, lambda, args[i].first, args[i].second));
    } catch (const Error& e) {
      throw Error(e.code(), "element " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace hhvix
