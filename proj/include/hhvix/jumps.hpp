#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <limits>
#include <random>
#include <string>
#include <variant>

#include "hhvix/error.hpp"

namespace hhvix {

using cplx = std::complex<double>;

// Jump-size laws for the compound Hawkes term. Each law is supported on
// (0, inf), has an MGF on (-inf, eps_J) that blows up at eps_J, and exposes
// the four operations the Riccati solver and the simulator need.

struct ExponentialJumps {
  double rate;  // theta
};

struct GammaJumps {
  double shape;  // k
  double rate;   // theta
};

struct ConstantJumps {
  double value;  // c0
};

template <class L>
concept JumpDistribution = requires(const L& law, cplx z, double y, std::mt19937_64& rng) {
  { law.eps() } -> std::convertible_to<double>;
  { law.mgf(z) } -> std::convertible_to<cplx>;
  { law.mgf_derivative(z) } -> std::convertible_to<cplx>;
  { law.mgf_inverse(y) } -> std::convertible_to<double>;
  { law.mean() } -> std::convertible_to<double>;
  { law.sample(rng) } -> std::convertible_to<double>;
};

namespace detail {

inline void require_mgf_domain(cplx z, double eps) {
  if (!(z.real() < eps)) {
    throw Error(ErrorCode::DomainViolation,
                "MGF argument real part " + std::to_string(z.real()) + " >= eps_J " + std::to_string(eps));
  }
}

inline void require_inverse_domain(double y) {
  if (!(y > 1.0)) {
    throw Error(ErrorCode::DomainViolation, "MGF inverse needs y > 1, got " + std::to_string(y));
  }
}

}  // namespace detail

struct Exponential : ExponentialJumps {
  [[nodiscard]] double eps() const { return rate; }
  [[nodiscard]] cplx mgf(cplx z) const {
    detail::require_mgf_domain(z, eps());
    return rate / (rate - z);
  }
  [[nodiscard]] cplx mgf_derivative(cplx z) const {
    detail::require_mgf_domain(z, eps());
    return rate / ((rate - z) * (rate - z));
  }
  [[nodiscard]] double mgf_inverse(double y) const {
    detail::require_inverse_domain(y);
    return rate * (1.0 - 1.0 / y);
  }
  [[nodiscard]] double mean() const { return 1.0 / rate; }
  double sample(std::mt19937_64& rng) const { return std::exponential_distribution<double>(rate)(rng); }
};

struct Gamma : GammaJumps {
  [[nodiscard]] double eps() const { return rate; }
  [[nodiscard]] cplx mgf(cplx z) const {
    detail::require_mgf_domain(z, eps());
    // Re(theta - z) > 0 on the domain, so the principal log is branch-safe.
    return std::exp(-shape * std::log((rate - z) / rate));
  }
  [[nodiscard]] cplx mgf_derivative(cplx z) const { return shape / (rate - z) * mgf(z); }
  [[nodiscard]] double mgf_inverse(double y) const {
    detail::require_inverse_domain(y);
    return rate * (1.0 - std::pow(y, -1.0 / shape));
  }
  [[nodiscard]] double mean() const { return shape / rate; }
  double sample(std::mt19937_64& rng) const {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
  }
};

struct Constant : ConstantJumps {
  [[nodiscard]] double eps() const { return std::numeric_limits<double>::infinity(); }
  [[nodiscard]] cplx mgf(cplx z) const { return std::exp(value * z); }
  [[nodiscard]] cplx mgf_derivative(cplx z) const { return value * std::exp(value * z); }
  [[nodiscard]] double mgf_inverse(double y) const {
    detail::require_inverse_domain(y);
    return std::log(y) / value;
  }
  [[nodiscard]] double mean() const { return value; }
  double sample(std::mt19937_64&) const { return value; }
};

static_assert(JumpDistribution<Exponential>);
static_assert(JumpDistribution<Gamma>);
static_assert(JumpDistribution<Constant>);

/// Closed set of shipped laws; new laws only need to model JumpDistribution
/// and be added to the variant.
class JumpLaw {
 public:
  using Variant = std::variant<Exponential, Gamma, Constant>;

  static JumpLaw exponential(double rate) {
    if (!(rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "exponential jump rate must be > 0");
    return JumpLaw(Exponential{{rate}});
  }
  static JumpLaw gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "gamma jump shape and rate must be > 0");
    }
    return JumpLaw(Gamma{{shape, rate}});
  }
  static JumpLaw constant(double value) {
    if (!(value > 0.0)) throw Error(ErrorCode::InvalidArgument, "constant jump size must be > 0");
    return JumpLaw(Constant{{value}});
  }

  [[nodiscard]] double eps_J() const {
    return std::visit([](const auto& l) { return l.eps(); }, law_);
  }
  [[nodiscard]] cplx mgf(cplx z) const {
    return std::visit([z](const auto& l) { return l.mgf(z); }, law_);
  }
  [[nodiscard]] double mgf(double t) const { return mgf(cplx(t, 0.0)).real(); }
  [[nodiscard]] cplx mgf_derivative(cplx z) const {
    return std::visit([z](const auto& l) { return l.mgf_derivative(z); }, law_);
  }
  [[nodiscard]] double mgf_inverse(double y) const {
    return std::visit([y](const auto& l) { return l.mgf_inverse(y); }, law_);
  }
  [[nodiscard]] double mean() const {
    return std::visit([](const auto& l) { return l.mean(); }, law_);
  }
  double sample(std::mt19937_64& rng) const {
    return std::visit([&rng](const auto& l) { return l.sample(rng); }, law_);
  }

  [[nodiscard]] std::string name() const {
    return std::visit(
        [](const auto& l) -> std::string {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, Exponential>) return "exponential";
          else if constexpr (std::is_same_v<T, Gamma>) return "gamma";
          else return "constant";
        },
        law_);
  }

  [[nodiscard]] const Variant& variant() const { return law_; }

 private:
  explicit JumpLaw(Variant law) : law_(law) {}
  Variant law_;
};

}  // namespace hhvix
