#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hhvix/error.hpp"
#include "hhvix/jumps.hpp"
#include "hhvix/mc.hpp"
#include "hhvix/params.hpp"
#include "hhvix/pricer.hpp"

namespace hhvix {

/// Raised for malformed or unknown configuration content.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputConfig {
  std::string format = "json";  // json | csv
  std::string path;             // empty = stdout
};

/// Everything a CLI run needs. Every section except "model" and "jump" is
/// optional; unknown keys anywhere are rejected.
struct RunConfig {
  ModelParams model;
  JumpLaw jump = JumpLaw::exponential(20.0);
  double shift_a = 0.0;
  AssumptionConfig assumption;
  PricingRequest pricing;
  SimConfig sim;
  OutputConfig output;
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& j, const char* where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const char* where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + "." + key + ": " + e.what());
  }
}

inline double need_number(const json& j, const char* key, const char* where) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ConfigError(std::string(where) + "." + key + " must be a number");
  }
  return j.at(key).get<double>();
}

inline JumpLaw parse_jump(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ConfigError("jump.type must be one of exponential|gamma|constant");
  }
  const auto type = j.at("type").get<std::string>();
  try {
    if (type == "exponential") {
      reject_unknown(j, "jump", {"type", "rate"});
      return JumpLaw::exponential(need_number(j, "rate", "jump"));
    }
    if (type == "gamma") {
      reject_unknown(j, "jump", {"type", "shape", "rate"});
      return JumpLaw::gamma(need_number(j, "shape", "jump"), need_number(j, "rate", "jump"));
    }
    if (type == "constant") {
      reject_unknown(j, "jump", {"type", "value"});
      return JumpLaw::constant(need_number(j, "value", "jump"));
    }
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("jump.type must be one of exponential|gamma|constant, got '" + type + "'");
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::read;
  detail::reject_unknown(j, "config", {"model", "jump", "shift_a", "assumption", "pricing", "sim", "output"});
  if (!j.contains("model")) throw ConfigError("missing 'model' section");
  if (!j.contains("jump")) throw ConfigError("missing 'jump' section");
  RunConfig c;

  const auto& m = j.at("model");
  detail::reject_unknown(m, "model", {"mu", "r", "rho", "v0", "kappa", "vbar", "sigma", "eta", "lambda0", "alpha",
                                      "beta", "T", "delta"});
  read(m, "mu", c.model.mu, "model");
  read(m, "r", c.model.r, "model");
  // mu defaults to r, so the drift assumption is vacuous unless given.
  if (!m.contains("mu")) c.model.mu = c.model.r;
  read(m, "rho", c.model.rho, "model");
  read(m, "v0", c.model.v0, "model");
  read(m, "kappa", c.model.kappa, "model");
  read(m, "vbar", c.model.vbar, "model");
  read(m, "sigma", c.model.sigma, "model");
  read(m, "eta", c.model.eta, "model");
  read(m, "lambda0", c.model.lambda0, "model");
  read(m, "alpha", c.model.alpha, "model");
  read(m, "beta", c.model.beta, "model");
  read(m, "T", c.model.T, "model");
  read(m, "delta", c.model.delta, "model");

  c.jump = detail::parse_jump(j.at("jump"));
  read(j, "shift_a", c.shift_a, "config");

  if (j.contains("assumption")) {
    const auto& a = j.at("assumption");
    detail::reject_unknown(a, "assumption", {"Q2", "eps1", "eps2"});
    read(a, "Q2", c.assumption.Q2, "assumption");
    read(a, "eps1", c.assumption.eps1, "assumption");
    read(a, "eps2", c.assumption.eps2, "assumption");
  }

  c.pricing.v_t = c.model.v0;
  c.pricing.lambda_t = c.model.lambda0;
  if (j.contains("pricing")) {
    const auto& p = j.at("pricing");
    detail::reject_unknown(p, "pricing", {"t", "T_mat", "K", "v_t", "lambda_t", "quadrature"});
    read(p, "t", c.pricing.t, "pricing");
    read(p, "T_mat", c.pricing.T_mat, "pricing");
    read(p, "K", c.pricing.K, "pricing");
    read(p, "v_t", c.pricing.v_t, "pricing");
    read(p, "lambda_t", c.pricing.lambda_t, "pricing");
    if (p.contains("quadrature")) {
      const auto& q = p.at("quadrature");
      detail::reject_unknown(q, "pricing.quadrature", {"phi_R_fraction", "tol", "max_nodes"});
      read(q, "phi_R_fraction", c.pricing.quadrature.phi_R_fraction, "pricing.quadrature");
      read(q, "tol", c.pricing.quadrature.tol, "pricing.quadrature");
      read(q, "max_nodes", c.pricing.quadrature.max_nodes, "pricing.quadrature");
    }
  }

  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    detail::reject_unknown(s, "sim", {"n_paths", "seed", "cir_scheme", "euler_steps_per_year"});
    read(s, "n_paths", c.sim.n_paths, "sim");
    read(s, "seed", c.sim.seed, "sim");
    read(s, "euler_steps_per_year", c.sim.euler_steps_per_year, "sim");
    if (s.contains("cir_scheme")) {
      std::string scheme;
      read(s, "cir_scheme", scheme, "sim");
      if (scheme == "exact") c.sim.cir_scheme = CirScheme::Exact;
      else if (scheme == "euler") c.sim.cir_scheme = CirScheme::Euler;
      else throw ConfigError("sim.cir_scheme must be exact|euler");
    }
    if (c.sim.n_paths < 1) throw ConfigError("sim.n_paths must be >= 1");
  }

  if (j.contains("output")) {
    const auto& o = j.at("output");
    detail::reject_unknown(o, "output", {"format", "path"});
    read(o, "format", c.output.format, "output");
    read(o, "path", c.output.path, "output");
    if (c.output.format != "json" && c.output.format != "csv") throw ConfigError("output.format must be json|csv");
  }
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace hhvix
