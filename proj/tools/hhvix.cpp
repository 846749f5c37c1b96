// hhvix: command-line front end for the Heston-Hawkes VIX option library.
//
// Exit codes: 0 success, 1 domain or admissibility failure, 2 usage or
// parse error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "hhvix/config.hpp"
#include "hhvix/hhvix.hpp"

namespace {

using namespace hhvix;

enum Exit { kOk = 0, kDomain = 1, kUsage = 2, kNumerical = 3 };

std::string num(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

/// Insertion-ordered record; values are pre-rendered JSON fragments.
/// Scalar fields also render as a two-line CSV.
class Record {
 public:
  Record& add(const std::string& key, double v) { return put(key, num(v), num(v), true); }
  Record& add(const std::string& key, long v) { return put(key, std::to_string(v), std::to_string(v), true); }
  Record& add(const std::string& key, std::uint64_t v) {
    return put(key, std::to_string(v), std::to_string(v), true);
  }
  Record& add(const std::string& key, bool v) {
    return put(key, v ? "true" : "false", v ? "true" : "false", true);
  }
  Record& add(const std::string& key, const std::string& v) { return put(key, quote(v), v, true); }
  Record& add(const std::string& key, const char* v) { return add(key, std::string(v)); }
  Record& raw(const std::string& key, std::string json) { return put(key, std::move(json), "", false); }

  [[nodiscard]] std::string json(int indent = 0) const {
    const std::string pad(static_cast<std::size_t>(indent) + 2, ' ');
    std::string out = "{\n";
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      out += pad + quote(fields_[i].key) + ": " + fields_[i].json;
      out += i + 1 < fields_.size() ? ",\n" : "\n";
    }
    return out + std::string(static_cast<std::size_t>(indent), ' ') + "}";
  }

  [[nodiscard]] std::string csv() const {
    std::string head, row;
    for (const auto& f : fields_) {
      if (!f.scalar) continue;
      head += (head.empty() ? "" : ",") + f.key;
      row += (row.empty() ? "" : ",") + f.text;
    }
    return head + "\n" + row + "\n";
  }

 private:
  struct Field {
    std::string key, json, text;
    bool scalar;
  };
  Record& put(const std::string& key, std::string json, std::string text, bool scalar) {
    fields_.push_back({key, std::move(json), std::move(text), scalar});
    return *this;
  }
  std::vector<Field> fields_;
};

std::string complex_json(cplx z) { return "[" + num(z.real()) + ", " + num(z.imag()) + "]"; }

struct Failure {
  int exit;
  std::string code;
  std::string message;
};

void emit(const Record& r, const OutputConfig& out) {
  const std::string text = out.format == "csv" ? r.csv() : r.json() + "\n";
  if (out.path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(out.path, std::ios::binary);
  if (!f) throw Failure{kUsage, "IoError", "cannot write '" + out.path + "'"};
  f << text;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Failure{kUsage, "IoError", "cannot write '" + path + "'"};
  return f;
}

std::string csv_line(std::initializer_list<double> xs) {
  std::string s;
  for (double x : xs) s += (s.empty() ? "" : ",") + num(x);
  return s + "\n";
}

// ---------------------------------------------------------------------------
// Options shared by the subcommands; flags override the config file.

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> strike, maturity, valuation_time, v, lambda;
  std::optional<double> phi_R_fraction;
  std::optional<long> paths;
  double phi = 0.05, phi_im = 0.0, psi = 0.2, psi_im = 0.0;
  std::optional<double> transform_terminal;
  std::string target = "charfn";
  std::vector<double> times;
  std::string dump_integrand, trajectory, line, per_path;
  double line_max = 50.0;
  int line_points = 101;
  std::optional<std::string> output;
};

RunConfig load(const Options& o) {
  RunConfig c = load_config(o.config_path);
  if (o.seed) c.sim.seed = *o.seed;
  const unsigned threads = o.threads.value_or(0);
  c.sim.threads = threads;
  c.pricing.threads = threads;
  if (o.paths) {
    if (*o.paths < 1) throw ConfigError("--paths must be >= 1");
    c.sim.n_paths = *o.paths;
  }
  if (o.strike) c.pricing.K = *o.strike;
  if (o.maturity) c.pricing.T_mat = *o.maturity;
  if (o.valuation_time) c.pricing.t = *o.valuation_time;
  if (o.v) c.pricing.v_t = *o.v;
  if (o.lambda) c.pricing.lambda_t = *o.lambda;
  if (o.phi_R_fraction) c.pricing.quadrature.phi_R_fraction = *o.phi_R_fraction;
  if (o.output) c.output.path = *o.output;
  return c;
}

std::string flags_json(const AdmissibilityReport& rep) {
  std::string s = "[";
  for (std::size_t i = 0; i < rep.flags.size(); ++i) {
    const auto& f = rep.flags[i];
    s += "\n    {\"name\": " + quote(f.name) + ", \"passed\": " + (f.passed ? "true" : "false") +
         ", \"detail\": " + quote(f.detail) + "}";
    if (i + 1 < rep.flags.size()) s += ",";
  }
  return s + (rep.flags.empty() ? "]" : "\n  ]");
}

// ---------------------------------------------------------------------------
// Commands

int cmd_validate(const Options& o) {
  const auto c = load(o);
  const auto rep = assess(c.model, c.jump, c.assumption);
  bool shift_ok = false;
  std::string shift_msg;
  if (rep.admissible()) {
    try {
      check_shift(c.model, c.shift_a, rep);
      shift_ok = true;
    } catch (const Error& e) {
      shift_msg = e.what();
    }
  }
  Record r;
  r.add("admissible", rep.admissible() && shift_ok)
      .add("c_l", rep.c_l)
      .add("L_J", rep.L_J)
      .add("a_max", rep.a_max)
      .add("shift_a", c.shift_a)
      .add("shift_ok", shift_ok)
      .add("Q1", rep.Q1)
      .add("Q2", rep.Q2)
      .add("Q2_bound", rep.Q2_bound)
      .add("eps1", rep.eps1)
      .add("eps2", rep.eps2);
  if (!shift_msg.empty()) r.add("shift_error", shift_msg);
  r.raw("flags", flags_json(rep));
  emit(r, c.output);
  return rep.admissible() && shift_ok ? kOk : kDomain;
}

PricingContext context(const RunConfig& c) { return PricingContext::build(c.model, c.jump, c.shift_a, c.assumption); }

void dump_integrand_csv(const std::string& path, const PricingContext& ctx, const PricingRequest& req,
                        double phi_max, int points) {
  if (points < 2) throw Failure{kUsage, "InvalidArgument", "--points must be >= 2"};
  const double phi_R = choose_phi_R(ctx.coeffs, ctx.shift, ctx.params, ctx.L_J, req.quadrature.phi_R_fraction);
  const PricingIntegrand f(ctx, req, phi_R);
  std::ostringstream out;
  out << "phi_I,integrand\n";
  for (int i = 0; i < points; ++i) {
    const double x = phi_max * i / (points - 1);
    out << csv_line({x, f(x)});
  }
  if (path == "-") {
    std::cout << out.str();
  } else {
    open_csv(path) << out.str();
  }
}

int cmd_price(const Options& o) {
  const auto c = load(o);
  const auto ctx = context(c);
  const auto res = price_call(c.pricing, ctx);
  if (!o.dump_integrand.empty()) {
    dump_integrand_csv(o.dump_integrand, ctx, c.pricing, o.line_max, o.line_points);
  }
  Record r;
  r.add("price", res.price)
      .add("phi_R", res.phi_R)
      .add("nodes", res.nodes_used)
      .add("est_error", res.est_quad_error)
      .add("discount", res.discount)
      .add("truncation", res.truncation)
      .add("K", c.pricing.K)
      .add("T_mat", c.pricing.T_mat)
      .add("t", c.pricing.t)
      .add("v_t", c.pricing.v_t)
      .add("lambda_t", c.pricing.lambda_t);
  emit(r, c.output);
  return kOk;
}

int cmd_dump_integrand(const Options& o) {
  const auto c = load(o);
  const auto ctx = context(c);
  dump_integrand_csv(o.output.value_or("-"), ctx, c.pricing, o.line_max, o.line_points);
  return kOk;
}

int cmd_charfn(const Options& o) {
  const auto c = load(o);
  const auto ctx = context(c);
  const cplx phi(o.phi, o.phi_im), psi(o.psi, o.psi_im);
  const double T = o.transform_terminal.value_or(c.model.T);
  const double t = c.pricing.t;
  const auto m = ctx.riccati();
  const auto sol = make_char_fn(m, phi, psi, T, {t});
  const cplx f = char_fn(sol, t, c.pricing.v_t, c.pricing.lambda_t);
  const auto verdict = domain_check(m, phi, psi);

  if (!o.trajectory.empty()) {
    auto out = open_csv(o.trajectory);
    out << "t,re_G,im_G,re_H,im_H,re_F,im_F\n";
    const auto& ode = *sol.ode;
    for (std::size_t i = 0; i < ode.size(); ++i) {
      out << csv_line({ode.grid[i], ode.G_vals[i].real(), ode.G_vals[i].imag(), ode.H_vals[i].real(),
                       ode.H_vals[i].imag(), ode.F_vals[i].real(), ode.F_vals[i].imag()});
    }
  }
  if (!o.line.empty()) {
    // Transform along the pricing line (A phi, B phi), phi = phi_R + i phi_I.
    if (o.line_points < 2) throw Failure{kUsage, "InvalidArgument", "--points must be >= 2"};
    const double phi_R =
        choose_phi_R(ctx.coeffs, ctx.shift, ctx.params, ctx.L_J, c.pricing.quadrature.phi_R_fraction);
    CharFnCache cache(m, T, {t});
    std::vector<std::pair<cplx, cplx>> args;
    std::vector<double> xs;
    for (int i = 0; i < o.line_points; ++i) {
      const double x = o.line_max * i / (o.line_points - 1);
      const cplx z(phi_R, x);
      xs.push_back(x);
      args.emplace_back(ctx.coeffs.A * z, ctx.coeffs.B * z);
    }
    const auto vals = char_fn_batch(cache, t, c.pricing.v_t, c.pricing.lambda_t, args);
    auto out = open_csv(o.line);
    out << "phi_I,re_f,im_f\n";
    for (std::size_t i = 0; i < vals.size(); ++i) out << csv_line({xs[i], vals[i].real(), vals[i].imag()});
  }

  Record r;
  r.add("re", f.real())
      .add("im", f.imag())
      .add("abs", std::abs(f))
      .raw("phi", complex_json(phi))
      .raw("psi", complex_json(psi))
      .add("t", t)
      .add("T", T)
      .add("v", c.pricing.v_t)
      .add("lambda", c.pricing.lambda_t)
      .add("binding_constraint", verdict.binding)
      .add("slack", verdict.slack)
      .add("ode_knots", static_cast<long>(sol.ode->size()));
  emit(r, c.output);
  return kOk;
}

int cmd_vix(const Options& o) {
  const auto c = load(o);
  const auto ctx = context(c);
  const auto& k = ctx.coeffs;
  Record r;
  r.add("A", k.A).add("B", k.B).add("C", k.C).add("C1", k.C1).add("C2", k.C2).add("C3", k.C3).add("delta", k.delta);
  r.add("vix", vix_value(k, c.pricing.v_t, c.pricing.lambda_t))
      .add("v", c.pricing.v_t)
      .add("lambda", c.pricing.lambda_t);
  emit(r, c.output);
  return kOk;
}

int cmd_simulate(const Options& o) {
  const auto c = load(o);
  const auto ctx = context(c);
  const SimModel sm{ctx.params, ctx.shift, ctx.jump};
  auto z_of = [](double diff, double se) { return se > 0.0 ? std::abs(diff) / se : (diff == 0.0 ? 0.0 : INFINITY); };

  Record r;
  r.add("target", o.target).add("n_paths", c.sim.n_paths).add("seed", c.sim.seed);
  r.add("cir_scheme", c.sim.cir_scheme == CirScheme::Exact ? "exact" : "euler");
  double horizon = c.model.T;

  if (o.target == "charfn") {
    const cplx phi(o.phi, o.phi_im), psi(o.psi, o.psi_im);
    horizon = o.transform_terminal.value_or(c.model.T);
    const auto mc = mc_char_fn(c.sim, sm, phi, psi, horizon);
    const cplx an = char_fn(make_char_fn(ctx.riccati(), phi, psi, horizon), 0.0, c.model.v0, c.model.lambda0);
    const double z = std::max(z_of(an.real() - mc.mean.real(), mc.se_re), z_of(an.imag() - mc.mean.imag(), mc.se_im));
    r.raw("phi", complex_json(phi)).raw("psi", complex_json(psi)).add("T", horizon);
    r.add("estimate_re", mc.mean.real())
        .add("estimate_im", mc.mean.imag())
        .add("se_re", mc.se_re)
        .add("se_im", mc.se_im)
        .add("analytic_re", an.real())
        .add("analytic_im", an.imag())
        .add("z_score", z);
  } else if (o.target == "price") {
    if (c.pricing.t != 0.0) throw Failure{kUsage, "InvalidArgument", "simulate --target price needs t = 0"};
    horizon = c.pricing.T_mat;
    PricingRequest req = c.pricing;
    req.v_t = c.model.v0;
    req.lambda_t = c.model.lambda0;
    const auto mc = mc_vix_price(c.sim, sm, ctx.coeffs, req.K, req.T_mat);
    const auto an = price_call(req, ctx);
    r.add("K", req.K).add("T_mat", req.T_mat);
    r.add("estimate", mc.mean).add("se", mc.se).add("analytic", an.price).add("z_score", z_of(an.price - mc.mean, mc.se));
  } else if (o.target == "forward-variance") {
    std::vector<double> times = o.times.empty() ? std::vector<double>{c.pricing.T_mat} : o.times;
    for (double t : times) {
      if (!(t > 0.0 && t <= c.model.T)) throw Failure{kUsage, "InvalidArgument", "--time must lie in (0, T]"};
    }
    horizon = *std::max_element(times.begin(), times.end());
    const auto mc = mc_forward_variance(c.sim, sm, times);
    std::string arr = "[";
    double zmax = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double an = forward_variance(ctx.shift, ctx.params, ctx.jump.mean(), 0.0, times[i], c.model.v0,
                                         c.model.lambda0);
      const double z = z_of(an - mc[i].mean, mc[i].se);
      zmax = std::max(zmax, z);
      arr += "\n    {\"t\": " + num(times[i]) + ", \"estimate\": " + num(mc[i].mean) + ", \"se\": " + num(mc[i].se) +
             ", \"analytic\": " + num(an) + ", \"z_score\": " + num(z) + "}";
      arr += i + 1 < times.size() ? "," : "\n  ";
    }
    arr += "]";
    if (times.size() == 1) {
      r.add("estimate", mc[0].mean).add("se", mc[0].se);
    }
    r.raw("points", arr).add("z_score", zmax);
  } else {
    throw Failure{kUsage, "InvalidArgument", "--target must be charfn|price|forward-variance"};
  }

  if (!o.per_path.empty()) {
    auto out = open_csv(o.per_path);
    out << "path_id,v_T,lambda_T,n_events\n";
    for (long i = 0; i < c.sim.n_paths; ++i) {
      auto rng = path_stream(c.sim.seed, static_cast<std::uint64_t>(i));
      const auto s = simulate_path(sm, horizon, {}, rng, c.sim);
      out << i << "," << num(s.v_T) << "," << num(s.lambda_T) << "," << s.events.size() << "\n";
    }
  }
  emit(r, c.output);
  return kOk;
}

void report(const Failure& f) {
  Record r;
  r.add("error", f.code).add("message", f.message);
  std::cerr << r.json() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heston-Hawkes VIX option pricer"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON configuration file")->required();
    sub->add_option("--seed", o.seed, "Monte Carlo seed (overrides sim.seed)");
    sub->add_option("--threads", o.threads, "worker threads, 0 = all cores (results do not depend on it)");
    sub->add_option("--output", o.output, "write the result to this path instead of stdout");
  };
  auto state = [&](CLI::App* sub) {
    sub->add_option("--valuation-time", o.valuation_time, "valuation time t");
    sub->add_option("--v", o.v, "current variance v_t");
    sub->add_option("--lambda", o.lambda, "current intensity lambda_t");
  };
  auto contract = [&](CLI::App* sub) {
    sub->add_option("--strike", o.strike, "strike in VIX points");
    sub->add_option("--maturity", o.maturity, "option maturity T_mat");
    sub->add_option("--phi-r-fraction", o.phi_R_fraction, "fraction of the admissible phi_R bound");
  };
  auto transform = [&](CLI::App* sub) {
    sub->add_option("--phi", o.phi, "Re(phi)");
    sub->add_option("--phi-im", o.phi_im, "Im(phi)");
    sub->add_option("--psi", o.psi, "Re(psi)");
    sub->add_option("--psi-im", o.psi_im, "Im(psi)");
    sub->add_option("--terminal", o.transform_terminal, "terminal time of the transform (default: model T)");
  };
  auto line = [&](CLI::App* sub) {
    sub->add_option("--phi-max", o.line_max, "largest phi_I on the dumped line");
    sub->add_option("--points", o.line_points, "number of points on the dumped line");
  };

  auto* validate = app.add_subcommand("validate", "admissibility report");
  common(validate);

  auto* price = app.add_subcommand("price", "semi-analytic VIX call price");
  common(price);
  state(price);
  contract(price);
  line(price);
  price->add_option("--dump-integrand", o.dump_integrand, "CSV of (phi_I, integrand) along the pricing line");

  auto* charfn = app.add_subcommand("charfn", "joint transform of (v_T, lambda_T)");
  common(charfn);
  state(charfn);
  transform(charfn);
  line(charfn);
  charfn->add_option("--trajectory", o.trajectory, "CSV of the (G, H, F) trajectories");
  charfn->add_option("--line", o.line, "CSV of the transform along the pricing line");
  charfn->add_option("--phi-r-fraction", o.phi_R_fraction, "fraction of the admissible phi_R bound");

  auto* vix = app.add_subcommand("vix", "VIX^2 loadings");
  common(vix);
  state(vix);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate with its analytic counterpart");
  common(simulate);
  contract(simulate);
  transform(simulate);
  simulate->add_option("--target", o.target, "charfn | price | forward-variance")
      ->check(CLI::IsMember({"charfn", "price", "forward-variance"}));
  simulate->add_option("--time", o.times, "forward-variance times");
  simulate->add_option("--paths", o.paths, "number of paths (overrides sim.n_paths)");
  simulate->add_option("--per-path", o.per_path, "CSV of per-path (v_T, lambda_T, n_events)");

  auto* dump = app.add_subcommand("dump-integrand", "CSV of the pricing integrand");
  common(dump);
  state(dump);
  contract(dump);
  line(dump);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*price) return cmd_price(o);
    if (*charfn) return cmd_charfn(o);
    if (*vix) return cmd_vix(o);
    if (*simulate) return cmd_simulate(o);
    if (*dump) return cmd_dump_integrand(o);
  } catch (const Failure& f) {
    report(f);
    return f.exit;
  } catch (const ConfigError& e) {
    report({kUsage, "ConfigError", e.what()});
    return kUsage;
  } catch (const Error& e) {
    const int code = is_numerical(e.code()) ? kNumerical : kDomain;
    report({code, std::string(to_string(e.code())), e.what()});
    return code;
  } catch (const std::exception& e) {
    report({kNumerical, "Internal", e.what()});
    return kNumerical;
  }
  return kUsage;
}
