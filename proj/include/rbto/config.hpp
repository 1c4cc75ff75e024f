#pragma once
// Run configuration: a single JSON object overlaid on per-problem defaults.
// Unknown keys and ill-typed values are rejected with the offending path.

#include "rbto/error.hpp"
#include "rbto/fem/beam.hpp"
#include "rbto/optimizer.hpp"
#include "rbto/reliability.hpp"
#include "rbto/truss.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace rbto {

using Json = nlohmann::json;

enum class ProblemKind { Truss, Beam, LBeam };

inline const char* to_string(ProblemKind p) {
  switch (p) {
    case ProblemKind::Truss:
      return "truss";
    case ProblemKind::Beam:
      return "beam";
    case ProblemKind::LBeam:
      return "lbeam";
  }
  return "?";
}

struct RunConfig {
  ProblemKind problem = ProblemKind::Truss;
  OptimizerConfig opt;
  TrussSettings truss;
  fem::BeamSettings beam;
  /// Monte Carlo samples for the estimate of the final design.
  std::size_t posthoc_samples = 1000000;
  /// Fixed design for `estimate`: explicit values, a uniform fill, or a file.
  std::vector<double> design;
  std::optional<double> design_fill;
  std::string design_file;
  std::string output = "out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline RunConfig default_config(ProblemKind problem) {
  RunConfig c;
  c.problem = problem;
  OptimizerConfig& o = c.opt;
  if (problem == ProblemKind::Truss) {
    o.eta = 1e-5;
    o.batch_size = 1;
    o.refresh_interval = 100;
    o.kappa_F = 2500.0;
    o.iterations = 10000;
    o.alpha0 = o.beta0 = 0.01;
    o.eta_F = 0.2;
    o.estimator.method = EstimatorMethod::Hybrid;
    o.estimator.mc_samples = 1000000;
    o.estimator.subset = {500, 0.1, 1.0, 20};
    o.estimator.hybrid = {2.5, 1000000, 100, 4};
    c.posthoc_samples = 1000000;
  } else {
    c.beam = problem == ProblemKind::Beam ? fem::BeamSettings::beam() : fem::BeamSettings::lbeam();
    o.eta = problem == ProblemKind::Beam ? 0.02 : 0.035;
    o.batch_size = problem == ProblemKind::Beam ? 8 : 4;
    o.refresh_interval = 25;
    o.kappa_F = 1e5;
    o.iterations = 5000;
    o.alpha0 = o.beta0 = 1e-5;
    o.eta_F = 1e-5;
    o.estimator.method = EstimatorMethod::Hybrid;
    o.estimator.mc_samples = 10000;
    o.estimator.subset = {problem == ProblemKind::Beam ? std::size_t{1000} : std::size_t{2000}, 0.2, 1.0, 20};
    o.estimator.hybrid = {25.0, 50000, 100, 4};
    c.posthoc_samples = 100000;
  }
  o.p_a = 1e-3;
  o.mode = RunMode::Rbto;
  o.seed = 1;
  return c;
}

namespace detail {

// Reads the members of one JSON object, remembering which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "configuration must be a JSON object" : "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const Json* take(const char* key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void number(const char* key, double& out) {
    if (const Json* v = take(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(key, "expected a finite number");
    }
  }

  template <class Int>
  void integer(const char* key, Int& out) {
    if (const Json* v = take(key)) {
      if (!v->is_number()) fail(key, "expected an integer");
      if (v->is_number_unsigned()) {
        const auto u = v->get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) fail(key, "integer out of range");
        out = static_cast<Int>(u);
      } else if (v->is_number_integer()) {
        const auto i = v->get<std::int64_t>();
        if (i < 0 && !std::numeric_limits<Int>::is_signed) fail(key, "expected a nonnegative integer");
        out = static_cast<Int>(i);
      } else {
        const double d = v->get<double>();
        if (d != std::floor(d) || d < static_cast<double>(std::numeric_limits<Int>::lowest()) ||
            d > static_cast<double>(std::numeric_limits<Int>::max()))
          fail(key, "expected an integer");
        out = static_cast<Int>(d);
      }
    }
  }

  void boolean(const char* key, bool& out) {
    if (const Json* v = take(key)) {
      if (!v->is_boolean()) fail(key, "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const char* key, std::string& out) {
    if (const Json* v = take(key)) {
      if (!v->is_string()) fail(key, "expected a string");
      out = v->get<std::string>();
    }
  }

  template <class Enum>
  void choice(const char* key, Enum& out, std::initializer_list<std::pair<const char*, Enum>> options) {
    if (const Json* v = take(key)) {
      if (!v->is_string()) fail(key, "expected a string");
      const std::string s = v->get<std::string>();
      for (const auto& [name, value] : options)
        if (s == name) {
          out = value;
          return;
        }
      std::string allowed;
      for (const auto& [name, value] : options) allowed += std::string(allowed.empty() ? "" : ", ") + name;
      fail(key, "unknown value '" + s + "' (expected one of: " + allowed + ")");
    }
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (const Json* v = take(key)) {
      if (!v->is_array()) fail(key, "expected an array of numbers");
      out.clear();
      for (const Json& e : *v) {
        if (!e.is_number()) fail(key, "expected an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }

  ObjectReader child(const char* key) {
    const Json* v = take(key);
    return ObjectReader(v ? *v : empty(), join(key));
  }

  /// Rejects any key that was not read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + join(it.key().c_str()) + "'");
  }

  [[noreturn]] void fail(const char* key, const std::string& msg) const {
    throw ConfigError("field '" + join(key) + "': " + msg);
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(path_.empty() ? msg : "field '" + path_ + "': " + msg);
  }

 private:
  static const Json& empty() {
    static const Json e = Json::object();
    return e;
  }
  std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

inline RunConfig config_from_json(const Json& j) {
  detail::ObjectReader root(j, "");
  if (!root.has("problem")) throw ConfigError("field 'problem' is required (truss, beam or lbeam)");
  ProblemKind problem = ProblemKind::Truss;
  root.choice("problem", problem,
              {{"truss", ProblemKind::Truss}, {"beam", ProblemKind::Beam}, {"lbeam", ProblemKind::LBeam}});
  RunConfig c = default_config(problem);
  OptimizerConfig& o = c.opt;

  root.choice("mode", o.mode, {{"rbto", RunMode::Rbto}, {"robust", RunMode::Robust}});
  root.integer("seed", o.seed);
  root.integer("iterations", o.iterations);
  root.number("eta", o.eta);
  root.integer("batch_size", o.batch_size);
  root.integer("refresh_interval", o.refresh_interval);
  root.number("kappa_F", o.kappa_F);
  root.numbers("kappa_C", o.kappa_C);
  root.number("p_a", o.p_a);
  root.boolean("refresh_at_start", o.refresh_at_start);
  root.number("alpha0", o.alpha0);
  root.number("beta0", o.beta0);
  root.number("eta_F", o.eta_F);
  root.integer("posthoc_samples", c.posthoc_samples);
  root.string("output", c.output);
  root.string("design_file", c.design_file);

  if (const Json* d = root.take("design")) {
    if (d->is_number()) {
      c.design_fill = d->get<double>();
    } else if (d->is_array()) {
      for (const Json& e : *d) {
        if (!e.is_number()) root.fail("design", "expected a number or an array of numbers");
        c.design.push_back(e.get<double>());
      }
    } else {
      root.fail("design", "expected a number or an array of numbers");
    }
  }

  {
    detail::ObjectReader est = root.child("estimator");
    EstimatorConfig& e = o.estimator;
    est.choice("method", e.method,
               {{"mc", EstimatorMethod::MC}, {"subset", EstimatorMethod::Subset}, {"hybrid", EstimatorMethod::Hybrid}});
    est.integer("mc_samples", e.mc_samples);
    detail::ObjectReader sub = est.child("subset");
    sub.integer("N", e.subset.N);
    sub.number("p0", e.subset.p0);
    sub.number("proposal_std", e.subset.proposal_std);
    sub.integer("max_levels", e.subset.max_levels);
    sub.finish();
    detail::ObjectReader hyb = est.child("hybrid");
    hyb.number("gamma", e.hybrid.gamma);
    hyb.integer("N", e.hybrid.N);
    hyb.integer("n_fit", e.hybrid.n_fit);
    hyb.integer("pce_order", e.hybrid.pce_order);
    hyb.finish();
    est.finish();
  }

  if (problem == ProblemKind::Truss) {
    if (root.has("beam")) throw ConfigError("unknown key 'beam' for problem 'truss'");
    detail::ObjectReader t = root.child("truss");
    t.number("c0", c.truss.c0);
    t.number("P", c.truss.P);
    t.number("lambda0", c.truss.lambda0);
    t.number("delta0", c.truss.delta0);
    t.finish();
  } else {
    if (root.has("truss")) throw ConfigError(std::string("unknown key 'truss' for problem '") + to_string(problem) + "'");
    detail::ObjectReader b = root.child("beam");
    fem::BeamSettings& s = c.beam;
    if (problem == ProblemKind::Beam) {
      b.integer("nx", s.nx);
      b.integer("ny", s.ny);
    } else {
      b.integer("n", s.n);
    }
    b.number("C_max", s.C_max);
    b.number("tau", s.tau);
    b.number("P0", s.P0);
    b.number("load_cv", s.load_cv);
    b.number("E0_mean", s.E0_mean);
    b.number("E0_std", s.E0_std);
    b.number("theta_min", s.theta_min);
    b.number("theta0", s.theta0);
    b.number("nu", s.nu);
    b.number("penal", s.penal);
    b.number("filter_radius", s.filter_radius);
    b.finish();
  }
  root.finish();

  o.validate(0);
  if (o.estimator.method == EstimatorMethod::Subset) o.estimator.subset.validate();
  if (o.estimator.method == EstimatorMethod::MC && o.estimator.mc_samples < 1)
    throw ConfigError("field 'estimator.mc_samples': must be at least 1");
  if (c.posthoc_samples < 1) throw ConfigError("field 'posthoc_samples': must be at least 1");
  return c;
}

inline Json config_to_json(const RunConfig& c) {
  const OptimizerConfig& o = c.opt;
  Json j;
  j["problem"] = to_string(c.problem);
  j["mode"] = to_string(o.mode);
  j["seed"] = o.seed;
  j["iterations"] = o.iterations;
  j["eta"] = o.eta;
  j["batch_size"] = o.batch_size;
  j["refresh_interval"] = o.refresh_interval;
  j["kappa_F"] = o.kappa_F;
  j["kappa_C"] = o.kappa_C;
  j["p_a"] = o.p_a;
  j["refresh_at_start"] = o.refresh_at_start;
  j["alpha0"] = o.alpha0;
  j["beta0"] = o.beta0;
  j["eta_F"] = o.eta_F;
  j["posthoc_samples"] = c.posthoc_samples;
  j["output"] = c.output;
  if (!c.design_file.empty()) j["design_file"] = c.design_file;
  if (c.design_fill)
    j["design"] = *c.design_fill;
  else if (!c.design.empty())
    j["design"] = c.design;

  const EstimatorConfig& e = o.estimator;
  j["estimator"] = {{"method", to_string(e.method)},
                    {"mc_samples", e.mc_samples},
                    {"subset",
                     {{"N", e.subset.N},
                      {"p0", e.subset.p0},
                      {"proposal_std", e.subset.proposal_std},
                      {"max_levels", e.subset.max_levels}}},
                    {"hybrid",
                     {{"gamma", e.hybrid.gamma},
                      {"N", e.hybrid.N},
                      {"n_fit", e.hybrid.n_fit},
                      {"pce_order", e.hybrid.pce_order}}}};

  if (c.problem == ProblemKind::Truss) {
    j["truss"] = {{"c0", c.truss.c0}, {"P", c.truss.P}, {"lambda0", c.truss.lambda0}, {"delta0", c.truss.delta0}};
  } else {
    const fem::BeamSettings& s = c.beam;
    Json b = {{"C_max", s.C_max},         {"tau", s.tau},         {"P0", s.P0},
              {"load_cv", s.load_cv},     {"E0_mean", s.E0_mean}, {"E0_std", s.E0_std},
              {"theta_min", s.theta_min}, {"theta0", s.theta0},   {"nu", s.nu},
              {"penal", s.penal},         {"filter_radius", s.filter_radius}};
    if (c.problem == ProblemKind::Beam) {
      b["nx"] = s.nx;
      b["ny"] = s.ny;
    } else {
      b["n"] = s.n;
    }
    j["beam"] = b;
  }
  return j;
}

inline RunConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("invalid JSON at " + detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
  return config_from_json(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace rbto
