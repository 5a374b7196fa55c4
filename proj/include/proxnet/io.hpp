#pragma once

// Experiment configuration documents (JSON), trace CSV and run summaries.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "proxnet/bench.hpp"
#include "proxnet/consensus.hpp"
#include "proxnet/scenario.hpp"

namespace proxnet {

using json = nlohmann::ordered_json;

struct NetworkConfig {
  std::string kind = "complete_uniform";  // complete_uniform | ring_alternating_pairs | explicit_periodic
  std::size_t m = 0;
  std::optional<double> eta;
  std::optional<std::size_t> T;
  std::vector<WeightMatrix> matrices;
  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct ScenarioBlock {
  std::size_t m = 1;
  std::vector<std::uint64_t> samples;  // one entry per agent, or a single shared count
  double beta = 1e-5;
  std::vector<double> beta_split;      // empty: beta / m each
  std::uint64_t d = 0;
  std::string mode = "private";        // common | private
  std::string method = "all";          // common | common_improved | naive | tight | all
  friend bool operator==(const ScenarioBlock&, const ScenarioBlock&) = default;

  ScenarioConfig resolve() const {
    ScenarioConfig c;
    c.d = d;
    c.samples = samples.size() == 1 ? std::vector<std::uint64_t>(m, samples.front()) : samples;
    if (beta_split.empty()) {
      c.betas.assign(c.samples.size(), beta / static_cast<double>(c.samples.size()));
    } else {
      c.betas = beta_split;
    }
    return c;
  }
};

struct OutputConfig {
  std::string trace_csv;
  std::string summary_json;
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ExperimentConfig {
  std::optional<ProblemSpec> problem;
  std::optional<RegressionConfig> benchmark;
  NetworkConfig network;
  StepSchedule steps = StepSchedule::harmonic(1.0);
  RunConfig run;
  std::optional<ScenarioBlock> scenario;
  OutputConfig output;
  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.problem == b.problem && a.benchmark == b.benchmark && a.network == b.network &&
           a.steps == b.steps && a.scenario == b.scenario && a.output == b.output &&
           a.run.max_iterations == b.run.max_iterations &&
           a.run.iterate_tolerance == b.run.iterate_tolerance &&
           a.run.termination_window == b.run.termination_window &&
           a.run.inner_tolerance == b.run.inner_tolerance &&
           a.run.max_inner_iterations == b.run.max_inner_iterations &&
           a.run.trace == b.run.trace && a.run.parallelism == b.run.parallelism &&
           a.run.allow_invalid == b.run.allow_invalid && a.run.diagnostics == b.run.diagnostics &&
           a.run.connectivity_horizon == b.run.connectivity_horizon;
  }
};

// ---------------------------------------------------------------------------
// reading

namespace detail {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_ + ": " + msg); }

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Reader at(const char* key) const {
    if (!j_.is_object()) fail("expected an object");
    if (!j_.contains(key)) fail(std::string("missing field '") + key + "'");
    return Reader(j_.at(key), path_ + "." + key);
  }

  Reader at(std::size_t i) const { return Reader(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }

  std::size_t count() const {
    if (!j_.is_number_integer() || j_.get<long long>() < 0) fail("expected a nonnegative integer");
    return j_.get<std::size_t>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }

  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  Vector vector() const {
    Vector out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).number();
    return out;
  }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).count();
    return out;
  }

  void only(std::initializer_list<const char*> keys) const {
    if (!j_.is_object()) fail("expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool ok = false;
      for (const char* k : keys) ok = ok || it.key() == k;
      if (!ok) fail("unknown field '" + it.key() + "'");
    }
  }

  // Library validation errors become config errors with this path.
  template <typename Fn>
  auto guard(Fn&& fn) const -> decltype(fn()) {
    try {
      return fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail(e.what());
    }
  }

 private:
  const json& j_;
  std::string path_;
};

inline ConvexSet read_set(const Reader& r) {
  const std::string type = r.at("type").string();
  if (type == "box") {
    r.only({"type", "lower", "upper"});
    return r.guard([&] { return ConvexSet::box(r.at("lower").vector(), r.at("upper").vector()); });
  }
  if (type == "halfspace") {
    r.only({"type", "normal", "offset"});
    return r.guard(
        [&] { return ConvexSet::halfspace(r.at("normal").vector(), r.at("offset").number()); });
  }
  if (type == "ball") {
    r.only({"type", "center", "radius", "coords", "dimension"});
    if (r.has("coords")) {
      return r.guard([&] {
        return ConvexSet::ball_on(r.at("center").vector(), r.at("radius").number(),
                                  r.at("coords").indices(), r.at("dimension").count());
      });
    }
    return r.guard([&] { return ConvexSet::ball(r.at("center").vector(), r.at("radius").number()); });
  }
  if (type == "intersection") {
    r.only({"type", "members"});
    const Reader m = r.at("members");
    std::vector<ConvexSet> members;
    for (std::size_t i = 0; i < m.size(); ++i) members.push_back(read_set(m.at(i)));
    return r.guard([&] { return ConvexSet::intersection(std::move(members)); });
  }
  r.at("type").fail("unknown set type '" + type + "'");
}

inline ObjectiveTerm read_objective(const Reader& r) {
  const std::string type = r.at("type").string();
  if (type == "linear") {
    r.only({"type", "g"});
    return r.guard([&] { return ObjectiveTerm::linear(r.at("g").vector()); });
  }
  if (type == "quadratic_diagonal") {
    r.only({"type", "h", "g", "constant"});
    const double c = r.has("constant") ? r.at("constant").number() : 0.0;
    return r.guard(
        [&] { return ObjectiveTerm::quadratic_diagonal(r.at("h").vector(), r.at("g").vector(), c); });
  }
  if (type == "l1") {
    r.only({"type", "dimension", "weight", "coordinate_weights"});
    Vector cw = r.has("coordinate_weights") ? r.at("coordinate_weights").vector() : Vector{};
    return r.guard([&] {
      return ObjectiveTerm::l1(r.at("dimension").count(), r.at("weight").number(), std::move(cw));
    });
  }
  if (type == "squared_residual") {
    r.only({"type", "a", "b"});
    return r.guard(
        [&] { return ObjectiveTerm::squared_residual(r.at("a").vector(), r.at("b").number()); });
  }
  if (type == "sum") {
    r.only({"type", "terms"});
    const Reader t = r.at("terms");
    std::vector<ObjectiveTerm> terms;
    for (std::size_t i = 0; i < t.size(); ++i) terms.push_back(read_objective(t.at(i)));
    return r.guard([&] { return ObjectiveTerm::sum(std::move(terms)); });
  }
  r.at("type").fail("unknown objective type '" + type + "'");
}

inline ProblemSpec read_problem(const Reader& r) {
  r.only({"dimension", "agents", "interior_point"});
  ProblemSpec p;
  p.dimension = r.at("dimension").count();
  const Reader agents = r.at("agents");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const Reader a = agents.at(i);
    a.only({"objective", "constraint", "initial", "shared_dim"});
    AgentSpec s;
    s.objective = read_objective(a.at("objective"));
    s.constraint = read_set(a.at("constraint"));
    if (a.has("initial")) s.initial = a.at("initial").vector();
    if (a.has("shared_dim")) s.split = PrivateBlock{a.at("shared_dim").count()};
    p.agents.push_back(std::move(s));
  }
  if (r.has("interior_point")) {
    const Reader ip = r.at("interior_point");
    ip.only({"center", "radius"});
    p.interior = InteriorPoint{ip.at("center").vector(), ip.at("radius").number()};
  }
  return p;
}

inline RegressionConfig read_benchmark(const Reader& r) {
  r.only({"m", "d", "lambda", "samples_per_agent", "box_half_width", "signal_components", "seeds",
          "validation_samples", "beta", "alpha"});
  RegressionConfig c;
  if (r.has("m")) c.m = r.at("m").count();
  if (r.has("d")) c.d = r.at("d").count();
  if (r.has("lambda")) c.lambda = r.at("lambda").number();
  if (r.has("samples_per_agent")) c.samples_per_agent = r.at("samples_per_agent").count();
  if (r.has("box_half_width")) c.box_half_width = r.at("box_half_width").number();
  if (r.has("signal_components")) c.signal_components = r.at("signal_components").count();
  if (r.has("validation_samples")) c.validation_samples = r.at("validation_samples").count();
  if (r.has("beta")) c.beta = r.at("beta").number();
  if (r.has("alpha")) c.alpha = r.at("alpha").number();
  if (r.has("seeds")) {
    const Reader s = r.at("seeds");
    s.only({"signal", "scenario", "validation"});
    if (s.has("signal")) c.seeds.signal = s.at("signal").count();
    if (s.has("scenario")) c.seeds.scenario = s.at("scenario").count();
    if (s.has("validation")) c.seeds.validation = s.at("validation").count();
  }
  r.guard([&] {
    c.validate();
    return 0;
  });
  return c;
}

inline NetworkConfig read_network(const Reader& r) {
  r.only({"kind", "m", "eta", "T", "matrices"});
  NetworkConfig n;
  n.kind = r.at("kind").string();
  if (r.has("m")) n.m = r.at("m").count();
  if (r.has("eta")) n.eta = r.at("eta").number();
  if (r.has("T")) n.T = r.at("T").count();
  if (r.has("matrices")) {
    const Reader ms = r.at("matrices");
    for (std::size_t k = 0; k < ms.size(); ++k) {
      const Reader rows = ms.at(k);
      std::vector<Vector> data;
      for (std::size_t i = 0; i < rows.size(); ++i) data.push_back(rows.at(i).vector());
      n.matrices.push_back(rows.guard([&] { return Matrix::from_rows(data); }));
    }
  }
  if (n.kind != "complete_uniform" && n.kind != "ring_alternating_pairs" &&
      n.kind != "explicit_periodic") {
    r.at("kind").fail("unknown network kind '" + n.kind + "'");
  }
  if (n.kind == "explicit_periodic" && n.matrices.empty()) r.fail("explicit_periodic needs matrices");
  return n;
}

inline StepSchedule read_steps(const Reader& r) {
  r.only({"family", "alpha", "values"});
  const std::string f = r.at("family").string();
  if (f == "harmonic") return r.guard([&] { return StepSchedule::harmonic(r.at("alpha").number()); });
  if (f == "explicit") return r.guard([&] { return StepSchedule::explicit_values(r.at("values").vector()); });
  r.at("family").fail("unknown step family '" + f + "'");
}

inline RunConfig read_run(const Reader& r) {
  r.only({"max_iterations", "iterate_tolerance", "termination_window", "inner_tolerance",
          "max_inner_iterations", "trace", "parallelism", "allow_invalid", "diagnostics",
          "connectivity_horizon"});
  RunConfig c;
  if (r.has("max_iterations")) c.max_iterations = r.at("max_iterations").count();
  if (r.has("iterate_tolerance")) c.iterate_tolerance = r.at("iterate_tolerance").number();
  if (r.has("termination_window")) c.termination_window = r.at("termination_window").count();
  if (r.has("inner_tolerance")) c.inner_tolerance = r.at("inner_tolerance").number();
  if (r.has("max_inner_iterations")) c.max_inner_iterations = r.at("max_inner_iterations").count();
  if (r.has("trace")) {
    const std::string t = r.at("trace").string();
    if (t == "full") c.trace = TraceLevel::full;
    else if (t == "none") c.trace = TraceLevel::none;
    else r.at("trace").fail("expected 'full' or 'none'");
  }
  if (r.has("parallelism")) c.parallelism = std::max<std::size_t>(1, r.at("parallelism").count());
  if (r.has("allow_invalid")) c.allow_invalid = r.at("allow_invalid").boolean();
  if (r.has("diagnostics")) c.diagnostics = r.at("diagnostics").boolean();
  if (r.has("connectivity_horizon")) c.connectivity_horizon = r.at("connectivity_horizon").count();
  if (!(c.iterate_tolerance > 0.0)) r.at("iterate_tolerance").fail("must be positive");
  if (!(c.inner_tolerance > 0.0)) r.at("inner_tolerance").fail("must be positive");
  return c;
}

inline ScenarioBlock read_scenario(const Reader& r) {
  r.only({"m", "samples", "samples_per_agent", "beta", "beta_split", "d", "mode", "method"});
  ScenarioBlock s;
  if (r.has("m")) s.m = r.at("m").count();
  if (r.has("samples")) {
    for (auto n : r.at("samples").indices()) s.samples.push_back(n);
    if (!r.has("m")) s.m = s.samples.size();
  } else {
    s.samples = {r.at("samples_per_agent").count()};
  }
  if (r.has("beta")) s.beta = r.at("beta").number();
  if (r.has("beta_split")) s.beta_split = r.at("beta_split").vector();
  s.d = r.at("d").count();
  if (r.has("mode")) s.mode = r.at("mode").string();
  if (r.has("method")) s.method = r.at("method").string();
  if (s.mode != "common" && s.mode != "private") r.at("mode").fail("expected 'common' or 'private'");
  static const char* methods[] = {"common", "common_improved", "naive", "tight", "all"};
  if (std::find(std::begin(methods), std::end(methods), s.method) == std::end(methods)) {
    r.at("method").fail("unknown method '" + s.method + "'");
  }
  if (s.samples.size() != 1 && s.samples.size() != s.m) r.fail("samples must have one entry per agent");
  r.guard([&] {
    s.resolve().validate();
    return 0;
  });
  return s;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j) {
  const detail::Reader r(j, "$");
  r.only({"problem", "benchmark", "network", "steps", "run", "scenario", "output"});
  ExperimentConfig c;
  if (r.has("problem") == r.has("benchmark") && (r.has("problem") || r.has("network"))) {
    r.fail("exactly one of 'problem' or 'benchmark' is required");
  }
  if (r.has("problem")) c.problem = detail::read_problem(r.at("problem"));
  if (r.has("benchmark")) c.benchmark = detail::read_benchmark(r.at("benchmark"));
  if (r.has("network")) c.network = detail::read_network(r.at("network"));
  if (r.has("steps")) c.steps = detail::read_steps(r.at("steps"));
  if (r.has("run")) c.run = detail::read_run(r.at("run"));
  if (r.has("scenario")) c.scenario = detail::read_scenario(r.at("scenario"));
  if (r.has("output")) {
    const detail::Reader o = r.at("output");
    o.only({"trace_csv", "summary_json"});
    if (o.has("trace_csv")) c.output.trace_csv = o.at("trace_csv").string();
    if (o.has("summary_json")) c.output.summary_json = o.at("summary_json").string();
  }
  if (c.problem && c.network.m == 0) c.network.m = c.problem->agents.size();
  if (c.benchmark && c.network.m == 0) c.network.m = c.benchmark->m;
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// writing

inline json to_json(const ConvexSet& s) {
  return std::visit(
      [&](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Box>) {
          return {{"type", "box"}, {"lower", v.lower}, {"upper", v.upper}};
        } else if constexpr (std::is_same_v<T, Halfspace>) {
          return {{"type", "halfspace"}, {"normal", v.normal}, {"offset", v.offset}};
        } else if constexpr (std::is_same_v<T, Ball>) {
          json j = {{"type", "ball"}, {"center", v.center}, {"radius", v.radius}};
          if (!v.coords.empty()) {
            j["coords"] = v.coords;
            j["dimension"] = s.dimension();
          }
          return j;
        } else {
          json members = json::array();
          for (const auto& m : v.members) members.push_back(to_json(m));
          return {{"type", "intersection"}, {"members", members}};
        }
      },
      s.variant());
}

inline json to_json(const ObjectiveTerm& f) {
  return std::visit(
      [&](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Linear>) {
          return {{"type", "linear"}, {"g", v.g}};
        } else if constexpr (std::is_same_v<T, QuadraticDiagonal>) {
          return {{"type", "quadratic_diagonal"}, {"h", v.h}, {"g", v.g}, {"constant", v.constant}};
        } else if constexpr (std::is_same_v<T, L1>) {
          json j = {{"type", "l1"}, {"dimension", f.dimension()}, {"weight", v.weight}};
          if (!v.coordinate_weights.empty()) j["coordinate_weights"] = v.coordinate_weights;
          return j;
        } else if constexpr (std::is_same_v<T, SquaredResidual>) {
          return {{"type", "squared_residual"}, {"a", v.a}, {"b", v.b}};
        } else {
          json terms = json::array();
          for (const auto& m : v.terms) terms.push_back(to_json(m));
          return {{"type", "sum"}, {"terms", terms}};
        }
      },
      f.variant());
}

inline json to_json(const ProblemSpec& p) {
  json agents = json::array();
  for (const auto& a : p.agents) {
    json j = {{"objective", to_json(a.objective)}, {"constraint", to_json(a.constraint)}};
    if (a.initial) j["initial"] = *a.initial;
    if (a.split) j["shared_dim"] = a.split->shared_dim;
    agents.push_back(j);
  }
  json j = {{"dimension", p.dimension}, {"agents", agents}};
  if (p.interior) j["interior_point"] = {{"center", p.interior->center}, {"radius", p.interior->radius}};
  return j;
}

inline json to_json(const RegressionConfig& c) {
  return {{"m", c.m},
          {"d", c.d},
          {"lambda", c.lambda},
          {"samples_per_agent", c.samples_per_agent},
          {"box_half_width", c.box_half_width},
          {"signal_components", c.signal_components},
          {"seeds", {{"signal", c.seeds.signal}, {"scenario", c.seeds.scenario},
                     {"validation", c.seeds.validation}}},
          {"validation_samples", c.validation_samples},
          {"beta", c.beta},
          {"alpha", c.alpha}};
}

inline json to_json(const NetworkConfig& n) {
  json j = {{"kind", n.kind}, {"m", n.m}};
  if (n.eta) j["eta"] = *n.eta;
  if (n.T) j["T"] = *n.T;
  if (!n.matrices.empty()) {
    json ms = json::array();
    for (const auto& a : n.matrices) ms.push_back(a.rows());
    j["matrices"] = ms;
  }
  return j;
}

inline json to_json(const StepSchedule& s) {
  if (s.family() == StepSchedule::Family::harmonic) return {{"family", "harmonic"}, {"alpha", s.alpha()}};
  return {{"family", "explicit"}, {"values", s.values()}};
}

/// `with_parallelism = false` leaves out the worker count, so artifacts do
/// not change when only the thread count does.
inline json to_json(const RunConfig& c, bool with_parallelism = true) {
  json j = {{"max_iterations", c.max_iterations},
            {"iterate_tolerance", c.iterate_tolerance}};
  if (c.termination_window) j["termination_window"] = *c.termination_window;
  j["inner_tolerance"] = c.inner_tolerance;
  j["max_inner_iterations"] = c.max_inner_iterations;
  j["trace"] = c.trace == TraceLevel::full ? "full" : "none";
  if (with_parallelism) j["parallelism"] = c.parallelism;
  j["allow_invalid"] = c.allow_invalid;
  j["diagnostics"] = c.diagnostics;
  j["connectivity_horizon"] = c.connectivity_horizon;
  return j;
}

inline json to_json(const ScenarioBlock& s) {
  json j = {{"m", s.m}, {"samples", s.samples}, {"beta", s.beta}};
  if (!s.beta_split.empty()) j["beta_split"] = s.beta_split;
  j["d"] = s.d;
  j["mode"] = s.mode;
  j["method"] = s.method;
  return j;
}

inline json to_json(const ExperimentConfig& c, bool with_parallelism = true) {
  json j = json::object();
  if (c.problem) j["problem"] = to_json(*c.problem);
  if (c.benchmark) j["benchmark"] = to_json(*c.benchmark);
  j["network"] = to_json(c.network);
  j["steps"] = to_json(c.steps);
  j["run"] = to_json(c.run, with_parallelism);
  if (c.scenario) j["scenario"] = to_json(*c.scenario);
  json out = json::object();
  if (!c.output.trace_csv.empty()) out["trace_csv"] = c.output.trace_csv;
  if (!c.output.summary_json.empty()) out["summary_json"] = c.output.summary_json;
  if (!out.empty()) j["output"] = out;
  return j;
}

inline json to_json(const EpsilonReport& r) {
  json j = {{"method", r.method}, {"value", r.value}, {"trivial", r.trivial}};
  if (!r.per_agent.empty()) j["per_agent"] = r.per_agent;
  if (!r.allocation.empty()) j["allocation"] = r.allocation;
  j["inputs"] = {{"samples", r.inputs.samples}, {"betas", r.inputs.betas}, {"d", r.inputs.d}};
  return j;
}

inline json to_json(const ViolationEstimate& v) {
  return {{"samples", v.samples}, {"violations", v.violations}, {"rate", v.rate},
          {"ci95", {v.lower, v.upper}}};
}

inline json to_json(const ConnectivityReport& r) {
  return {{"strongly_connected", r.strongly_connected},
          {"diameter", r.diameter},
          {"max_recurrence_gap", r.max_recurrence_gap},
          {"violations", r.violations}};
}

// ---------------------------------------------------------------------------
// schedules from config

inline NetworkSchedule make_schedule(const NetworkConfig& n) {
  if (n.kind == "complete_uniform") return make_complete_uniform(n.m);
  if (n.kind == "ring_alternating_pairs") return make_ring_alternating_pairs(n.m);
  if (n.kind == "explicit_periodic") return make_explicit_periodic(n.matrices, n.eta, n.T);
  throw ConfigError("unknown network kind '" + n.kind + "'");
}

// ---------------------------------------------------------------------------
// artifacts

inline json run_summary(const ExperimentConfig& cfg, const RunResult& r) {
  json j = json::object();
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["termination_window"] = r.termination_window;
  j["consensus_residual"] = r.consensus_residual;
  j["objective_at_v"] = r.objective_at_v;
  if (r.objective_at_v_bar) j["objective_at_v_bar"] = *r.objective_at_v_bar;
  j["v"] = r.v;
  if (r.v_bar) j["v_bar"] = *r.v_bar;
  j["x"] = r.x;
  j["cumulative_error_sq"] = r.cumulative_error_sq;
  j["validation_issues"] = r.validation_issues;
  j["config"] = to_json(cfg, false);
  return j;
}

inline json bench_summary(const ExperimentConfig& cfg, const BenchmarkSummary& s) {
  json j = json::object();
  j["converged"] = s.converged;
  j["iterations"] = s.iterations;
  j["consensus_residual"] = s.consensus_residual;
  j["worst_case_error"] = s.worst_case_error;
  j["objective_at_v"] = s.objective_at_v;
  j["max_own_violation"] = s.max_own_violation;
  j["epsilon_naive"] = to_json(s.naive);
  j["epsilon_tight"] = to_json(s.tight);
  j["violation"] = to_json(s.violation);
  if (s.oracle_objective) j["oracle_objective"] = *s.oracle_objective;
  if (s.oracle_gap) j["oracle_gap"] = *s.oracle_gap;
  j["v"] = s.v;
  j["config"] = to_json(cfg, false);
  return j;
}

/// k, agent, x_0..x_{n-1}, e_norm, consensus_residual, objective
inline void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  if (trace.records.empty()) return;
  const std::size_t n = trace.records.front().x.front().size();
  out << "k,agent";
  for (std::size_t t = 0; t < n; ++t) out << ",x_" << t;
  out << ",e_norm,consensus_residual,objective\n";
  out.precision(17);
  for (const auto& r : trace.records) {
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      out << r.k << ',' << i;
      for (double v : r.x[i]) out << ',' << v;
      out << ',';
      if (i < r.e_norms.size()) out << r.e_norms[i];
      out << ',' << r.consensus_residual << ',' << r.objectives[i] << '\n';
    }
  }
}

/// Relative paths are resolved against $PROXNET_OUTPUT_DIR when it is set.
inline std::filesystem::path output_path(const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative()) {
    if (const char* dir = std::getenv("PROXNET_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
      return std::filesystem::path(dir) / path;
    }
  }
  return path;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

}  // namespace proxnet
