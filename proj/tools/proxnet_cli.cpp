// proxnet command line: validate | run | bench | epsilon | samplesize | violation
//
// Exit codes: 0 ok, 1 validation failure, 2 no convergence, 3 I/O or schema error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "proxnet/proxnet.hpp"

namespace {

using namespace proxnet;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kNotConverged = 2;
constexpr int kIoError = 3;

void emit(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text(output_path(path), text);
  }
}

void emit_trace(const IterationTrace& trace, const std::string& path) {
  if (path.empty()) return;
  std::ostringstream ss;
  write_trace_csv(ss, trace);
  write_text(output_path(path), ss.str());
}

ScenarioConfig scenario_from_flags(std::size_t m, const std::vector<std::uint64_t>& samples,
                                   std::uint64_t per_agent, double beta, std::uint64_t d) {
  ScenarioBlock b;
  b.m = m;
  b.samples = samples.empty() ? std::vector<std::uint64_t>{per_agent} : samples;
  if (!samples.empty()) b.m = samples.size();
  b.beta = beta;
  b.d = d;
  ScenarioConfig c = b.resolve();
  c.validate();
  return c;
}

json epsilon_reports(const ScenarioConfig& sc, const std::string& method) {
  json out = json::array();
  auto add = [&](const std::string& name, auto&& fn) {
    if (method == "all" || method == name) out.push_back(to_json(fn()));
  };
  add("common", [&] { return epsilon_common_report(sc, false); });
  add("common_improved", [&] { return epsilon_common_report(sc, true); });
  add("naive", [&] { return epsilon_naive(sc); });
  add("tight", [&] { return epsilon_tight(sc); });
  if (out.empty()) throw ConfigError("unknown epsilon method '" + method + "'");
  return out.size() == 1 ? out.front() : out;
}

int print_issues(const std::vector<std::string>& issues) {
  for (const auto& s : issues) std::cerr << "invalid: " << s << "\n";
  return issues.empty() ? kOk : kInvalid;
}

RegressionConfig reduced_bench() {
  RegressionConfig c;
  c.d = 10;
  c.samples_per_agent = 300;
  c.validation_samples = 20000;
  return c;
}

RunConfig reduced_run() {
  RunConfig r;
  r.max_iterations = 500;
  r.iterate_tolerance = 3e-4;
  r.inner_tolerance = 1e-9;
  return r;
}

int do_bench(const ExperimentConfig& cfg, bool oracle, std::size_t workers,
             const std::string& summary, const std::string& trace) {
  BenchmarkOptions opt;
  opt.oracle = oracle;
  opt.workers = workers;
  RunConfig rc = cfg.run;
  if (trace.empty()) rc.trace = TraceLevel::none;
  const BenchmarkSummary s = run_benchmark(*cfg.benchmark, rc, opt);
  emit_trace(s.run.trace, trace);
  emit(bench_summary(cfg, s), summary);
  return s.converged ? kOk : kNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed proximal minimization over time-varying networks"};
  app.require_subcommand(1);

  std::string config_path, summary_path, trace_path, solution_path, method = "all", mode = "common";
  std::size_t parallelism = 0, workers = 1, m = 1;
  std::uint64_t per_agent = 0, d = 0, samples = 0, seed = 0;
  std::vector<std::uint64_t> sample_list;
  double beta = 1e-5, target = 0.1;
  bool allow_invalid = false, oracle = false, reduced = false;

  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("config", config_path, "experiment config (JSON)")->required();

  auto* run_cmd = app.add_subcommand("run", "run the distributed algorithm");
  run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
  run_cmd->add_option("--summary", summary_path, "summary JSON path (default: config output or stdout)");
  run_cmd->add_option("--trace", trace_path, "trace CSV path");
  run_cmd->add_option("--parallelism", parallelism, "worker threads for local solves");
  run_cmd->add_flag("--allow-invalid", allow_invalid, "run even if validation fails");

  auto* bench = app.add_subcommand("bench", "regression benchmark");
  bench->add_option("config", config_path, "config with a benchmark block");
  bench->add_flag("--reduced", reduced, "small instance (d=10, 300 samples per agent)");
  bench->add_flag("--oracle", oracle, "also solve the pooled problem centrally");
  bench->add_option("--workers", workers, "threads for the violation estimate");
  bench->add_option("--summary", summary_path, "summary JSON path");
  bench->add_option("--trace", trace_path, "trace CSV path");
  bench->add_option("--parallelism", parallelism, "worker threads for local solves");

  auto* eps = app.add_subcommand("epsilon", "violation-level bounds");
  eps->add_option("config", config_path, "config with a scenario block");
  eps->add_option("--m", m, "agents");
  eps->add_option("--samples-per-agent", per_agent, "samples per agent");
  eps->add_option("--samples", sample_list, "per-agent sample counts")->delimiter(',');
  eps->add_option("--d", d, "decision dimension");
  eps->add_option("--beta", beta, "total confidence parameter");
  eps->add_option("--method", method, "common | common_improved | naive | tight | all");

  auto* ss = app.add_subcommand("samplesize", "least samples reaching a target epsilon");
  ss->add_option("--target", target, "target epsilon")->required();
  ss->add_option("--beta", beta, "confidence parameter");
  ss->add_option("--d", d, "decision dimension")->required();
  ss->add_option("--mode", mode, "common | tight_uniform");
  ss->add_option("--m", m, "agents (tight_uniform)");

  auto* viol = app.add_subcommand("violation", "Monte Carlo violation rate of a solution");
  viol->add_option("config", config_path, "config with a benchmark block")->required();
  viol->add_option("--solution", solution_path, "JSON with 'x' or 'v' array")->required();
  viol->add_option("--samples", samples, "fresh samples (default: benchmark validation_samples)");
  viol->add_option("--seed", seed, "sampling seed (default: benchmark validation seed)");
  viol->add_option("--workers", workers, "threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kIoError;
  }

  try {
    if (*validate) {
      const ExperimentConfig cfg = load_config(config_path);
      json report = json::object();
      std::vector<std::string> issues;
      if (cfg.problem) {
        const RunValidation v =
            validate_run(*cfg.problem, make_schedule(cfg.network), cfg.steps, cfg.run);
        issues = v.issues;
        report["connectivity"] = to_json(v.connectivity);
        report["notes"] = v.notes;
      } else if (cfg.benchmark) {
        const auto sched = make_ring_alternating_pairs(cfg.benchmark->m);
        report["connectivity"] = to_json(validate_connectivity(sched, 8));
      }
      report["valid"] = issues.empty();
      report["issues"] = issues;
      std::cout << report.dump(2) << "\n";
      return print_issues(issues);
    }

    if (*run_cmd) {
      ExperimentConfig cfg = load_config(config_path);
      if (parallelism > 0) cfg.run.parallelism = parallelism;
      if (allow_invalid) cfg.run.allow_invalid = true;
      const std::string summary = summary_path.empty() ? cfg.output.summary_json : summary_path;
      const std::string trace = trace_path.empty() ? cfg.output.trace_csv : trace_path;
      if (cfg.benchmark) return do_bench(cfg, false, cfg.run.parallelism, summary, trace);
      if (!cfg.problem) throw ConfigError("$: config has neither 'problem' nor 'benchmark'");
      RunConfig rc = cfg.run;
      if (trace.empty()) rc.trace = TraceLevel::none;
      const RunResult r = run(*cfg.problem, make_schedule(cfg.network), cfg.steps, rc);
      emit_trace(r.trace, trace);
      emit(run_summary(cfg, r), summary);
      return r.converged ? kOk : kNotConverged;
    }

    if (*bench) {
      ExperimentConfig cfg;
      if (!config_path.empty()) {
        cfg = load_config(config_path);
        if (!cfg.benchmark) throw ConfigError("$.benchmark: missing");
      } else {
        cfg.benchmark = reduced ? reduced_bench() : RegressionConfig{};
        cfg.network.kind = "ring_alternating_pairs";
        cfg.network.m = cfg.benchmark->m;
        cfg.steps = StepSchedule::harmonic(cfg.benchmark->alpha);
        if (reduced) cfg.run = reduced_run();
        else cfg.run.iterate_tolerance = 3e-4;
      }
      if (parallelism > 0) cfg.run.parallelism = parallelism;
      const std::string summary = summary_path.empty() ? cfg.output.summary_json : summary_path;
      const std::string trace = trace_path.empty() ? cfg.output.trace_csv : trace_path;
      return do_bench(cfg, oracle, workers, summary, trace);
    }

    if (*eps) {
      ScenarioConfig sc;
      if (!config_path.empty()) {
        const ExperimentConfig cfg = load_config(config_path);
        if (!cfg.scenario) throw ConfigError("$.scenario: missing");
        sc = cfg.scenario->resolve();
        if (eps->count("--method") == 0) method = cfg.scenario->method;
      } else {
        if (sample_list.empty() && per_agent == 0) {
          throw ConfigError("--samples-per-agent or --samples is required");
        }
        sc = scenario_from_flags(m, sample_list, per_agent, beta, d);
      }
      std::cout << epsilon_reports(sc, method).dump(2) << "\n";
      return kOk;
    }

    if (*ss) {
      InversionMode im;
      if (mode == "common") im = InversionMode::common;
      else if (mode == "tight_uniform") im = InversionMode::tight_uniform;
      else throw ConfigError("--mode: expected 'common' or 'tight_uniform'");
      const SampleSize r = invert_sample_size(target, beta, d, im, m);
      json j = {{"mode", mode}, {"target", target}, {"beta", beta}, {"d", d},
                {"samples", r.samples}, {"achieved", r.achieved}};
      if (im == InversionMode::tight_uniform) j["m"] = m;
      std::cout << j.dump(2) << "\n";
      return kOk;
    }

    if (*viol) {
      const ExperimentConfig cfg = load_config(config_path);
      if (!cfg.benchmark) throw ConfigError("$.benchmark: violation needs a benchmark block");
      std::ifstream in(solution_path);
      if (!in) throw ConfigError("cannot read solution file " + solution_path);
      json sol;
      try {
        sol = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed solution JSON: ") + e.what());
      }
      const char* key = sol.contains("x") && sol["x"].is_array() && !sol["x"].empty() &&
                                sol["x"].front().is_number()
                            ? "x"
                            : "v";
      if (!sol.contains(key)) throw ConfigError("solution: expected an 'x' or 'v' array");
      const detail::Reader r(sol.at(key), std::string("solution.") + key);
      const Vector x = r.vector();
      const auto fam = regression_family(*cfg.benchmark, make_signals(*cfg.benchmark));
      const std::uint64_t M = samples > 0 ? samples : cfg.benchmark->validation_samples;
      const std::uint64_t sd = viol->count("--seed") > 0 ? seed : cfg.benchmark->seeds.validation;
      std::cout << to_json(estimate_violation(x, fam, M, sd, workers)).dump(2) << "\n";
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& s : e.issues()) std::cerr << "invalid: " << s << "\n";
    return kInvalid;
  } catch (const NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNotConverged;
  } catch (const AgentSolveError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNotConverged;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const Error& e) {
    // dimension, infeasibility and argument errors: the input is not usable
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kOk;
}
