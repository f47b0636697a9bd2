// cjsr: command-line front end for simulation, certification, baselines
// and experiment grids. Exit status: 0 ok, 1 failed run or cell, 2 bad config.

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"

#include "cjsr/cjsr.hpp"

namespace {

struct Output {
  std::unique_ptr<std::ofstream> file;
  std::ostream* os = &std::cout;

  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file = std::make_unique<std::ofstream>(path);
    if (!*file) throw cjsr::ConfigError(path + ": cannot open for writing");
    os = file.get();
  }
};

struct CommonOpts {
  std::string system = "ncs";
  std::string out;
};

struct SimulateOpts {
  std::string kind = "hybrid";
  int horizon = 1;
  long long samples = 100;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::size_t steps = 50;
  std::size_t start_edge = 0;
};

struct CertifyOpts {
  std::string mode = "hybrid";
  int horizon = 1;
  long long samples = 4000;
  double noise = 0.0;
  double beta = 0.05;
  std::uint64_t seed = 0;
  std::string trace;
  std::string terms;
};

struct BaselineOpts {
  int l_max = 4;
  int cycle_max = 12;
  bool timing = false;
};

struct ExperimentOpts {
  std::string config;
  std::string system;
  std::string out;
  int workers = -1;
  bool timing = false;
};

int run_simulate(const CommonOpts& c, const SimulateOpts& o) {
  const cjsr::SwitchedSystem sys = cjsr::load_system(c.system);
  Output out(c.out);
  if (o.kind == "trajectory") {
    cjsr::Rng rng(o.seed);
    const cjsr::Vec x0 = rng.unit_sphere(sys.dimension());
    const cjsr::Trajectory tr = cjsr::simulate(sys, o.start_edge, x0, o.steps, rng);
    std::vector<std::string> header{"k", "edge", "label", "node"};
    for (Eigen::Index i = 0; i < sys.dimension(); ++i) header.push_back("x" + std::to_string(i));
    cjsr::csv::write_row(*out.os, header);
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      const cjsr::Edge& e = sys.graph().edge(tr.edges[k]);
      std::vector<std::string> row{std::to_string(k), std::to_string(e.id),
                                   std::to_string(e.label), std::to_string(e.target)};
      for (Eigen::Index i = 0; i < tr.states[k].size(); ++i)
        row.push_back(cjsr::csv::num(tr.states[k](i)));
      cjsr::csv::write_row(*out.os, row);
    }
    return 0;
  }
  cjsr::SamplingConfig sc;
  sc.horizon = o.horizon;
  sc.samples = static_cast<std::size_t>(o.samples);
  sc.noise_radius = o.noise;
  sc.seed = o.seed;
  if (o.kind == "hybrid") {
    cjsr::write_csv(*out.os, cjsr::sample_hybrid(sys, sc));
  } else {
    cjsr::write_csv(*out.os, cjsr::sample_continuous(sys, sc));
  }
  return 0;
}

int run_certify(const CommonOpts& c, const CertifyOpts& o) {
  const cjsr::SwitchedSystem sys = cjsr::load_system(c.system);
  const cjsr::Mode mode = cjsr::parse_mode(o.mode);
  if (mode == cjsr::Mode::Baseline) throw cjsr::ConfigError("certify: use the baseline command");
  Output out(c.out);
  const auto t0 = std::chrono::steady_clock::now();
  cjsr::CertifyRun run =
      cjsr::certify_once(sys, mode, o.horizon, o.samples, o.noise, o.beta, o.seed);
  run.cell.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  cjsr::csv::write_row(*out.os, cjsr::experiment_header());
  cjsr::write_cell(*out.os, run.cell);
  if (!o.trace.empty()) {
    Output tr(o.trace);
    cjsr::write_trace_csv(*tr.os, run.solution.diagnostics);
  }
  if (!o.terms.empty()) {
    Output tm(o.terms);
    cjsr::csv::write_row(*tm.os, {"source", "target", "lambda_bar", "kappa", "kappa_alt",
                                  "delta_arg", "delta", "bound", "alt_delta_arg", "alt_delta",
                                  "alt_bound"});
    for (const auto& t : run.report.terms) {
      using cjsr::csv::num;
      cjsr::csv::write_row(*tm.os, {std::to_string(t.source), std::to_string(t.target),
                                    num(t.lambda_bar), num(t.kappa), num(t.kappa_alt),
                                    num(t.delta_arg), num(t.delta_value), num(t.bound),
                                    num(t.alt_delta_arg), num(t.alt_delta_value),
                                    num(t.alt_bound)});
    }
  }
  return 0;
}

int run_baseline(const CommonOpts& c, const BaselineOpts& o) {
  cjsr::ExperimentConfig cfg;
  cfg.mode = cjsr::Mode::Baseline;
  cfg.horizons.clear();
  for (int l = 1; l <= o.l_max; ++l) cfg.horizons.push_back(l);
  cfg.cycle_max = o.cycle_max;
  cfg.timing = o.timing;
  const cjsr::SwitchedSystem sys = cjsr::load_system(c.system);
  Output out(c.out);
  cjsr::write_experiment_csv(*out.os, cjsr::run_experiment(sys, cfg), cfg);
  return 0;
}

int run_experiment_cmd(const ExperimentOpts& o) {
  cjsr::ExperimentConfig cfg = cjsr::load_experiment_config(o.config);
  if (!o.system.empty()) cfg.system = o.system;
  if (!o.out.empty()) cfg.output = o.out;
  if (o.workers >= 0) cfg.workers = static_cast<unsigned>(o.workers);
  if (o.timing) cfg.timing = true;
  const cjsr::SwitchedSystem sys = cjsr::load_system(cfg.system);
  Output out(cfg.output);
  const cjsr::ExperimentResult res = cjsr::run_experiment(sys, cfg);
  cjsr::write_experiment_csv(*out.os, res, cfg);
  return res.any_error() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven stability certificates for constrained switching linear systems"};
  app.require_subcommand(1);

  CommonOpts common;
  SimulateOpts sim;
  CertifyOpts cert;
  BaselineOpts base;
  ExperimentOpts exp;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--system", common.system, "system JSON path or 'ncs'");
    sub->add_option("--out", common.out, "output path (default stdout)");
  };

  auto* s = app.add_subcommand("simulate", "emit a trajectory or a sample set as CSV");
  add_common(s);
  s->add_option("--kind", sim.kind, "trajectory | hybrid | continuous")
      ->check(CLI::IsMember({"trajectory", "hybrid", "continuous"}));
  s->add_option("--l", sim.horizon, "lift horizon")->check(CLI::PositiveNumber);
  s->add_option("--N", sim.samples, "sample count")->check(CLI::PositiveNumber);
  s->add_option("--W", sim.noise, "noise radius")->check(CLI::NonNegativeNumber);
  s->add_option("--seed", sim.seed);
  s->add_option("--steps", sim.steps, "trajectory length");
  s->add_option("--start-edge", sim.start_edge, "trajectory start edge id");

  auto* c = app.add_subcommand("certify", "one sampled certification run");
  add_common(c);
  c->add_option("--mode", cert.mode)->check(CLI::IsMember({"hybrid", "continuous"}));
  c->add_option("--l", cert.horizon)->check(CLI::PositiveNumber);
  c->add_option("--N", cert.samples)->check(CLI::PositiveNumber);
  c->add_option("--W", cert.noise)->check(CLI::NonNegativeNumber);
  c->add_option("--beta", cert.beta)->check(CLI::Range(0.0, 1.0));
  c->add_option("--seed", cert.seed);
  c->add_option("--trace", cert.trace, "write the bisection trace CSV here");
  c->add_option("--terms", cert.terms, "write per-term bound details CSV here");

  auto* b = app.add_subcommand("baseline", "model-based bracket of the CJSR");
  add_common(b);
  b->add_option("--l-max", base.l_max)->check(CLI::PositiveNumber);
  b->add_option("--cycle-max", base.cycle_max)->check(CLI::PositiveNumber);
  b->add_flag("--timing", base.timing, "record wall_ms");

  auto* e = app.add_subcommand("experiment", "run an experiment grid from a JSON config");
  e->add_option("--config", exp.config)->required();
  e->add_option("--system", exp.system, "override the config's system");
  e->add_option("--out", exp.out, "override the config's output");
  e->add_option("--workers", exp.workers, "worker threads (0: all cores)");
  e->add_flag("--timing", exp.timing, "record wall_ms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*s) return run_simulate(common, sim);
    if (*c) return run_certify(common, cert);
    if (*b) return run_baseline(common, base);
    if (*e) return run_experiment_cmd(exp);
  } catch (const cjsr::ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return 2;
  } catch (const cjsr::InvalidArgument& err) {
    std::cerr << "invalid argument: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
