#pragma once

// JSON system configs, the networked-control example, and the experiment
// grid runner that produces the certification CSV tables.

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cjsr/baseline.hpp"
#include "cjsr/certify.hpp"
#include "cjsr/csv.hpp"
#include "cjsr/error.hpp"
#include "cjsr/scenario.hpp"
#include "cjsr/system.hpp"

namespace cjsr {

struct SystemConfig {
  std::string name;
  std::vector<std::string> nodes;
  std::vector<EdgeDef> edges;
  std::vector<Mat> matrices;
  Eigen::Index dimension = 0;
};

namespace detail {

using nlohmann::json;

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline SwitchedSystem build_system(const SystemConfig& cfg) {
  try {
    return SwitchedSystem(LabeledGraph(cfg.nodes.size(), cfg.edges), cfg.matrices);
  } catch (const InvalidArgument& e) {
    throw ConfigError(cfg.name + ": " + e.what());
  }
}

}  // namespace detail

/// Parses the JSON schema {name, nodes, edges: [[src, dst, label]],
/// matrices: [[row-major]], dimension}.
inline SystemConfig parse_system_config(const nlohmann::json& j, const std::string& where) {
  using detail::field;
  SystemConfig cfg;
  try {
    cfg.name = j.contains("name") ? j.at("name").get<std::string>() : where;
    cfg.dimension = field(j, "dimension", where).get<Eigen::Index>();
    if (cfg.dimension < 1) throw ConfigError(where + ": field 'dimension' must be >= 1");
    cfg.nodes = field(j, "nodes", where).get<std::vector<std::string>>();
    if (cfg.nodes.empty()) throw ConfigError(where + ": field 'nodes' is empty");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < cfg.nodes.size(); ++i) {
      if (!index.emplace(cfg.nodes[i], i).second) {
        throw ConfigError(where + ": field 'nodes' repeats '" + cfg.nodes[i] + "'");
      }
    }
    const auto& edges = field(j, "edges", where);
    if (!edges.is_array()) throw ConfigError(where + ": field 'edges' must be an array");
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const std::string at = where + ": edges[" + std::to_string(k) + "]";
      const auto& e = edges[k];
      if (!e.is_array() || e.size() != 3) throw ConfigError(at + " must be [source, target, label]");
      const auto src = index.find(e[0].get<std::string>());
      const auto dst = index.find(e[1].get<std::string>());
      if (src == index.end()) throw ConfigError(at + ": unknown source node");
      if (dst == index.end()) throw ConfigError(at + ": unknown target node");
      cfg.edges.push_back({src->second, dst->second, e[2].get<int>()});
    }
    const auto& mats = field(j, "matrices", where);
    if (!mats.is_array()) throw ConfigError(where + ": field 'matrices' must be an array");
    const Eigen::Index n = cfg.dimension;
    for (std::size_t k = 0; k < mats.size(); ++k) {
      const auto vals = mats[k].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(vals.size()) != n * n) {
        throw ConfigError(where + ": matrices[" + std::to_string(k) + "] needs " +
                          std::to_string(n * n) + " entries");
      }
      Mat a(n, n);
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) a(r, c) = vals[static_cast<std::size_t>(r * n + c)];
      cfg.matrices.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return cfg;
}

/// The packet-loss example: at most two consecutive drops, closed-loop
/// matrix A + BK on delivery and open-loop A on loss.
inline SystemConfig ncs_config() {
  SystemConfig cfg;
  cfg.name = "ncs";
  cfg.nodes = {"a", "b", "c"};
  cfg.edges = {{0, 0, 1}, {0, 1, 2}, {1, 0, 1}, {1, 2, 2}, {2, 0, 1}};
  cfg.dimension = 2;
  Mat a(2, 2);
  a << 0.45, 1.08, 0.36, 0.09;
  Mat b(2, 1);
  b << 0.0, 1.0;
  Mat k(1, 2);
  k << -0.42, -0.36;
  cfg.matrices = {a + b * k, a};
  return cfg;
}

inline SwitchedSystem ncs_example() { return detail::build_system(ncs_config()); }

inline SwitchedSystem load_system(const std::filesystem::path& path) {
  if (path == "ncs") return ncs_example();
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return detail::build_system(parse_system_config(j, path.string()));
}

enum class Mode { Hybrid, Continuous, Baseline };

inline Mode parse_mode(const std::string& s) {
  if (s == "hybrid") return Mode::Hybrid;
  if (s == "continuous") return Mode::Continuous;
  if (s == "baseline") return Mode::Baseline;
  throw ConfigError("unknown mode '" + s + "' (hybrid, continuous, baseline)");
}

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Hybrid: return "hybrid";
    case Mode::Continuous: return "continuous";
    case Mode::Baseline: return "baseline";
  }
  return "?";
}

struct ExperimentConfig {
  Mode mode = Mode::Hybrid;
  std::vector<int> horizons{1};
  std::vector<long long> sample_sizes{50, 100, 200, 500, 1000, 2000, 4000, 8000};
  std::vector<double> noise_radii{0.0};
  double beta = 0.05;
  int realizations = 20;
  std::uint64_t seed = 0;
  std::string system = "ncs";
  std::string output;  // empty: stdout
  int cycle_max = 12;  // baseline mode
  unsigned workers = 0;  // 0: hardware concurrency
  bool timing = false;   // wall_ms is 0 unless enabled
  SolverTolerances solver;

  void validate() const {
    if (realizations < 1) throw ConfigError("field 'realizations' must be >= 1");
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("field 'beta' must lie in (0, 1)");
    if (horizons.empty()) throw ConfigError("field 'l' is empty");
    for (int l : horizons)
      if (l < 1) throw ConfigError("field 'l' entries must be >= 1");
    if (mode != Mode::Baseline) {
      if (sample_sizes.empty()) throw ConfigError("field 'N' is empty");
      for (long long n : sample_sizes)
        if (n < 1) throw ConfigError("field 'N' entries must be >= 1");
      if (noise_radii.empty()) throw ConfigError("field 'W' is empty");
      for (double w : noise_radii)
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("field 'W' entries must be >= 0");
    }
    if (cycle_max < 1) throw ConfigError("field 'cycle_max' must be >= 1");
  }
};

/// Relative paths in "system" and "output" resolve against `base_dir`.
inline ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                                const std::filesystem::path& base_dir = {}) {
  ExperimentConfig cfg;
  try {
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    if (j.contains("mode")) cfg.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("l")) cfg.horizons = j.at("l").get<std::vector<int>>();
    if (j.contains("N")) cfg.sample_sizes = j.at("N").get<std::vector<long long>>();
    if (j.contains("W")) cfg.noise_radii = j.at("W").get<std::vector<double>>();
    if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
    if (j.contains("realizations")) cfg.realizations = j.at("realizations").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("cycle_max")) cfg.cycle_max = j.at("cycle_max").get<int>();
    if (j.contains("workers")) cfg.workers = j.at("workers").get<unsigned>();
    if (j.contains("timing")) cfg.timing = j.at("timing").get<bool>();
    if (j.contains("lambda_tol")) cfg.solver.lambda_tol = j.at("lambda_tol").get<double>();
    if (j.contains("C")) cfg.solver.frobenius_cap = j.at("C").get<double>();
    auto resolve = [&](const std::string& p) {
      if (p.empty() || p == "ncs" || p == "-") return p;
      std::filesystem::path fp(p);
      return fp.is_absolute() || base_dir.empty() ? p : (base_dir / fp).string();
    };
    if (j.contains("system")) cfg.system = resolve(j.at("system").get<std::string>());
    if (j.contains("output")) cfg.output = resolve(j.at("output").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_experiment_config(j, path.parent_path());
}

/// Stable per-cell seed from (base, l, bits of W, N, realization).
inline std::uint64_t cell_seed(std::uint64_t base, int horizon, double noise_radius,
                               long long n_samples, int realization) {
  std::uint64_t s = combine_seed(base, static_cast<std::uint64_t>(horizon));
  s = combine_seed(s, std::bit_cast<std::uint64_t>(noise_radius));
  s = combine_seed(s, static_cast<std::uint64_t>(n_samples));
  return combine_seed(s, static_cast<std::uint64_t>(realization));
}

/// One (l, W, N, realization) certification run.
struct CellResult {
  Mode mode = Mode::Hybrid;
  int horizon = 1;
  double noise_radius = 0.0;
  long long n_samples = 0;
  int realization = 0;
  std::uint64_t seed = 0;
  double lambda_star = 0.0;
  double epsilon = 0.0;
  double rho_primary = kVacuous;
  double rho_alternative = kVacuous;
  double rho_final = kVacuous;
  bool vacuous = true;
  bool certified = false;
  double wall_ms = 0.0;
  std::string error;

  bool ok() const { return error.empty(); }
};

struct CertifyRun {
  CellResult cell;
  ScenarioSolution solution;
  BoundReport report;
};

inline CertifyRun certify_once(const SwitchedSystem& sys, Mode mode, int horizon,
                               long long n_samples, double noise_radius, double beta,
                               std::uint64_t seed, const SolverTolerances& tol = {}) {
  detail::require(mode != Mode::Baseline, "certify: mode must be hybrid or continuous");
  CertifyRun run;
  SamplingConfig sc;
  sc.horizon = horizon;
  sc.samples = static_cast<std::size_t>(n_samples);
  sc.noise_radius = noise_radius;
  sc.seed = seed;
  const LiftedSystem lifted = build_lift(sys, horizon);
  if (mode == Mode::Hybrid) {
    const HybridSampleSet set = sample_hybrid(lifted, sc);
    run.solution = solve_hybrid(set, tol);
    run.report = hybrid_bound(run.solution, set, beta);
  } else {
    const ContinuousSampleSet set = sample_continuous(lifted, sc);
    run.solution = solve_continuous(set, tol);
    run.report = continuous_bound(run.solution, set, beta);
  }
  CellResult& c = run.cell;
  c.mode = mode;
  c.horizon = horizon;
  c.noise_radius = noise_radius;
  c.n_samples = n_samples;
  c.seed = seed;
  c.lambda_star = run.solution.lambda_star;
  c.epsilon = run.report.epsilon;
  c.rho_primary = run.report.rho_primary;
  c.rho_alternative = run.report.rho_alternative;
  c.rho_final = run.report.rho_final;
  c.vacuous = run.report.vacuous;
  c.certified = run.report.certifies_stability;
  return run;
}

inline const std::vector<std::string>& experiment_header() {
  static const std::vector<std::string> h{
      "mode",       "l",       "W",         "N",          "realization",
      "seed",       "lambda_star", "epsilon", "rho_primary", "rho_alternative",
      "rho_final",  "vacuous", "certified", "wall_ms",    "error"};
  return h;
}

inline void write_cell(std::ostream& os, const CellResult& c) {
  const bool ok = c.ok();
  csv::write_row(os, {mode_name(c.mode), std::to_string(c.horizon), csv::num(c.noise_radius),
                      std::to_string(c.n_samples), std::to_string(c.realization),
                      std::to_string(c.seed), ok ? csv::num(c.lambda_star) : "",
                      ok ? csv::num(c.epsilon) : "", ok ? csv::num(c.rho_primary) : "",
                      ok ? csv::num(c.rho_alternative) : "", ok ? csv::num(c.rho_final) : "",
                      ok ? (c.vacuous ? "1" : "0") : "", ok ? (c.certified ? "1" : "0") : "",
                      csv::num(c.wall_ms), c.error});
}

/// Means over the successful realizations of one (l, W, N) group.
struct CellAggregate {
  Mode mode = Mode::Hybrid;
  int horizon = 1;
  double noise_radius = 0.0;
  long long n_samples = 0;
  int succeeded = 0;
  int failed = 0;
  double lambda_star = 0.0;
  double epsilon = 0.0;
  double rho_primary = 0.0;
  double rho_alternative = 0.0;
  double rho_final = 0.0;
  double vacuous = 0.0;    // fraction
  double certified = 0.0;  // fraction
  double wall_ms = 0.0;    // total
};

inline CellAggregate aggregate(const std::vector<CellResult>& group) {
  CellAggregate a;
  detail::require(!group.empty(), "aggregate: empty group");
  a.mode = group.front().mode;
  a.horizon = group.front().horizon;
  a.noise_radius = group.front().noise_radius;
  a.n_samples = group.front().n_samples;
  for (const auto& c : group) {
    a.wall_ms += c.wall_ms;
    if (!c.ok()) {
      ++a.failed;
      continue;
    }
    ++a.succeeded;
    a.lambda_star += c.lambda_star;
    a.epsilon += c.epsilon;
    a.rho_primary += c.rho_primary;
    a.rho_alternative += c.rho_alternative;
    a.rho_final += c.rho_final;
    a.vacuous += c.vacuous ? 1.0 : 0.0;
    a.certified += c.certified ? 1.0 : 0.0;
  }
  const double k = a.succeeded > 0 ? a.succeeded : std::nan("");
  for (double* v : {&a.lambda_star, &a.epsilon, &a.rho_primary, &a.rho_alternative,
                    &a.rho_final, &a.vacuous, &a.certified}) {
    *v /= k;
  }
  return a;
}

inline void write_aggregate(std::ostream& os, const CellAggregate& a) {
  csv::write_row(os, {mode_name(a.mode), std::to_string(a.horizon), csv::num(a.noise_radius),
                      std::to_string(a.n_samples), "mean", "", csv::num(a.lambda_star),
                      csv::num(a.epsilon), csv::num(a.rho_primary), csv::num(a.rho_alternative),
                      csv::num(a.rho_final), csv::num(a.vacuous), csv::num(a.certified),
                      csv::num(a.wall_ms),
                      a.failed ? "failed " + std::to_string(a.failed) + " of " +
                                     std::to_string(a.failed + a.succeeded)
                               : ""});
}

struct ExperimentResult {
  std::vector<CellResult> cells;            // ordered by (l, W, N, realization)
  std::vector<CellAggregate> aggregates;    // ordered by (l, W, N)
  std::vector<BaselineRow> baseline;        // baseline mode only
  double baseline_lower = 0.0;
  std::vector<double> baseline_ms;

  bool any_error() const {
    return std::any_of(cells.begin(), cells.end(), [](const CellResult& c) { return !c.ok(); });
  }
};

namespace detail {

template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

inline ExperimentResult run_experiment(const SwitchedSystem& sys, const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  using clock = std::chrono::steady_clock;
  auto elapsed_ms = [&](clock::time_point t0) {
    return cfg.timing ? std::chrono::duration<double, std::milli>(clock::now() - t0).count() : 0.0;
  };

  if (cfg.mode == Mode::Baseline) {
    const auto t0 = clock::now();
    out.baseline_lower = cycle_lower(sys, cfg.cycle_max);
    const double lower_ms = elapsed_ms(t0);
    for (int l : cfg.horizons) {
      const auto t1 = clock::now();
      const double up = whitebox_upper(sys, l);
      out.baseline.push_back({l, up, out.baseline_lower, up - out.baseline_lower});
      out.baseline_ms.push_back(lower_ms + elapsed_ms(t1));
    }
    return out;
  }

  for (int l : cfg.horizons)
    for (double w : cfg.noise_radii)
      for (long long n : cfg.sample_sizes)
        for (int r = 0; r < cfg.realizations; ++r) {
          CellResult c;
          c.mode = cfg.mode;
          c.horizon = l;
          c.noise_radius = w;
          c.n_samples = n;
          c.realization = r;
          c.seed = cell_seed(cfg.seed, l, w, n, r);
          out.cells.push_back(c);
        }

  detail::parallel_for(out.cells.size(), cfg.workers, [&](std::size_t i) {
    CellResult& slot = out.cells[i];
    const auto t0 = clock::now();
    try {
      CellResult done = certify_once(sys, cfg.mode, slot.horizon, slot.n_samples,
                                     slot.noise_radius, cfg.beta, slot.seed, cfg.solver)
                            .cell;
      done.realization = slot.realization;
      slot = std::move(done);
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
    slot.wall_ms = elapsed_ms(t0);
  });

  const std::size_t r = static_cast<std::size_t>(cfg.realizations);
  for (std::size_t i = 0; i < out.cells.size(); i += r) {
    out.aggregates.push_back(aggregate(
        std::vector<CellResult>(out.cells.begin() + static_cast<std::ptrdiff_t>(i),
                                out.cells.begin() + static_cast<std::ptrdiff_t>(i + r))));
  }
  return out;
}

inline const std::vector<std::string>& baseline_header() {
  static const std::vector<std::string> h{"mode", "l", "cycle_max", "lower",
                                          "upper", "width", "wall_ms"};
  return h;
}

inline void write_baseline_row(std::ostream& os, const BaselineRow& row, int cycle_max,
                               double wall_ms) {
  csv::write_row(os, {"baseline", std::to_string(row.horizon), std::to_string(cycle_max),
                      csv::num(row.lower), csv::num(row.upper), csv::num(row.width),
                      csv::num(wall_ms)});
}

/// Data rows of each (l, W, N) group followed by its mean row.
inline void write_experiment_csv(std::ostream& os, const ExperimentResult& res,
                                 const ExperimentConfig& cfg) {
  if (cfg.mode == Mode::Baseline) {
    csv::write_row(os, baseline_header());
    for (std::size_t i = 0; i < res.baseline.size(); ++i) {
      write_baseline_row(os, res.baseline[i], cfg.cycle_max, res.baseline_ms[i]);
    }
    return;
  }
  csv::write_row(os, experiment_header());
  const std::size_t r = static_cast<std::size_t>(cfg.realizations);
  for (std::size_t g = 0; g < res.aggregates.size(); ++g) {
    for (std::size_t k = 0; k < r; ++k) write_cell(os, res.cells[g * r + k]);
    write_aggregate(os, res.aggregates[g]);
  }
}

}  // namespace cjsr
