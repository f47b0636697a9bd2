#pragma once

// Constrained switching linear systems: hybrid dynamics, product lifts with
// their word matrices, and the two randomized observation protocols.

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cjsr/csv.hpp"
#include "cjsr/error.hpp"
#include "cjsr/graph.hpp"
#include "cjsr/random.hpp"
#include "cjsr/symlin.hpp"

namespace cjsr {

class SwitchedSystem {
 public:
  SwitchedSystem() = default;

  SwitchedSystem(LabeledGraph graph, std::vector<Mat> matrices)
      : graph_(std::move(graph)), matrices_(std::move(matrices)) {
    detail::require(!matrices_.empty(), "system needs at least one matrix");
    detail::require(static_cast<int>(matrices_.size()) == graph_.label_count(),
                    "matrix count " + std::to_string(matrices_.size()) +
                        " differs from label count " +
                        std::to_string(graph_.label_count()));
    const Eigen::Index n = matrices_.front().rows();
    detail::require(n >= 1, "system dimension must be >= 1");
    for (std::size_t k = 0; k < matrices_.size(); ++k) {
      const Mat& a = matrices_[k];
      detail::require(a.rows() == n && a.cols() == n,
                      "matrix " + std::to_string(k + 1) + " is not " + std::to_string(n) +
                          "x" + std::to_string(n));
      detail::require(a.allFinite(),
                      "matrix " + std::to_string(k + 1) + " has non-finite entries");
    }
  }

  const LabeledGraph& graph() const { return graph_; }
  const std::vector<Mat>& matrices() const { return matrices_; }
  const Mat& matrix(int label) const { return matrices_.at(static_cast<std::size_t>(label - 1)); }
  Eigen::Index dimension() const { return matrices_.front().rows(); }

  /// A_{w[l-1]} ... A_{w[0]}: the first label acts first.
  Mat word_matrix(const Word& word) const {
    Mat m = Mat::Identity(dimension(), dimension());
    for (int label : word) m = matrix(label) * m;
    return m;
  }

 private:
  LabeledGraph graph_;
  std::vector<Mat> matrices_;
};

/// The l-product lift with one matrix per lifted label (distinct word).
struct LiftedSystem {
  ProductLift lift;
  std::vector<Mat> word_matrices;  // indexed by lifted label - 1
  int horizon = 1;

  const LabeledGraph& graph() const { return lift.graph; }
  const Mat& matrix_of_edge(std::size_t edge_id) const {
    return word_matrices.at(static_cast<std::size_t>(lift.graph.edge(edge_id).label - 1));
  }
  const Word& word_of_edge(std::size_t edge_id) const { return lift.word_of(edge_id); }
};

inline LiftedSystem build_lift(const SwitchedSystem& sys, int horizon) {
  LiftedSystem out;
  out.lift = product_lift(sys.graph(), horizon);
  out.horizon = horizon;
  out.word_matrices.reserve(out.lift.alphabet.size());
  for (const Word& w : out.lift.alphabet) out.word_matrices.push_back(sys.word_matrix(w));
  return out;
}

struct StepResult {
  std::size_t edge;
  Vec x;
};

/// One transition of the hybrid dynamics; the successor edge is drawn
/// uniformly among the edges leaving t(current_edge).
inline StepResult step(const SwitchedSystem& sys, std::size_t current_edge, const Vec& x,
                       Rng& rng) {
  const LabeledGraph& g = sys.graph();
  detail::require(current_edge < g.edge_count(), "step: edge id out of range");
  const auto& succ = g.out_edges(g.edge(current_edge).target);
  const std::size_t next = succ[rng.index(succ.size())];
  return {next, sys.matrix(g.edge(next).label) * x};
}

struct Trajectory {
  std::vector<std::size_t> edges;  // edges[k] = e(k)
  std::vector<Vec> states;         // states[k] = x(k)
};

inline Trajectory simulate(const SwitchedSystem& sys, std::size_t start_edge, const Vec& x0,
                           std::size_t steps, Rng& rng) {
  detail::require(x0.size() == sys.dimension(), "simulate: initial state dimension mismatch");
  Trajectory traj;
  traj.edges.push_back(start_edge);
  traj.states.push_back(x0);
  for (std::size_t k = 0; k < steps; ++k) {
    StepResult r = step(sys, traj.edges.back(), traj.states.back(), rng);
    traj.edges.push_back(r.edge);
    traj.states.push_back(std::move(r.x));
  }
  return traj;
}

enum class NoiseLaw { UniformBall, Zero };

struct SamplingConfig {
  int horizon = 1;
  std::size_t samples = 1;
  double noise_radius = 0.0;
  std::uint64_t seed = 0;
  NoiseLaw noise_law = NoiseLaw::UniformBall;

  void validate() const {
    detail::require(horizon >= 1, "sampling: horizon must be >= 1");
    detail::require(samples >= 1, "sampling: sample count must be >= 1");
    detail::require(noise_radius >= 0.0 && std::isfinite(noise_radius),
                    "sampling: noise radius must be finite and >= 0");
  }
};

/// Hidden triplet (x, e, w) together with the exposed hybrid observations
/// (x, s(e)) and (y, t(e)).
struct HybridSample {
  Vec x;
  std::size_t edge = 0;  // lifted edge id
  Vec w;
  Vec y;
  std::size_t source = 0;
  std::size_t target = 0;
};

/// What a data-driven solver may read from a hybrid sample.
struct HybridObservation {
  Vec x;
  std::size_t source = 0;
  Vec y;
  std::size_t target = 0;
};

struct HybridSampleSet {
  int horizon = 1;
  std::size_t node_count = 0;
  std::size_t lifted_edge_count = 0;
  double noise_radius = 0.0;
  std::vector<HybridSample> samples;

  std::vector<HybridObservation> observations() const {
    std::vector<HybridObservation> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back({s.x, s.source, s.y, s.target});
    return out;
  }
};

/// Hidden triplet (x, word, w) with the exposed pair (x, y).
struct ContinuousSample {
  Vec x;
  Word word;  // kept for test oracles only
  Vec w;
  Vec y;
};

struct ContinuousObservation {
  Vec x;
  Vec y;
};

struct ContinuousSampleSet {
  int horizon = 1;
  std::size_t word_count = 0;
  double noise_radius = 0.0;
  std::vector<ContinuousSample> samples;

  std::vector<ContinuousObservation> observations() const {
    std::vector<ContinuousObservation> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back({s.x, s.y});
    return out;
  }
};

namespace detail {

inline Vec draw_noise(Rng& rng, Eigen::Index n, const SamplingConfig& cfg) {
  if (cfg.noise_law == NoiseLaw::Zero || cfg.noise_radius == 0.0) return Vec::Zero(n);
  return rng.ball(n, cfg.noise_radius);
}

}  // namespace detail

/// N independent triplets: x uniform on the sphere, a lifted edge uniform on
/// E(G^(l)), w from the noise law.
inline HybridSampleSet sample_hybrid(const LiftedSystem& lifted, const SamplingConfig& cfg) {
  cfg.validate();
  detail::require(lifted.horizon == cfg.horizon, "sample_hybrid: lift horizon mismatch");
  const Eigen::Index n = lifted.word_matrices.front().rows();
  const LabeledGraph& g = lifted.graph();
  Rng rng(cfg.seed);
  HybridSampleSet set;
  set.horizon = cfg.horizon;
  set.node_count = g.node_count();
  set.lifted_edge_count = g.edge_count();
  set.noise_radius = cfg.noise_law == NoiseLaw::Zero ? 0.0 : cfg.noise_radius;
  set.samples.reserve(cfg.samples);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    HybridSample s;
    s.x = rng.unit_sphere(n);
    s.edge = rng.index(g.edge_count());
    s.w = detail::draw_noise(rng, n, cfg);
    s.y = lifted.matrix_of_edge(s.edge) * s.x + s.w;
    s.source = g.edge(s.edge).source;
    s.target = g.edge(s.edge).target;
    set.samples.push_back(std::move(s));
  }
  return set;
}

inline HybridSampleSet sample_hybrid(const SwitchedSystem& sys, const SamplingConfig& cfg) {
  cfg.validate();
  return sample_hybrid(build_lift(sys, cfg.horizon), cfg);
}

/// N independent triplets with the word drawn uniformly from L_{G,l}.
inline ContinuousSampleSet sample_continuous(const LiftedSystem& lifted,
                                             const SamplingConfig& cfg) {
  cfg.validate();
  detail::require(lifted.horizon == cfg.horizon, "sample_continuous: lift horizon mismatch");
  const Eigen::Index n = lifted.word_matrices.front().rows();
  const auto& words = lifted.lift.alphabet;
  Rng rng(cfg.seed);
  ContinuousSampleSet set;
  set.horizon = cfg.horizon;
  set.word_count = words.size();
  set.noise_radius = cfg.noise_law == NoiseLaw::Zero ? 0.0 : cfg.noise_radius;
  set.samples.reserve(cfg.samples);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    ContinuousSample s;
    s.x = rng.unit_sphere(n);
    const std::size_t k = rng.index(words.size());
    s.word = words[k];
    s.w = detail::draw_noise(rng, n, cfg);
    s.y = lifted.word_matrices[k] * s.x + s.w;
    set.samples.push_back(std::move(s));
  }
  return set;
}

inline ContinuousSampleSet sample_continuous(const SwitchedSystem& sys,
                                             const SamplingConfig& cfg) {
  cfg.validate();
  return sample_continuous(build_lift(sys, cfg.horizon), cfg);
}

namespace detail {

inline void vec_header(std::vector<std::string>& h, const char* prefix, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) h.push_back(prefix + std::to_string(i));
}

inline void vec_fields(std::vector<std::string>& f, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) f.push_back(csv::num(v(i)));
}

}  // namespace detail

/// index, x0..x{n-1}, u, y0..y{n-1}, v
inline void write_csv(std::ostream& os, const HybridSampleSet& set) {
  const Eigen::Index n = set.samples.empty() ? 0 : set.samples.front().x.size();
  std::vector<std::string> header{"index"};
  detail::vec_header(header, "x", n);
  header.push_back("u");
  detail::vec_header(header, "y", n);
  header.push_back("v");
  csv::write_row(os, header);
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    const auto& s = set.samples[i];
    std::vector<std::string> row{std::to_string(i)};
    detail::vec_fields(row, s.x);
    row.push_back(std::to_string(s.source));
    detail::vec_fields(row, s.y);
    row.push_back(std::to_string(s.target));
    csv::write_row(os, row);
  }
}

/// index, x0..x{n-1}, y0..y{n-1}
inline void write_csv(std::ostream& os, const ContinuousSampleSet& set) {
  const Eigen::Index n = set.samples.empty() ? 0 : set.samples.front().x.size();
  std::vector<std::string> header{"index"};
  detail::vec_header(header, "x", n);
  detail::vec_header(header, "y", n);
  csv::write_row(os, header);
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    detail::vec_fields(row, set.samples[i].x);
    detail::vec_fields(row, set.samples[i].y);
    csv::write_row(os, row);
  }
}

}  // namespace cjsr
