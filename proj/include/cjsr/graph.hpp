#pragma once

// Labeled directed multigraphs constraining a switching signal: finite
// languages, l-product lifts, the flower graph and closed-path enumeration.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cjsr/error.hpp"

namespace cjsr {

/// Sequence of labels in [1, m], read along a path of the graph.
using Word = std::vector<int>;

struct Edge {
  std::size_t id = 0;
  std::size_t source = 0;
  std::size_t target = 0;
  int label = 1;
};

/// Edge description used for construction; ids are assigned in order.
struct EdgeDef {
  std::size_t source;
  std::size_t target;
  int label;
};

class LabeledGraph {
 public:
  LabeledGraph() = default;

  /// Validates node indices, label surjectivity onto [1, m], unique
  /// (source, target, label) triples and that every node has a successor.
  LabeledGraph(std::size_t node_count, const std::vector<EdgeDef>& edges)
      : node_count_(node_count) {
    detail::require(node_count >= 1, "graph needs at least one node");
    detail::require(!edges.empty(), "graph needs at least one edge");
    std::set<std::tuple<std::size_t, std::size_t, int>> seen;
    int max_label = 0;
    for (const auto& def : edges) {
      detail::require(def.source < node_count && def.target < node_count,
                      "edge endpoint out of range");
      detail::require(def.label >= 1, "edge label must be >= 1");
      detail::require(seen.emplace(def.source, def.target, def.label).second,
                      "duplicate (source, target, label) edge");
      max_label = std::max(max_label, def.label);
      edges_.push_back({edges_.size(), def.source, def.target, def.label});
    }
    std::vector<bool> used(static_cast<std::size_t>(max_label) + 1, false);
    for (const auto& e : edges_) used[static_cast<std::size_t>(e.label)] = true;
    for (int k = 1; k <= max_label; ++k) {
      if (!used[static_cast<std::size_t>(k)]) {
        throw InvalidArgument("label " + std::to_string(k) +
                              " does not appear on any edge");
      }
    }
    label_count_ = max_label;

    out_.assign(node_count_, {});
    for (const auto& e : edges_) out_[e.source].push_back(e.id);
    for (std::size_t u = 0; u < node_count_; ++u) {
      if (out_[u].empty()) {
        throw InvalidArgument("node " + std::to_string(u) +
                              " has no outgoing edge");
      }
    }
  }

  std::size_t node_count() const { return node_count_; }
  int label_count() const { return label_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t id) const { return edges_.at(id); }

  /// Ids of the edges leaving `node`, in construction order.
  const std::vector<std::size_t>& out_edges(std::size_t node) const {
    return out_.at(node);
  }

 private:
  std::size_t node_count_ = 0;
  int label_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> out_;
};

namespace detail {

// Visits every directed path of exactly `length` edges; fn(start, end, word).
template <class Fn>
void for_each_path(const LabeledGraph& g, int length, Fn&& fn) {
  Word word;
  word.reserve(static_cast<std::size_t>(length));
  auto rec = [&](auto&& self, std::size_t start, std::size_t node) -> void {
    if (static_cast<int>(word.size()) == length) {
      fn(start, node, static_cast<const Word&>(word));
      return;
    }
    for (std::size_t id : g.out_edges(node)) {
      const Edge& e = g.edge(id);
      word.push_back(e.label);
      self(self, start, e.target);
      word.pop_back();
    }
  };
  for (std::size_t u = 0; u < g.node_count(); ++u) rec(rec, u, u);
}

}  // namespace detail

/// Distinct label sequences read along paths of `length` edges.
inline std::set<Word> language(const LabeledGraph& g, int length) {
  detail::require(length >= 1, "word length must be >= 1");
  std::set<Word> words;
  detail::for_each_path(g, length, [&](std::size_t, std::size_t, const Word& w) {
    words.insert(w);
  });
  return words;
}

inline std::size_t count_words(const LabeledGraph& g, int length) {
  return language(g, length).size();
}

/// Number of directed edge paths of `length` edges (not deduplicated).
inline std::size_t count_paths(const LabeledGraph& g, int length) {
  detail::require(length >= 1, "path length must be >= 1");
  std::vector<std::size_t> walks(g.node_count(), 1);
  for (int k = 0; k < length; ++k) {
    std::vector<std::size_t> next(g.node_count(), 0);
    for (const auto& e : g.edges()) next[e.source] += walks[e.target];
    walks = std::move(next);
  }
  std::size_t total = 0;
  for (auto w : walks) total += w;
  return total;
}

/// One node, m self-loops labeled 1..m.
inline LabeledGraph flower(int m) {
  detail::require(m >= 1, "flower needs m >= 1");
  std::vector<EdgeDef> loops;
  for (int k = 1; k <= m; ++k) loops.push_back({0, 0, k});
  return LabeledGraph(1, loops);
}

/// The l-product lift. The lifted graph's integer label k stands for the
/// word `alphabet[k - 1]`; the alphabet is the sorted set of length-l words,
/// so it coincides with language(base, l).
struct ProductLift {
  LabeledGraph graph;
  std::vector<Word> alphabet;
  int horizon = 1;

  const Word& word_of(const Edge& e) const {
    return alphabet.at(static_cast<std::size_t>(e.label - 1));
  }
  const Word& word_of(std::size_t edge_id) const {
    return word_of(graph.edge(edge_id));
  }
};

inline ProductLift product_lift(const LabeledGraph& g, int length) {
  detail::require(length >= 1, "lift length must be >= 1");
  std::set<std::tuple<std::size_t, std::size_t, Word>> triples;
  detail::for_each_path(g, length,
                        [&](std::size_t s, std::size_t t, const Word& w) {
                          triples.emplace(s, t, w);
                        });
  std::map<Word, int> index;
  for (const auto& [s, t, w] : triples) index.emplace(w, 0);
  ProductLift lift;
  lift.horizon = length;
  for (auto& [w, k] : index) {
    lift.alphabet.push_back(w);
    k = static_cast<int>(lift.alphabet.size());
  }
  std::vector<EdgeDef> defs;
  defs.reserve(triples.size());
  for (const auto& [s, t, w] : triples) defs.push_back({s, t, index.at(w)});
  lift.graph = LabeledGraph(g.node_count(), defs);
  return lift;
}

/// Replaces each lifted label by its word (concatenation).
inline Word flatten(const ProductLift& lift, const Word& lifted_word) {
  Word out;
  for (int k : lifted_word) {
    const Word& w = lift.alphabet.at(static_cast<std::size_t>(k - 1));
    out.insert(out.end(), w.begin(), w.end());
  }
  return out;
}

struct Cycle {
  Word word;
  std::size_t start = 0;

  friend bool operator==(const Cycle&, const Cycle&) = default;
  friend auto operator<=>(const Cycle& a, const Cycle& b) {
    return std::tie(a.word, a.start) <=> std::tie(b.word, b.start);
  }
};

/// Closed edge paths of length 1..max_length, deduplicated by (word, start),
/// ordered by length, then word, then start node.
inline std::vector<Cycle> cycles_up_to(const LabeledGraph& g, int max_length) {
  detail::require(max_length >= 1, "cycle length bound must be >= 1");
  std::vector<Cycle> out;
  for (int k = 1; k <= max_length; ++k) {
    std::set<Cycle> found;
    detail::for_each_path(g, k, [&](std::size_t s, std::size_t t, const Word& w) {
      if (s == t) found.insert({w, s});
    });
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

}  // namespace cjsr
