#pragma once

#include <set>
#include <vector>

#include "cjsr/cjsr.hpp"

namespace testing_support {

using cjsr::EdgeDef;
using cjsr::LabeledGraph;
using cjsr::Mat;
using cjsr::Word;

// a = 0, b = 1: a->a:1, a->b:2, b->a:1 (never two 2s in a row).
inline LabeledGraph fig1_graph() { return LabeledGraph(2, {{0, 0, 1}, {0, 1, 2}, {1, 0, 1}}); }

inline Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

// Random graph with every node having an outgoing edge and labels 1..m used.
inline LabeledGraph random_graph(cjsr::Rng& rng, std::size_t max_nodes, std::size_t max_edges,
                                 int max_label) {
  for (;;) {
    const std::size_t nodes = 1 + rng.index(max_nodes);
    const int m = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(max_label)));
    std::set<std::tuple<std::size_t, std::size_t, int>> triples;
    for (std::size_t u = 0; u < nodes; ++u) {
      triples.emplace(u, rng.index(nodes), 1 + static_cast<int>(rng.index(m)));
    }
    const std::size_t target = nodes + rng.index(max_edges - nodes + 1);
    for (int tries = 0; triples.size() < target && tries < 100; ++tries) {
      triples.emplace(rng.index(nodes), rng.index(nodes), 1 + static_cast<int>(rng.index(m)));
    }
    std::set<int> labels;
    std::vector<EdgeDef> defs;
    for (const auto& [s, t, l] : triples) {
      defs.push_back({s, t, l});
      labels.insert(l);
    }
    if (static_cast<int>(labels.size()) != *labels.rbegin()) continue;
    return LabeledGraph(nodes, defs);
  }
}

// Brute force over all label sequences: a word is admissible iff some start
// node admits a walk reading it (set-of-states simulation).
inline std::set<Word> brute_language(const LabeledGraph& g, int length) {
  std::set<Word> out;
  const int m = g.label_count();
  Word w(static_cast<std::size_t>(length), 1);
  for (;;) {
    std::set<std::size_t> states;
    for (std::size_t u = 0; u < g.node_count(); ++u) states.insert(u);
    for (int label : w) {
      std::set<std::size_t> next;
      for (const auto& e : g.edges())
        if (e.label == label && states.count(e.source)) next.insert(e.target);
      states = std::move(next);
    }
    if (!states.empty()) out.insert(w);
    int k = length - 1;
    while (k >= 0 && w[static_cast<std::size_t>(k)] == m) w[static_cast<std::size_t>(k--)] = 1;
    if (k < 0) break;
    ++w[static_cast<std::size_t>(k)];
  }
  return out;
}

}  // namespace testing_support
