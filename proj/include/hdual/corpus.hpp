#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hdual/graph.hpp"
#include "hdual/potentials.hpp"

namespace hdual {

struct NamedGraph {
  std::string name;
  FiniteGraph graph;
};

/// Every connected simple graph with 1..max_edges edges, one per isomorphism
/// class, found by brute force over edge subsets of K_n and canonical relabelling.
/// Edges point from the smaller to the larger label and vertex 0 is the boundary.
inline std::vector<NamedGraph> small_connected_graphs(std::size_t max_edges = 5) {
  using EdgeList = std::vector<std::pair<int, int>>;
  std::vector<NamedGraph> out;
  std::set<EdgeList> seen;
  for (std::size_t n = 2; n <= max_edges + 1; ++n) {
    EdgeList all;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) all.push_back({int(a), int(b)});
    std::vector<int> perm(n);
    const std::size_t m = all.size();
    for (unsigned long mask = 1; mask < (1ul << m); ++mask) {
      const auto k = static_cast<std::size_t>(__builtin_popcountl(mask));
      if (k > max_edges || k + 1 < n) continue;
      EdgeList es;
      for (std::size_t i = 0; i < m; ++i)
        if (mask >> i & 1) es.push_back(all[i]);
      // Spanning and connected.
      std::vector<int> comp(n);
      for (std::size_t v = 0; v < n; ++v) comp[v] = int(v);
      auto find = [&](int v) {
        while (comp[v] != v) v = comp[v] = comp[comp[v]];
        return v;
      };
      for (auto [a, b] : es) comp[find(a)] = find(b);
      bool connected = true;
      for (std::size_t v = 1; v < n; ++v) connected &= find(int(v)) == find(0);
      if (!connected) continue;
      EdgeList best;
      for (std::size_t v = 0; v < n; ++v) perm[v] = int(v);
      do {
        EdgeList r;
        for (auto [a, b] : es) r.push_back(std::minmax(perm[a], perm[b]));
        std::sort(r.begin(), r.end());
        if (best.empty() || r < best) best = r;
      } while (std::next_permutation(perm.begin(), perm.end()));
      if (!seen.insert(best).second) continue;
      std::vector<Edge> edges;
      for (auto [a, b] : best) edges.push_back({Vertex(a), Vertex(b), 0});
      out.push_back({"g" + std::to_string(n) + "v" + std::to_string(k) + "e_" + std::to_string(out.size()),
                     FiniteGraph(n, std::move(edges), 0)});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const NamedGraph& a, const NamedGraph& b) { return a.graph.num_edges() < b.graph.num_edges(); });
  return out;
}

/// Two vertices joined by three parallel edges.
inline FiniteGraph build_theta() { return FiniteGraph(2, {{0, 1, 0}, {0, 1, 0}, {0, 1, 0}}, 0); }

/// Graphs of the verification corpus: the small connected graphs, the theta graph and the 2x2 torus.
inline std::vector<NamedGraph> corpus_graphs() {
  auto out = small_connected_graphs(5);
  out.push_back({"theta", build_theta()});
  out.push_back({"torus2", build_torus(2)});
  return out;
}

/// Potentials of the verification corpus.
inline std::vector<PotentialPair> corpus_potentials() {
  return {make_xy(0.5), make_xy(1.0), make_xy(2.0), make_ivgff(1.0), make_lipschitz(1.5)};
}

/// count random 1-forms with entries uniform on [-π, π].
inline std::vector<std::vector<double>> random_twists(std::size_t edges, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-std::numbers::pi, std::numbers::pi);
  std::vector<std::vector<double>> out(count, std::vector<double>(edges));
  for (auto& eps : out)
    for (double& x : eps) x = U(rng);
  return out;
}

}  // namespace hdual
