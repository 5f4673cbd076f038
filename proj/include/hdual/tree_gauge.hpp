#pragma once

#include <algorithm>
#include <deque>
#include <utility>
#include <vector>

#include "hdual/forms.hpp"

namespace hdual {

/// Signed edge list; sign +1 means the cycle traverses the edge tail -> head.
using SignedCycle = std::vector<std::pair<EdgeIndex, int>>;

/// Spanning tree rooted at ∂ with the fundamental cycle of each non-tree edge.
/// The tree is a BFS from ∂ where each vertex scans its incident edges sorted
/// by (tail, head, id), so the choice is deterministic.
class TreeGauge {
 public:
  explicit TreeGauge(const FiniteGraph& g) : num_edges_(g.num_edges()) {
    const std::size_t n = g.num_vertices();
    parent_edge_.assign(n, kNone);
    parent_.assign(n, kNone);
    depth_.assign(n, 0);
    in_tree_.assign(g.num_edges(), 0);
    std::vector<char> seen(n, 0);
    std::deque<Vertex> queue{g.boundary()};
    seen[g.boundary()] = 1;
    std::vector<Vertex> bfs_order;
    while (!queue.empty()) {
      Vertex v = queue.front();
      queue.pop_front();
      bfs_order.push_back(v);
      std::vector<EdgeIndex> inc = g.incident(v);
      std::sort(inc.begin(), inc.end(), [&](EdgeIndex a, EdgeIndex b) {
        const Edge &ea = g.edge(a), &eb = g.edge(b);
        return std::tie(ea.tail, ea.head, a) < std::tie(eb.tail, eb.head, b);
      });
      for (EdgeIndex e : inc) {
        Vertex u = g.other(e, v);
        if (seen[u]) continue;
        seen[u] = 1;
        parent_[u] = v;
        parent_edge_[u] = e;
        depth_[u] = depth_[v] + 1;
        in_tree_[e] = 1;
        queue.push_back(u);
      }
    }
    for (auto it = bfs_order.rbegin(); it != bfs_order.rend(); ++it)
      if (*it != g.boundary()) leaf_to_root_.push_back(parent_edge_[*it]);
    for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
      if (in_tree_[e]) {
        tree_edges_.push_back(e);
        continue;
      }
      non_tree_.push_back(e);
      cycles_.push_back(fundamental_cycle(g, e));
    }
    std::sort(tree_edges_.begin(), tree_edges_.end());
  }

  const std::vector<EdgeIndex>& tree_edges() const { return tree_edges_; }
  const std::vector<EdgeIndex>& non_tree_edges() const { return non_tree_; }
  /// cycles()[i] is the fundamental cycle of non_tree_edges()[i].
  const std::vector<SignedCycle>& cycles() const { return cycles_; }
  /// Tree edges ordered so every edge comes before the edges closer to ∂.
  const std::vector<EdgeIndex>& leaf_to_root() const { return leaf_to_root_; }
  bool in_tree(EdgeIndex e) const { return in_tree_.at(e) != 0; }
  std::size_t num_free() const { return non_tree_.size(); }

  /// Co-closed extension: the sum of free[i] times the i-th fundamental cycle.
  OneForm<double> extend(const std::vector<double>& free) const {
    if (free.size() != non_tree_.size()) throw std::invalid_argument("extend: wrong number of free values");
    OneForm<double> J(num_edges_, 0.0);
    for (std::size_t i = 0; i < cycles_.size(); ++i)
      for (auto [e, s] : cycles_[i]) J[e] += s * free[i];
    return J;
  }

  /// Same as extend, reduced to (-π, π]; d* vanishes modulo 2π.
  OneForm<double> extend_circle(const std::vector<double>& free) const { return wrap(extend(free)); }

  OneForm<long> extend_integer(const std::vector<long>& free) const {
    if (free.size() != non_tree_.size()) throw std::invalid_argument("extend: wrong number of free values");
    OneForm<long> J(num_edges_, 0);
    for (std::size_t i = 0; i < cycles_.size(); ++i)
      for (auto [e, s] : cycles_[i]) J[e] += s * free[i];
    return J;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  // +1 on f, then the tree path from head(f) back to tail(f).
  SignedCycle fundamental_cycle(const FiniteGraph& g, EdgeIndex f) const {
    SignedCycle c{{f, +1}};
    Vertex a = g.edge(f).head, b = g.edge(f).tail;
    SignedCycle down;  // edges from b's side, recorded walking up from b
    while (a != b) {
      if (depth_[a] >= depth_[b]) {
        EdgeIndex e = parent_edge_[a];
        c.emplace_back(e, g.edge(e).tail == a ? +1 : -1);
        a = parent_[a];
      } else {
        EdgeIndex e = parent_edge_[b];
        // traversed from parent(b) to b on the way back
        down.emplace_back(e, g.edge(e).tail == b ? -1 : +1);
        b = parent_[b];
      }
    }
    c.insert(c.end(), down.rbegin(), down.rend());
    return c;
  }

  std::size_t num_edges_;
  std::vector<EdgeIndex> parent_edge_;
  std::vector<Vertex> parent_;
  std::vector<std::size_t> depth_;
  std::vector<char> in_tree_;
  std::vector<EdgeIndex> tree_edges_;
  std::vector<EdgeIndex> non_tree_;
  std::vector<SignedCycle> cycles_;
  std::vector<EdgeIndex> leaf_to_root_;
};

inline TreeGauge tree_gauge(const FiniteGraph& g) { return TreeGauge(g); }

}  // namespace hdual
