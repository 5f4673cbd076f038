#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hdual/graph.hpp"
#include "hdual/potentials.hpp"

namespace hdual {

/// A graph together with the registry its edge potential handles point into.
struct Network {
  FiniteGraph graph;
  std::vector<PotentialPair> potentials;

  const PotentialPair& potential(EdgeIndex e) const { return potentials.at(graph.edge(e).potential); }

  PotentialId add_potential(PotentialPair p) {
    potentials.push_back(std::move(p));
    return potentials.size() - 1;
  }
};

/// Every edge of g gets the same potential.
inline Network homogeneous(const FiniteGraph& g, PotentialPair p) {
  return Network{with_potential(g, 0), {std::move(p)}};
}

struct TransformOp {
  enum Kind { split, glue, reduce, merge, add_edge } kind;
  std::size_t a = 0;
  std::size_t b = 0;
  long k = 0;

  std::string text() const {
    std::ostringstream os;
    switch (kind) {
      case split: os << "split " << a << ' ' << k; break;
      case glue: os << "glue " << a << ' ' << b; break;
      case reduce: os << "reduce " << a; break;
      case merge: os << "merge"; break;
      case add_edge: os << "add_edge " << a << ' ' << b; break;
    }
    return os.str();
  }
};

/// Applied operations in order, plus where each original vertex ended up.
struct TransformLog {
  std::vector<TransformOp> ops;
  std::vector<Vertex> vertex_map;

  static TransformLog identity(std::size_t n) {
    TransformLog log;
    for (Vertex v = 0; v < n; ++v) log.vertex_map.push_back(v);
    return log;
  }

  void compose(const std::vector<Vertex>& step) {
    for (Vertex& v : vertex_map) v = step.at(v);
  }

  std::string text() const {
    std::ostringstream os;
    for (const auto& op : ops) os << op.text() << '\n';
    return os.str();
  }
};

// ---------------------------------------------------------------------------
// Elementary operations

/// Replace edge e by a path of k edges, each carrying split_potential(P, k).
/// The first sub-edge keeps index e; the new vertices and edges are appended.
inline Network split_edge(const Network& net, EdgeIndex e, int k) {
  if (k < 1) throw std::invalid_argument("split_edge: k must be >= 1");
  if (k == 1) return net;
  Network out = net;
  const Edge old = net.graph.edge(e);
  const PotentialId pid = out.add_potential(split_potential(net.potential(e), k));
  std::vector<Edge> edges = net.graph.edges();
  std::size_t n = net.graph.num_vertices();
  Vertex prev = old.tail;
  for (int i = 0; i < k; ++i) {
    const Vertex next = (i == k - 1) ? old.head : static_cast<Vertex>(n++);
    if (i == 0)
      edges[e] = {prev, next, pid};
    else
      edges.push_back({prev, next, pid});
    prev = next;
  }
  out.graph = FiniteGraph(n, std::move(edges), net.graph.boundary());
  return out;
}

/// Identify v1 and v2. The merged vertex takes the smaller index, larger indices
/// shift down by one, and self-loops are dropped. map receives old -> new vertex.
inline Network glue_vertices(const Network& net, Vertex v1, Vertex v2, std::vector<Vertex>* map = nullptr) {
  const std::size_t n = net.graph.num_vertices();
  if (v1 == v2) throw std::invalid_argument("glue_vertices: vertices must differ");
  if (v1 >= n || v2 >= n) throw std::invalid_argument("glue_vertices: vertex out of range");
  const Vertex keep = std::min(v1, v2), gone = std::max(v1, v2);
  std::vector<Vertex> m(n);
  for (Vertex v = 0; v < n; ++v) m[v] = v == gone ? keep : (v > gone ? v - 1 : v);
  std::vector<Edge> edges;
  for (const Edge& e : net.graph.edges()) {
    Edge r{m[e.tail], m[e.head], e.potential};
    if (r.tail != r.head) edges.push_back(r);
  }
  Network out{FiniteGraph(n - 1, std::move(edges), m[net.graph.boundary()]), net.potentials};
  if (map) *map = std::move(m);
  return out;
}

/// Extra edge x -> y with the given potential (the auxiliary edge of the gluing limit).
inline Network add_edge(const Network& net, Vertex x, Vertex y, PotentialPair p) {
  Network out = net;
  const PotentialId pid = out.add_potential(std::move(p));
  std::vector<Edge> edges = net.graph.edges();
  edges.push_back({x, y, pid});
  out.graph = FiniteGraph(net.graph.num_vertices(), std::move(edges), net.graph.boundary());
  return out;
}

/// Collapse every group of parallel edges into one edge carrying the product potential.
inline Network merge_parallel_edges(const Network& net) {
  Network out;
  out.potentials = net.potentials;
  std::map<std::pair<Vertex, Vertex>, std::size_t> slot;
  std::vector<Edge> edges;
  std::vector<PotentialPair> merged;
  std::vector<int> count;
  for (EdgeIndex e = 0; e < net.graph.num_edges(); ++e) {
    const Edge& ed = net.graph.edge(e);
    auto key = std::minmax(ed.tail, ed.head);
    auto it = slot.find(key);
    if (it == slot.end()) {
      slot.emplace(key, edges.size());
      edges.push_back(ed);
      merged.push_back(net.potential(e));
      count.push_back(1);
    } else {
      merged[it->second] = merge_parallel(merged[it->second], net.potential(e));
      ++count[it->second];
    }
  }
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (count[i] > 1) edges[i].potential = out.add_potential(merged[i]);
  out.graph = FiniteGraph(net.graph.num_vertices(), std::move(edges), net.graph.boundary());
  return out;
}

// ---------------------------------------------------------------------------
// Degree reduction and the star-tree transform

/// One pass of the degree reduction algorithm at v0. Neighbours are taken in
/// order of first appearance among v0's incident edges (the cyclic order for
/// abstract graphs). With fewer than 4 neighbours nothing happens.
inline Network degree_reduce(const Network& net, Vertex v0, std::vector<Vertex>* map = nullptr) {
  const FiniteGraph& g = net.graph;
  std::vector<Vertex> nb = g.neighbors(v0);
  if (map) {
    map->resize(g.num_vertices());
    for (Vertex v = 0; v < g.num_vertices(); ++v) (*map)[v] = v;
  }
  if (nb.size() < 4) return net;
  if (nb.size() % 2 == 1) nb.pop_back();
  const std::size_t pairs = nb.size() / 2;

  // Each pair (v_{2i-1}, v_{2i}) receives one new vertex: the glued midpoints.
  std::map<Vertex, Vertex> target;
  std::size_t n = g.num_vertices();
  for (std::size_t i = 0; i < pairs; ++i) {
    const Vertex x = static_cast<Vertex>(n++);
    target[nb[2 * i]] = x;
    target[nb[2 * i + 1]] = x;
  }
  Network out;
  out.potentials = net.potentials;
  std::map<PotentialId, PotentialId> halved;
  std::vector<Edge> edges;
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    const bool at_v0 = ed.tail == v0 || ed.head == v0;
    const Vertex u = at_v0 ? g.other(e, v0) : 0;
    if (!at_v0 || !target.count(u)) {
      edges.push_back(ed);
      continue;
    }
    auto h = halved.find(ed.potential);
    if (h == halved.end())
      h = halved.emplace(ed.potential, out.add_potential(split_potential(net.potentials[ed.potential], 2))).first;
    const Vertex x = target[u];
    // keep the orientation of the original edge along the subdivided path
    if (ed.tail == v0) {
      edges.push_back({v0, x, h->second});
      edges.push_back({x, u, h->second});
    } else {
      edges.push_back({u, x, h->second});
      edges.push_back({x, v0, h->second});
    }
  }
  out.graph = FiniteGraph(n, std::move(edges), g.boundary());
  return out;
}

struct StarTreeResult {
  Network network;
  TransformLog log;
};

/// Reduce every non-boundary vertex to at most 3 neighbours, then merge parallel edges.
inline StarTreeResult star_tree_transform(const Network& net) {
  StarTreeResult r{net, TransformLog::identity(net.graph.num_vertices())};
  for (bool changed = true; changed;) {
    changed = false;
    for (Vertex v = 0; v < r.network.graph.num_vertices(); ++v) {
      if (v == r.network.graph.boundary() || r.network.graph.neighbors(v).size() < 4) continue;
      std::vector<Vertex> step;
      r.network = degree_reduce(r.network, v, &step);
      r.log.ops.push_back({TransformOp::reduce, v, 0, 0});
      changed = true;
    }
  }
  r.network = merge_parallel_edges(r.network);
  r.log.ops.push_back({TransformOp::merge, 0, 0, 0});
  return r;
}

/// Re-apply a log's operations to a network.
inline Network replay(const Network& net, const std::vector<TransformOp>& ops) {
  Network cur = net;
  for (const auto& op : ops) {
    switch (op.kind) {
      case TransformOp::split: cur = split_edge(cur, op.a, static_cast<int>(op.k)); break;
      case TransformOp::glue: cur = glue_vertices(cur, op.a, op.b); break;
      case TransformOp::reduce: cur = degree_reduce(cur, op.a); break;
      case TransformOp::merge: cur = merge_parallel_edges(cur); break;
      case TransformOp::add_edge: throw std::invalid_argument("replay: add_edge needs a potential");
    }
  }
  return cur;
}

inline std::vector<TransformOp> parse_ops(std::istream& is) {
  std::vector<TransformOp> ops;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    TransformOp op{TransformOp::merge};
    bool ok = true;
    if (tag == "split") {
      op.kind = TransformOp::split;
      ok = static_cast<bool>(ls >> op.a >> op.k);
    } else if (tag == "glue") {
      op.kind = TransformOp::glue;
      ok = static_cast<bool>(ls >> op.a >> op.b);
    } else if (tag == "reduce") {
      op.kind = TransformOp::reduce;
      ok = static_cast<bool>(ls >> op.a);
    } else if (tag == "merge") {
      op.kind = TransformOp::merge;
    } else {
      throw std::invalid_argument("transform log: unknown operation '" + tag + "'");
    }
    if (!ok) throw std::invalid_argument("transform log: malformed line '" + line + "'");
    ops.push_back(op);
  }
  return ops;
}

// ---------------------------------------------------------------------------
// Long-range planarization

struct EmbeddedNetwork {
  Network network;
  std::vector<std::array<int, 2>> coords;
  std::vector<char> has_coords;
};

/// Number of edges of the underlying simple graph.
inline std::size_t simple_edge_count(const FiniteGraph& g) {
  std::vector<std::pair<Vertex, Vertex>> keys;
  for (const Edge& e : g.edges()) keys.push_back(std::minmax(e.tail, e.head));
  std::sort(keys.begin(), keys.end());
  return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

/// Necessary planarity condition |E| <= 3|V| - 6 on the underlying simple graph.
inline bool euler_bound_holds(const FiniteGraph& g) {
  const std::size_t V = g.num_vertices();
  if (V < 3) return true;
  return simple_edge_count(g) <= 3 * V - 6;
}

/// Every embedded edge of ℓ1 length 2 is subdivided once (potential split in two)
/// and its midpoint glued to the lattice vertex at distance 1 from both ends:
/// the unique one for straight edges, the lexicographically smaller corner for diagonals.
inline EmbeddedNetwork planarize_long_range(const EmbeddedNetwork& in) {
  const FiniteGraph& g = in.network.graph;
  std::map<std::array<int, 2>, Vertex> at;
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (in.has_coords[v]) at[in.coords[v]] = v;
  EmbeddedNetwork out;
  out.network.potentials = in.network.potentials;
  out.coords = in.coords;
  out.has_coords = in.has_coords;
  std::map<PotentialId, PotentialId> halved;
  std::vector<Edge> edges;
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    if (!in.has_coords[ed.tail] || !in.has_coords[ed.head]) {
      edges.push_back(ed);
      continue;
    }
    const auto a = in.coords[ed.tail], b = in.coords[ed.head];
    const int dx = b[0] - a[0], dy = b[1] - a[1];
    if (std::abs(dx) + std::abs(dy) != 2) {
      edges.push_back(ed);
      continue;
    }
    std::array<int, 2> mid;
    if (dx == 0 || dy == 0) {
      mid = {a[0] + dx / 2, a[1] + dy / 2};
    } else {
      mid = std::min(std::array<int, 2>{a[0] + dx, a[1]}, std::array<int, 2>{a[0], a[1] + dy});
    }
    auto it = at.find(mid);
    if (it == at.end()) throw std::invalid_argument("planarize_long_range: intermediate vertex is not in the box");
    auto h = halved.find(ed.potential);
    if (h == halved.end())
      h = halved.emplace(ed.potential, out.network.add_potential(split_potential(in.network.potentials[ed.potential], 2)))
              .first;
    edges.push_back({ed.tail, it->second, h->second});
    edges.push_back({it->second, ed.head, h->second});
  }
  out.network.graph = FiniteGraph(g.num_vertices(), std::move(edges), g.boundary());
  return out;
}

}  // namespace hdual
