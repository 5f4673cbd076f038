#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hdual {

using Vertex = std::size_t;
using EdgeIndex = std::size_t;
using PotentialId = std::size_t;

struct Edge {
  Vertex tail = 0;
  Vertex head = 0;
  PotentialId potential = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Finite connected multigraph with one fixed orientation per edge and a
/// distinguished boundary vertex. Parallel edges are stored as separate
/// entries; their count is the multiplicity of the vertex pair.
class FiniteGraph {
 public:
  FiniteGraph() = default;

  FiniteGraph(std::size_t num_vertices, std::vector<Edge> edges, Vertex boundary)
      : num_vertices_(num_vertices), edges_(std::move(edges)), boundary_(boundary) {
    if (num_vertices_ == 0) throw std::invalid_argument("graph needs at least one vertex");
    if (boundary_ >= num_vertices_) throw std::invalid_argument("boundary vertex out of range");
    incident_.assign(num_vertices_, {});
    for (EdgeIndex e = 0; e < edges_.size(); ++e) {
      const Edge& ed = edges_[e];
      if (ed.tail >= num_vertices_ || ed.head >= num_vertices_)
        throw std::invalid_argument("edge endpoint out of range");
      if (ed.tail == ed.head) throw std::invalid_argument("self-loops are not allowed");
      incident_[ed.tail].push_back(e);
      incident_[ed.head].push_back(e);
    }
    if (!connected()) throw std::invalid_argument("graph is not connected");
  }

  std::size_t num_vertices() const { return num_vertices_; }
  std::size_t num_edges() const { return edges_.size(); }
  Vertex boundary() const { return boundary_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeIndex e) const { return edges_.at(e); }

  /// Edge ids touching v, in insertion order.
  const std::vector<EdgeIndex>& incident(Vertex v) const { return incident_.at(v); }
  std::size_t degree(Vertex v) const { return incident_.at(v).size(); }

  Vertex other(EdgeIndex e, Vertex v) const {
    const Edge& ed = edges_.at(e);
    if (ed.tail == v) return ed.head;
    if (ed.head == v) return ed.tail;
    throw std::invalid_argument("vertex is not an endpoint of edge");
  }

  /// Distinct neighbours of v in order of first appearance in the edge list.
  std::vector<Vertex> neighbors(Vertex v) const {
    std::vector<Vertex> out;
    for (EdgeIndex e : incident_.at(v)) {
      Vertex u = other(e, v);
      if (std::find(out.begin(), out.end(), u) == out.end()) out.push_back(u);
    }
    return out;
  }

  std::size_t multiplicity(Vertex a, Vertex b) const {
    std::size_t m = 0;
    for (EdgeIndex e : incident_.at(a))
      if (other(e, a) == b) ++m;
    return m;
  }

  /// Dimension of the cycle space, |E| - |V| + 1.
  std::size_t cycle_rank() const { return edges_.size() + 1 - num_vertices_; }

  bool connected() const {
    std::vector<char> seen(num_vertices_, 0);
    std::vector<Vertex> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      Vertex v = stack.back();
      stack.pop_back();
      for (EdgeIndex e : incident_[v]) {
        Vertex u = other(e, v);
        if (!seen[u]) {
          seen[u] = 1;
          ++count;
          stack.push_back(u);
        }
      }
    }
    return count == num_vertices_;
  }

  friend bool operator==(const FiniteGraph& a, const FiniteGraph& b) {
    return a.num_vertices_ == b.num_vertices_ && a.boundary_ == b.boundary_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t num_vertices_ = 0;
  std::vector<Edge> edges_;
  Vertex boundary_ = 0;
  std::vector<std::vector<EdgeIndex>> incident_;
};

// ---------------------------------------------------------------------------
// Builders

/// Path v0 - v1 - ... - v_{n-1}, boundary v0.
inline FiniteGraph build_path(std::size_t n) {
  if (n < 2) throw std::invalid_argument("path needs at least 2 vertices");
  std::vector<Edge> edges;
  for (Vertex i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 0});
  return FiniteGraph(n, std::move(edges), 0);
}

/// Cycle with edges (i, i+1 mod n). n = 2 gives a doubled edge.
inline FiniteGraph build_cycle(std::size_t n) {
  if (n < 2) throw std::invalid_argument("cycle needs at least 2 vertices");
  std::vector<Edge> edges;
  for (Vertex i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 0});
  return FiniteGraph(n, std::move(edges), 0);
}

/// Star K_{1,k} with centre 0; boundary is the first leaf.
inline FiniteGraph build_star(std::size_t leaves) {
  if (leaves < 1) throw std::invalid_argument("star needs a leaf");
  std::vector<Edge> edges;
  for (Vertex i = 1; i <= leaves; ++i) edges.push_back({0, i, 0});
  return FiniteGraph(leaves + 1, std::move(edges), 1);
}

/// Index helpers for the periodic square lattice of build_torus.
struct TorusLayout {
  std::size_t side = 0;

  Vertex vertex(long x, long y) const {
    const long s = static_cast<long>(side);
    x = ((x % s) + s) % s;
    y = ((y % s) + s) % s;
    return static_cast<Vertex>(y * s + x);
  }
  /// Edge from (x, y) to (x + 1, y).
  EdgeIndex horizontal(long x, long y) const { return 2 * vertex(x, y); }
  /// Edge from (x, y) to (x, y + 1).
  EdgeIndex vertical(long x, long y) const { return 2 * vertex(x, y) + 1; }
  std::size_t num_vertices() const { return side * side; }
  std::size_t num_edges() const { return 2 * side * side; }
};

/// side x side torus; edges oriented in the +x and +y directions, boundary (0, 0).
inline FiniteGraph build_torus(std::size_t side) {
  if (side < 2) throw std::invalid_argument("torus side must be at least 2");
  TorusLayout L{side};
  std::vector<Edge> edges(L.num_edges());
  for (long y = 0; y < static_cast<long>(side); ++y) {
    for (long x = 0; x < static_cast<long>(side); ++x) {
      edges[L.horizontal(x, y)] = {L.vertex(x, y), L.vertex(x + 1, y), 0};
      edges[L.vertical(x, y)] = {L.vertex(x, y), L.vertex(x, y + 1), 0};
    }
  }
  return FiniteGraph(L.num_vertices(), std::move(edges), 0);
}

/// Translation-invariant neighbourhood of Z^2, given by its offsets.
struct Ambient {
  std::vector<std::array<int, 2>> offsets;

  static Ambient nearest_neighbor() { return {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}}; }

  /// All y with 0 < |x - y|_2 <= 2.
  static Ambient range2() {
    Ambient a;
    for (int dx = -2; dx <= 2; ++dx)
      for (int dy = -2; dy <= 2; ++dy)
        if ((dx != 0 || dy != 0) && dx * dx + dy * dy <= 4) a.offsets.push_back({dx, dy});
    return a;
  }
};

/// A graph whose non-boundary vertices may carry Z^2 coordinates.
struct EmbeddedGraph {
  FiniteGraph graph;
  /// coords[v] for embedded vertices; has_coords[v] false for the wired vertex.
  std::vector<std::array<int, 2>> coords;
  std::vector<char> has_coords;
};

namespace detail {
inline bool positive_half(const std::array<int, 2>& o) {
  return o[0] > 0 || (o[0] == 0 && o[1] > 0);
}
}  // namespace detail

/// Free box {0..side-1}^2 with the given ambient edges; boundary is (0, 0).
inline EmbeddedGraph build_box(const Ambient& ambient, std::size_t side) {
  if (side < 1) throw std::invalid_argument("box side must be positive");
  const int s = static_cast<int>(side);
  EmbeddedGraph out;
  std::vector<Edge> edges;
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x) {
      out.coords.push_back({x, y});
      out.has_coords.push_back(1);
    }
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x)
      for (const auto& o : ambient.offsets) {
        if (!detail::positive_half(o)) continue;
        int x2 = x + o[0], y2 = y + o[1];
        if (x2 < 0 || y2 < 0 || x2 >= s || y2 >= s) continue;
        edges.push_back({static_cast<Vertex>(y * s + x), static_cast<Vertex>(y2 * s + x2), 0});
      }
  out.graph = FiniteGraph(side * side, std::move(edges), 0);
  return out;
}

/// Box [-N, N]^2 of the ambient lattice with every exterior vertex identified
/// to a single boundary vertex (the last index). Self-loops never arise since
/// exterior-exterior edges are dropped.
inline EmbeddedGraph build_wired_box(const Ambient& ambient, std::size_t N) {
  if (N < 1) throw std::invalid_argument("wired box needs N >= 1");
  const int n = static_cast<int>(N);
  const int s = 2 * n + 1;
  auto index = [&](int x, int y) { return static_cast<Vertex>((y + n) * s + (x + n)); };
  auto inside = [&](int x, int y) { return x >= -n && x <= n && y >= -n && y <= n; };
  const Vertex wired = static_cast<Vertex>(s * s);
  EmbeddedGraph out;
  for (int y = -n; y <= n; ++y)
    for (int x = -n; x <= n; ++x) {
      out.coords.push_back({x, y});
      out.has_coords.push_back(1);
    }
  out.coords.push_back({0, 0});
  out.has_coords.push_back(0);
  std::vector<Edge> edges;
  for (int y = -n; y <= n; ++y)
    for (int x = -n; x <= n; ++x)
      for (const auto& o : ambient.offsets) {
        int x2 = x + o[0], y2 = y + o[1];
        if (inside(x2, y2)) {
          if (detail::positive_half(o)) edges.push_back({index(x, y), index(x2, y2), 0});
        } else {
          edges.push_back({index(x, y), wired, 0});
        }
      }
  out.graph = FiniteGraph(wired + 1, std::move(edges), wired);
  return out;
}

// ---------------------------------------------------------------------------
// Text serialization:
//   v <id>
//   e <tail> <head> <potential-id>
//   boundary <id>
// Vertex ids must form 0..n-1. Lines starting with '#' are ignored.

inline void write_graph(std::ostream& os, const FiniteGraph& g) {
  for (Vertex v = 0; v < g.num_vertices(); ++v) os << "v " << v << '\n';
  for (const Edge& e : g.edges()) os << "e " << e.tail << ' ' << e.head << ' ' << e.potential << '\n';
  os << "boundary " << g.boundary() << '\n';
}

inline std::string to_text(const FiniteGraph& g) {
  std::ostringstream os;
  write_graph(os, g);
  return os.str();
}

inline FiniteGraph read_graph(std::istream& is) {
  std::vector<char> declared;
  std::vector<Edge> edges;
  long boundary = -1;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("graph text line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      long id;
      if (!(ls >> id) || id < 0) fail("bad vertex id");
      if (static_cast<std::size_t>(id) >= declared.size()) declared.resize(id + 1, 0);
      if (declared[id]) fail("duplicate vertex");
      declared[id] = 1;
    } else if (tag == "e") {
      long t, h, p;
      if (!(ls >> t >> h >> p) || t < 0 || h < 0 || p < 0) fail("bad edge");
      edges.push_back({static_cast<Vertex>(t), static_cast<Vertex>(h), static_cast<PotentialId>(p)});
    } else if (tag == "boundary") {
      if (!(ls >> boundary) || boundary < 0) fail("bad boundary");
    } else {
      fail("unknown tag '" + tag + "'");
    }
  }
  if (boundary < 0) throw std::invalid_argument("graph text has no boundary line");
  for (char d : declared)
    if (!d) throw std::invalid_argument("vertex ids must be contiguous from 0");
  for (const Edge& e : edges)
    if (e.tail >= declared.size() || e.head >= declared.size())
      throw std::invalid_argument("edge references undeclared vertex");
  return FiniteGraph(declared.size(), std::move(edges), static_cast<Vertex>(boundary));
}

inline FiniteGraph from_text(const std::string& text) {
  std::istringstream is(text);
  return read_graph(is);
}

/// Copy of g with every edge's potential handle replaced.
inline FiniteGraph with_potential(const FiniteGraph& g, PotentialId id) {
  std::vector<Edge> edges = g.edges();
  for (Edge& e : edges) e.potential = id;
  return FiniteGraph(g.num_vertices(), std::move(edges), g.boundary());
}

}  // namespace hdual
