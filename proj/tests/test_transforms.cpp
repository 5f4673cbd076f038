#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "hdual/corpus.hpp"
#include "hdual/oracle/transport.hpp"
#include "hdual/transforms.hpp"

using namespace hdual;

namespace {

std::vector<ZeroForm<double>> random_weights(std::size_t V, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<ZeroForm<double>> out(count, ZeroForm<double>(V, 0.0));
  for (auto& t : out)
    for (std::size_t v = 1; v < V; ++v) t[v] = U(rng);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// split_edge

TEST(SplitEdge, SingleEdgeXy2) {
  const Network net = homogeneous(build_path(2), make_xy(2.0));
  const Network s = split_edge(net, 0, 2);
  ASSERT_EQ(s.graph.num_edges(), 2u);
  ASSERT_EQ(s.graph.num_vertices(), 3u);
  for (EdgeIndex e = 0; e < 2; ++e) {
    EXPECT_EQ(s.potential(e).family(), Family::xy);
    EXPECT_DOUBLE_EQ(s.potential(e).beta(), 1.0);
  }
  EXPECT_EQ(s.graph.edge(0).tail, 0u);
  EXPECT_EQ(s.graph.edge(1).head, 1u);
}

TEST(SplitEdge, TwiceEqualsFourfold) {
  const Network net = homogeneous(build_path(2), make_xy(2.0));
  const Network a = split_edge(split_edge(split_edge(net, 0, 2), 0, 2), 1, 2);
  const Network b = split_edge(net, 0, 4);
  ASSERT_EQ(a.graph.num_edges(), 4u);
  ASSERT_EQ(b.graph.num_edges(), 4u);
  for (EdgeIndex e = 0; e < 4; ++e) {
    EXPECT_DOUBLE_EQ(a.potential(e).beta(), 0.5);
    EXPECT_DOUBLE_EQ(b.potential(e).beta(), 0.5);
  }
}

TEST(SplitEdge, RejectsNonScalable) {
  const Network net = homogeneous(build_path(2), make_ivgff(1.0));
  EXPECT_THROW(split_edge(net, 0, 2), std::invalid_argument);
}

TEST(SplitEdge, MarginalUnchanged) {
  const Network edge = homogeneous(build_path(2), make_xy(2.0));
  for (const auto& r : verify_split_marginal(edge, 0, 2, random_weights(2, 5, 1), "edge"))
    EXPECT_TRUE(r.pass) << r.instance << ' ' << r.lhs << ' ' << r.rhs;
  const Network square = homogeneous(build_cycle(4), make_xy(1.0));
  for (const auto& r : verify_split_marginal(square, 2, 3, random_weights(4, 5, 2), "c4"))
    EXPECT_TRUE(r.pass) << r.instance << ' ' << r.lhs << ' ' << r.rhs;
}

// ---------------------------------------------------------------------------
// glue_vertices

TEST(Glue, PathEndsGiveDoubledEdge) {
  const Network net = homogeneous(build_path(3), make_xy(1.0));
  std::vector<Vertex> map;
  const Network g = glue_vertices(net, 0, 2, &map);
  EXPECT_EQ(g.graph.num_vertices(), 2u);
  EXPECT_EQ(g.graph.num_edges(), 2u);
  EXPECT_EQ(g.graph.multiplicity(0, 1), 2u);
  EXPECT_EQ(map, (std::vector<Vertex>{0, 1, 0}));
  EXPECT_EQ(g.graph.boundary(), 0u);
}

TEST(Glue, SingleEdgeEndpointsDeleteEdge) {
  const Network net = homogeneous(build_path(2), make_xy(1.0));
  const Network g = glue_vertices(net, 1, 0);
  EXPECT_EQ(g.graph.num_vertices(), 1u);
  EXPECT_EQ(g.graph.num_edges(), 0u);
}

TEST(Glue, VarianceDoesNotIncrease) {
  for (const auto& ng : small_connected_graphs(5)) {
    if (ng.graph.num_vertices() != 4) continue;
    const Network net = homogeneous(ng.graph, make_xy(1.0));
    for (Vertex a = 0; a < 4; ++a)
      for (Vertex b = a + 1; b < 4; ++b) {
        std::vector<Vertex> map;
        const Network g = glue_vertices(net, a, b, &map);
        for (const auto& r : verify_variance_transport(net, g, map, "glue", ng.name))
          EXPECT_TRUE(r.pass) << r.instance << ' ' << r.lhs << ' ' << r.rhs;
      }
  }
}

TEST(Glue, AuxiliaryEdgeLimit) {
  const Network net = homogeneous(build_cycle(4), make_xy(1.0));
  const auto s = auxiliary_edge_sweep(net, 1, 3, {0.0, 0.25, 0.5, 1.0, 2.0, 4.0});
  for (Vertex v = 1; v < 4; ++v) {
    EXPECT_NEAR(s.variances[0][v], s.glued[v], 1e-9) << v;
    for (std::size_t i = 1; i < s.lambdas.size(); ++i) EXPECT_GE(s.variances[i][v], s.variances[i - 1][v] - 1e-9);
    EXPECT_LE(s.variances.back()[v], s.free[v] + 1e-9);
  }
}

// ---------------------------------------------------------------------------
// degree reduction and the star-tree transform

TEST(DegreeReduce, DegreeThreeUnchanged) {
  const Network net = homogeneous(build_star(3), make_xy(1.0));
  const Network r = degree_reduce(net, 0);
  EXPECT_EQ(r.graph, net.graph);
}

TEST(DegreeReduce, DegreeFourHalves) {
  const Network net = homogeneous(build_star(4), make_xy(1.0));
  const Network r = degree_reduce(net, 0);
  EXPECT_EQ(r.graph.neighbors(0).size(), 2u);
  EXPECT_EQ(r.graph.num_vertices(), 7u);
  EXPECT_EQ(r.graph.num_edges(), 8u);
  for (EdgeIndex e = 0; e < r.graph.num_edges(); ++e) EXPECT_DOUBLE_EQ(r.potential(e).beta(), 0.5);
}

TEST(DegreeReduce, DegreeFiveIterates) {
  Network net = homogeneous(build_star(5), make_xy(1.0));
  Network r = degree_reduce(net, 0);
  EXPECT_EQ(r.graph.neighbors(0).size(), 3u);  // two glued midpoints plus the odd leaf
  r = degree_reduce(r, 0);
  EXPECT_EQ(r.graph.neighbors(0).size(), 3u);
}

TEST(DegreeReduce, VarianceDoesNotIncrease) {
  const Network net = homogeneous(build_star(4), make_xy(1.0));
  std::vector<Vertex> map;
  const Network r = degree_reduce(net, 0, &map);
  for (const auto& rep : verify_variance_transport(net, r, map, "degree_reduce", "star4"))
    EXPECT_TRUE(rep.pass) << rep.instance << ' ' << rep.lhs << ' ' << rep.rhs;
}

TEST(StarTree, StarCentre) {
  const auto res = star_tree_transform(homogeneous(build_star(4), make_xy(1.0)));
  EXPECT_LE(res.network.graph.neighbors(0).size(), 3u);
}

TEST(StarTree, WiredBoxDegrees) {
  const auto box = build_wired_box(Ambient::nearest_neighbor(), 1);
  const auto res = star_tree_transform(homogeneous(box.graph, make_xy(1.0)));
  const FiniteGraph& g = res.network.graph;
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (v != g.boundary()) {
      EXPECT_LE(g.neighbors(v).size(), 3u) << v;
    }
  // Parallel edges are merged.
  EXPECT_EQ(simple_edge_count(g), g.num_edges());
}

TEST(StarTree, VarianceDoesNotIncrease) {
  for (const auto& ng : small_connected_graphs(5)) {
    bool high = false;
    for (Vertex v = 1; v < ng.graph.num_vertices(); ++v) high = high || ng.graph.neighbors(v).size() >= 4;
    if (!high) continue;
    const Network net = homogeneous(ng.graph, make_xy(1.0));
    const auto res = star_tree_transform(net);
    for (const auto& r : verify_variance_transport(net, res.network, res.log.vertex_map, "star_tree", ng.name))
      EXPECT_TRUE(r.pass) << r.instance << ' ' << r.lhs << ' ' << r.rhs;
  }
}

TEST(StarTree, LogReplays) {
  const auto box = build_wired_box(Ambient::nearest_neighbor(), 1);
  const Network net = homogeneous(box.graph, make_xy(1.0));
  const auto res = star_tree_transform(net);
  std::istringstream is(res.log.text());
  const Network again = replay(net, parse_ops(is));
  EXPECT_EQ(to_text(again.graph), to_text(res.network.graph));
}

TEST(MergeParallel, XyProduct) {
  const Network net = homogeneous(build_cycle(2), make_xy(1.0));
  const Network m = merge_parallel_edges(net);
  ASSERT_EQ(m.graph.num_edges(), 1u);
  EXPECT_EQ(m.potential(0).family(), Family::product);
  // The merged edge carries the product weight c_n(1)².
  const double r = m.potential(0).c(1) / m.potential(0).c(0);
  const double x = make_xy(1.0).c(1) / make_xy(1.0).c(0);
  EXPECT_NEAR(r, x * x, 1e-14);
}

// ---------------------------------------------------------------------------
// planarization

TEST(Planarize, DiagonalMidpoint) {
  const auto box = build_box(Ambient::range2(), 3);
  EmbeddedNetwork in{homogeneous(box.graph, make_xy(1.0)), box.coords, box.has_coords};
  const auto out = planarize_long_range(in);
  const FiniteGraph& g = out.network.graph;
  // The diagonal (0,0)-(1,1) becomes (0,0)-(1,0)-(1,1) with halved potentials.
  const Vertex a = 0, corner = 1, b = 4;
  EXPECT_GE(g.multiplicity(a, corner), 2u);
  EXPECT_GE(g.multiplicity(corner, b), 2u);
  EXPECT_EQ(g.multiplicity(a, b), 0u);
  EXPECT_EQ(g.num_vertices(), 9u);
  EXPECT_TRUE(euler_bound_holds(g));
}

TEST(Planarize, NearestNeighbourUnchanged) {
  const auto box = build_box(Ambient::nearest_neighbor(), 3);
  EmbeddedNetwork in{homogeneous(box.graph, make_xy(1.0)), box.coords, box.has_coords};
  EXPECT_EQ(planarize_long_range(in).network.graph, box.graph);
}

TEST(Planarize, EulerBoundOnFiveBox) {
  const auto box = build_box(Ambient::range2(), 5);
  EXPECT_FALSE(euler_bound_holds(box.graph));
  EmbeddedNetwork in{homogeneous(box.graph, make_xy(1.0)), box.coords, box.has_coords};
  EXPECT_TRUE(euler_bound_holds(planarize_long_range(in).network.graph));
}
