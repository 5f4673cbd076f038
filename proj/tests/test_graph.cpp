#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "hdual/green.hpp"
#include "hdual/tree_gauge.hpp"

using namespace hdual;

namespace {

FiniteGraph triangle() { return build_cycle(3); }

FiniteGraph random_graph(std::mt19937_64& rng, std::size_t n, std::size_t extra) {
  std::vector<Edge> edges;
  for (Vertex v = 1; v < n; ++v) {
    std::uniform_int_distribution<Vertex> pick(0, v - 1);
    edges.push_back({pick(rng), v, 0});
  }
  std::uniform_int_distribution<Vertex> any(0, n - 1);
  while (extra > 0) {
    Vertex a = any(rng), b = any(rng);
    if (a == b) continue;
    edges.push_back({a, b, 0});
    --extra;
  }
  return FiniteGraph(n, edges, any(rng));
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Exterior, DOnPath) {
  auto g = build_path(2);
  auto df = d(g, ZeroForm<double>{0.0, 1.0});
  EXPECT_DOUBLE_EQ(df[0], 1.0);
}

TEST(Exterior, DOfConstantVanishes) {
  auto g = build_cycle(5);
  for (double v : d(g, ZeroForm<double>(5, 3.25))) EXPECT_EQ(v, 0.0);
}

TEST(Exterior, DOnTriangle) {
  auto df = d(triangle(), ZeroForm<double>{0, 1, 3});
  EXPECT_EQ(df, (OneForm<double>{1, 2, -3}));
}

TEST(Exterior, DStarSingleEdge) {
  auto div = d_star(build_path(2), OneForm<double>{1.0});
  EXPECT_EQ(div, (ZeroForm<double>{-1.0, 1.0}));
}

TEST(Exterior, CycleIsCoClosed) {
  for (double v : d_star(triangle(), OneForm<double>{1, 1, 1})) EXPECT_EQ(v, 0.0);
}

TEST(Exterior, OrientedNegatesReversedEdge) {
  auto g = build_path(2);
  OneForm<double> w{2.5};
  EXPECT_EQ(oriented(g, w, 0, 0), 2.5);
  EXPECT_EQ(oriented(g, w, 0, 1), -2.5);
}

TEST(Exterior, AdjointnessRandom) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_graph(rng, 3 + trial % 9, trial % 7);
    auto f = random_vector(rng, g.num_vertices());
    auto w = random_vector(rng, g.num_edges());
    // (df, ω) by an explicit double sum over vertex pairs
    double lhs = 0.0;
    for (const Edge& e : g.edges()) {
      for (Vertex x = 0; x < g.num_vertices(); ++x) {
        if (x == e.head) lhs += f[x] * w[&e - g.edges().data()];
        if (x == e.tail) lhs -= f[x] * w[&e - g.edges().data()];
      }
    }
    EXPECT_NEAR(inner(d(g, f), w), inner(f, d_star(g, w)), 1e-12);
    EXPECT_NEAR(lhs, inner(f, d_star(g, w)), 1e-12);
  }
}

TEST(Exterior, LaplacianIsDStarD) {
  std::mt19937_64 rng(11);
  auto g = random_graph(rng, 8, 6);
  auto L = laplacian_matrix(g);
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    ZeroForm<double> delta(g.num_vertices(), 0.0);
    delta[v] = 1.0;
    auto col = d_star(g, d(g, delta));
    for (Vertex u = 0; u < g.num_vertices(); ++u) EXPECT_NEAR(L(u, v), col[u], 1e-12);
  }
}

TEST(Green, PathExample) {
  auto g = build_path(3);
  GreenSolver s(g);
  auto u = s.solve({0.0, 1.0, 0.0});
  EXPECT_NEAR(u[0], 0.0, 1e-14);
  EXPECT_NEAR(u[1], 1.0, 1e-12);
  EXPECT_NEAR(u[2], 1.0, 1e-12);
  EXPECT_NEAR(s.green(1, 1), 2.0, 1e-12);
}

TEST(Green, ZeroRightHandSide) {
  auto g = build_torus(3);
  for (double v : green_solve(g, ZeroForm<double>(9, 0.0))) EXPECT_EQ(v, 0.0);
}

TEST(Green, SymmetricPositiveDefinite) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = random_graph(rng, 4 + trial % 9, trial % 5);
    GreenSolver s(g);
    Eigen::MatrixXd G = s.inverse_matrix();
    EXPECT_LE((G - G.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::MatrixXd red(g.num_vertices() - 1, g.num_vertices() - 1);
    Eigen::Index i = 0;
    for (Vertex a = 0; a < g.num_vertices(); ++a) {
      if (a == g.boundary()) continue;
      Eigen::Index j = 0;
      for (Vertex b = 0; b < g.num_vertices(); ++b) {
        if (b == g.boundary()) continue;
        red(i, j++) = G(a, b);
      }
      ++i;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(red);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Green, IterativeSolverAgreesWithDense) {
  // 46x46 torus has 2116 vertices, above the dense limit.
  auto g = build_torus(46);
  GreenSolver s(g);
  ZeroForm<double> f(g.num_vertices(), 0.0);
  f[47] = 1.0;
  auto u = s.solve(f);
  auto r = d_star(g, d(g, u));
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    if (v != g.boundary()) {
      EXPECT_NEAR(r[v], f[v], 1e-9);
    }
  }
}

TEST(Hodge, ExactFormsFixed) {
  auto g = build_torus(3);
  std::mt19937_64 rng(5);
  auto f = random_vector(rng, 9);
  auto w = d(g, f);
  auto p = hodge_project(g, w, Sector::star);
  for (std::size_t e = 0; e < w.size(); ++e) EXPECT_NEAR(p[e], w[e], 1e-12);
}

TEST(Hodge, CycleProjectsToZero) {
  auto p = hodge_project(triangle(), OneForm<double>{1, 1, 1}, Sector::star);
  for (double v : p) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Hodge, SplitIsOrthogonal) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = random_graph(rng, 3 + trial % 8, 1 + trial % 6);
    auto w = random_vector(rng, g.num_edges());
    auto ps = hodge_project(g, w, Sector::star);
    auto pd = hodge_project(g, w, Sector::diamond);
    EXPECT_NEAR(inner(ps, pd), 0.0, 1e-12);
    for (std::size_t e = 0; e < w.size(); ++e) EXPECT_NEAR(ps[e] + pd[e], w[e], 1e-12);
    for (double v : d_star(g, pd)) EXPECT_NEAR(v, 0.0, 1e-12);
    auto again = hodge_project(g, ps, Sector::star);
    for (std::size_t e = 0; e < w.size(); ++e) EXPECT_NEAR(again[e], ps[e], 1e-12);
  }
}

TEST(TreeGaugeTest, TreeHasNoFreeEdges) {
  TreeGauge t(build_path(5));
  EXPECT_TRUE(t.non_tree_edges().empty());
  EXPECT_EQ(t.tree_edges().size(), 4u);
}

TEST(TreeGaugeTest, TriangleExtension) {
  auto g = triangle();
  TreeGauge t(g);
  ASSERT_EQ(t.num_free(), 1u);
  auto J = t.extend({1.0});
  for (double v : J) EXPECT_NEAR(std::abs(v), 1.0, 1e-15);
  for (double v : d_star(g, J)) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(TreeGaugeTest, TorusExtensionIsCoClosed) {
  auto g = build_torus(2);
  TreeGauge t(g);
  ASSERT_EQ(t.num_free(), 5u);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(5);
    for (double& v : x) v = u(rng);
    for (double v : d_star(g, t.extend(x))) EXPECT_NEAR(v, 0.0, 1e-12);
    for (double v : d_star(g, t.extend_circle(x))) {
      double k = v / (2.0 * std::numbers::pi);
      EXPECT_NEAR(k, std::round(k), 1e-12);
    }
  }
}

TEST(TreeGaugeTest, EachCycleHasOneNonTreeEdge) {
  auto g = build_torus(3);
  TreeGauge t(g);
  EXPECT_EQ(t.tree_edges().size(), g.num_vertices() - 1);
  for (std::size_t i = 0; i < t.cycles().size(); ++i) {
    int non_tree = 0;
    for (auto [e, s] : t.cycles()[i]) non_tree += t.in_tree(e) ? 0 : 1;
    EXPECT_EQ(non_tree, 1);
    EXPECT_EQ(t.cycles()[i].front().first, t.non_tree_edges()[i]);
  }
}

TEST(TreeGaugeTest, LeafToRootOrder) {
  auto g = build_torus(3);
  TreeGauge t(g);
  ASSERT_EQ(t.leaf_to_root().size(), t.tree_edges().size());
  // Peeling tree edges in this order always removes a current tree leaf other than the root.
  std::vector<int> tree_degree(g.num_vertices(), 0);
  for (EdgeIndex e : t.tree_edges()) {
    ++tree_degree[g.edge(e).tail];
    ++tree_degree[g.edge(e).head];
  }
  for (EdgeIndex e : t.leaf_to_root()) {
    const Vertex a = g.edge(e).tail, b = g.edge(e).head;
    const bool a_leaf = tree_degree[a] == 1 && a != g.boundary();
    const bool b_leaf = tree_degree[b] == 1 && b != g.boundary();
    EXPECT_TRUE(a_leaf || b_leaf);
    --tree_degree[a];
    --tree_degree[b];
  }
}

TEST(Builders, Counts) {
  auto t = build_torus(2);
  EXPECT_EQ(t.num_vertices(), 4u);
  EXPECT_EQ(t.num_edges(), 8u);
  auto p = build_path(3);
  EXPECT_EQ(p.num_vertices(), 3u);
  EXPECT_EQ(p.num_edges(), 2u);
  EXPECT_EQ(p.boundary(), 0u);
  auto w = build_wired_box(Ambient::nearest_neighbor(), 1);
  EXPECT_EQ(w.graph.num_vertices(), 10u);
  EXPECT_EQ(w.graph.num_edges(), 24u);  // 12 interior + 12 wired
  EXPECT_EQ(w.graph.degree(w.graph.boundary()), 12u);
  for (Vertex v = 0; v < 9; ++v) EXPECT_EQ(w.graph.degree(v), 4u);
  EXPECT_THROW(build_torus(1), std::invalid_argument);
}

TEST(Builders, TextRoundTrip) {
  auto g = build_wired_box(Ambient::range2(), 2).graph;
  auto text = to_text(g);
  auto back = from_text(text);
  EXPECT_EQ(back, g);
  EXPECT_EQ(to_text(back), text);
}

TEST(Builders, RejectsBadText) {
  EXPECT_THROW(from_text("v 0\nv 1\ne 0 1 0\n"), std::invalid_argument);
  EXPECT_THROW(from_text("v 0\nv 2\nboundary 0\n"), std::invalid_argument);
  EXPECT_THROW(from_text("v 0\nv 1\ne 0 0 0\nboundary 0\n"), std::invalid_argument);
  EXPECT_THROW(from_text("v 0\nv 1\nv 2\ne 0 1 0\nboundary 0\n"), std::invalid_argument);
}
