#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hdual/corpus.hpp"
#include "hdual/oracle/verify.hpp"
#include "hdual/transforms.hpp"

using namespace hdual;

namespace {

const double kPi = std::numbers::pi;

double bessel_series(int n, double x) {
  double term = std::pow(x / 2.0, n) / std::tgamma(n + 1.0);
  double s = term;
  for (int k = 1; k < 200; ++k) {
    term *= (x / 2.0) * (x / 2.0) / (k * double(k + n));
    s += term;
    if (term < 1e-18 * s) break;
  }
  return s;
}

// Periodic trapezoid rule on [0, 2π), exact for trigonometric polynomials of degree < points.
double circle_average(const std::function<double(double)>& f, int points = 4096) {
  double s = 0.0;
  for (int j = 0; j < points; ++j) s += f(2.0 * kPi * j / points);
  return s / points;
}

ModelSpec spec(const FiniteGraph& g, const PotentialPair& p, Sector s) { return make_spec(g, p, s); }

OneForm<double> unit(std::size_t E, EdgeIndex e, double v = 1.0) {
  OneForm<double> x(E, 0.0);
  x[e] = v;
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// height_expect

TEST(HeightExpect, SingleEdgeSecondMoment) {
  const auto m = spec(build_path(2), make_xy(1.0), Sector::star);
  double num = 0.0, den = 0.0;
  for (int n = -40; n <= 40; ++n) {
    const double c = bessel_series(std::abs(n), 1.0);
    num += n * n * c;
    den += c;
  }
  const auto v = height_expect(m, [](const std::vector<long>& n) { return double(n[0] * n[0]); });
  EXPECT_NEAR(v.value, num / den, 1e-12);
  EXPECT_LE(v.tail, 1e-12);
}

TEST(HeightExpect, TreeDiamondIsPointMass) {
  const auto m = spec(build_star(3), make_xy(1.0), Sector::diamond);
  const auto v = height_expect(m, [](const std::vector<long>& n) {
    double s = 7.0;
    for (long x : n) s += double(x * x);
    return s;
  });
  EXPECT_DOUBLE_EQ(v.value, 7.0);
}

TEST(HeightExpect, TriangleDiamondIvgff) {
  const auto m = spec(build_cycle(3), make_ivgff(1.0), Sector::diamond);
  double num = 0.0, den = 0.0;
  for (int k = -30; k <= 30; ++k) {
    num += k * k * std::exp(-3.0 * k * k);
    den += std::exp(-3.0 * k * k);
  }
  for (EdgeIndex e = 0; e < 3; ++e) {
    const auto v = height_expect(m, [e](const std::vector<long>& n) { return double(n[e] * n[e]); });
    EXPECT_NEAR(v.value, num / den, 1e-13);
  }
}

TEST(HeightExpect, BudgetExceeded) {
  auto m = spec(build_torus(2), make_xy(2.0), Sector::star);
  m.budget = 10;
  EXPECT_THROW(height_expect(m, [](const std::vector<long>&) { return 1.0; }), BudgetExceeded);
}

TEST(HeightExpect, TruncationSelfConsistency) {
  auto base = spec(build_cycle(4), make_xy(1.0), Sector::star);
  auto phi = [](const std::vector<long>& n) { return double(n[0] * n[0] + n[1] * n[2]); };
  for (long K : {2L, 3L, 4L}) {
    auto a = base, b = base;
    a.K = K;
    b.K = K + 2;
    const auto va = height_expect(a, phi), vb = height_expect(b, phi);
    // φ is bounded by 2(K+2)² on the larger box.
    const double bound = 2.0 * (K + 2) * (K + 2) * 2.0 * (va.tail + vb.tail) + 1e-12;
    EXPECT_LE(std::abs(va.value - vb.value), bound) << K;
  }
}

// ---------------------------------------------------------------------------
// spin_expect / twisted_partition

TEST(SpinExpect, SingleEdgeDiamondPointMass) {
  const auto m = spec(build_path(2), make_xy(1.0), Sector::diamond);
  EXPECT_DOUBLE_EQ(spin_expect(m, [](const OneForm<double>& J) { return 3.0 + J[0]; }), 3.0);
}

TEST(SpinExpect, SingleEdgeStarSecondDerivative) {
  for (const auto& p : corpus_potentials()) {
    const auto m = spec(build_path(2), p, Sector::star);
    const auto& s = p.spin();
    const double num = circle_average([&](double a) { return s.U2(a) * s.w(a); });
    const double den = circle_average([&](double a) { return s.w(a); });
    EXPECT_NEAR(spin_expect(m, [&](const OneForm<double>& J) { return s.U2(J[0]); }), num / den, 1e-11)
        << p.describe();
  }
}

TEST(SpinExpect, TriangleDiamondSymmetry) {
  const auto m = spec(build_cycle(3), make_xy(1.0), Sector::diamond);
  double v[3];
  for (EdgeIndex e = 0; e < 3; ++e) v[e] = spin_expect(m, [e](const OneForm<double>& J) { return std::cos(J[e]); });
  EXPECT_NEAR(v[0], v[1], 1e-13);
  EXPECT_NEAR(v[1], v[2], 1e-13);
  EXPECT_GT(v[0], 0.0);
}

TEST(SpinExpect, GridRefinementSelfConsistency) {
  auto m = spec(build_torus(2), make_xy(1.0), Sector::star);
  SpinGrid grid(m);
  const auto base = spin_moments(m);
  m.M = 2 * grid.M();
  const auto fine = spin_moments(m);
  for (std::size_t e = 0; e < base.E; ++e) EXPECT_NEAR(base.mean_u2[e], fine.mean_u2[e], 1e-12);
}

TEST(TwistedPartition, ZeroTwistIsOne) {
  for (Sector s : {Sector::star, Sector::diamond}) {
    const auto m = spec(build_cycle(4), make_xy(1.0), s);
    EXPECT_NEAR(twisted_partition(m, OneForm<double>(4, 0.0)), 1.0, 1e-14);
  }
}

TEST(TwistedPartition, TreeDiamondIsRatio) {
  const auto p = make_xy(1.0);
  const auto m = spec(build_path(2), p, Sector::diamond);
  EXPECT_NEAR(twisted_partition(m, OneForm<double>{0.7}), p.spin().w(0.7) / p.spin().w(0.0), 1e-14);
}

TEST(TwistedPartition, TriangleMatchesCharacteristicFunction) {
  const auto m = spec(build_cycle(3), make_xy(1.0), Sector::diamond);
  const OneForm<double> eps{0.3, 0.0, 0.0};
  const auto ch = height_characteristic(m.dual_spec(), {eps});
  EXPECT_NEAR(ch[0].real(), twisted_partition(m, eps), 1e-10);
  EXPECT_NEAR(ch[0].imag(), 0.0, 1e-14);
}

TEST(Threads, DeterministicAcrossThreadCounts) {
  const auto m = spec(build_torus(2), make_xy(1.0), Sector::diamond);
  const auto eps = random_twists(8, 3, 5);
  set_thread_count(1);
  const auto a = twisted_partition(m, eps);
  const auto ha = height_characteristic(m.dual_spec(), eps);
  set_thread_count(3);
  const auto b = twisted_partition(m, eps);
  const auto hb = height_characteristic(m.dual_spec(), eps);
  set_thread_count(1);
  for (std::size_t k = 0; k < eps.size(); ++k) {
    EXPECT_EQ(a[k], b[k]);
    EXPECT_EQ(ha[k], hb[k]);
  }
}

// ---------------------------------------------------------------------------
// verify_duality

TEST(Duality, SingleEdge) {
  const auto p = make_xy(1.0);
  const auto m = spec(build_path(2), p, Sector::diamond);
  const auto r = verify_duality(m, OneForm<double>{0.7}, "edge");
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.rhs, p.spin().w(0.7) / p.spin().w(0.0), 1e-14);
  // ν_★[e^{inε}] by direct series.
  double num = 0.0, den = 0.0;
  for (int n = -40; n <= 40; ++n) {
    num += std::cos(0.7 * n) * bessel_series(std::abs(n), 1.0);
    den += bessel_series(std::abs(n), 1.0);
  }
  EXPECT_NEAR(r.lhs, num / den, 1e-12);
}

TEST(Duality, ZeroTwist) {
  for (Sector s : {Sector::star, Sector::diamond}) {
    const auto r = verify_duality(spec(build_torus(2), make_xy(0.5), s), OneForm<double>(8, 0.0), "torus");
    EXPECT_NEAR(r.lhs, 1.0, 1e-12);
    EXPECT_NEAR(r.rhs, 1.0, 1e-12);
  }
}

TEST(Duality, TorusIvgffRandomTwists) {
  for (Sector s : {Sector::star, Sector::diamond}) {
    const auto rs = verify_duality(spec(build_torus(2), make_ivgff(1.0), s), random_twists(8, 4, 11), "torus");
    for (const auto& r : rs) EXPECT_LE(r.residual, 1e-8) << r.instance;
  }
}

TEST(Duality, MixedPotentials) {
  Network net = homogeneous(build_cycle(4), make_xy(1.0));
  const auto lip = net.add_potential(make_lipschitz(1.5));
  auto edges = net.graph.edges();
  edges[2].potential = lip;
  net.graph = FiniteGraph(4, edges, 0);
  for (Sector s : {Sector::star, Sector::diamond}) {
    const auto rs = verify_duality(ModelSpec{net, s}, random_twists(4, 5, 3), "mixed");
    EXPECT_TRUE(all_pass(rs));
  }
}

// ---------------------------------------------------------------------------
// covariance duality

TEST(CovarianceDuality, SingleEdgeStar) {
  const auto p = make_xy(1.0);
  const auto m = spec(build_path(2), p, Sector::star);
  CovarianceOracle oracle(m);
  EXPECT_NEAR(oracle.heights.at(0, 0), p.spin().U2(0.0), 1e-12);
  EXPECT_TRUE(oracle.check({1.0}, {1.0}, "edge").pass);
}

TEST(CovarianceDuality, EdgeVarianceOnTriangle) {
  for (Sector s : {Sector::star, Sector::diamond}) {
    CovarianceOracle oracle(spec(build_cycle(3), make_xy(1.0), s));
    for (const auto& r : oracle.pointwise("triangle")) EXPECT_LE(r.residual, 1e-9) << r.identity << r.instance;
    EXPECT_TRUE(oracle.check(unit(3, 1), unit(3, 1), "triangle").pass);
  }
}

TEST(CovarianceDuality, CrossTermOnSquare) {
  const auto m = spec(build_cycle(4), make_xy(1.0), Sector::star);
  CovarianceOracle oracle(m);
  const double lhs = oracle.heights.at(0, 2);
  EXPECT_NEAR(lhs, -oracle.spins.at(0, 2), 1e-9);
  EXPECT_GT(std::abs(lhs), 1e-4);
}

TEST(CovarianceDuality, RandomFormsAllPotentials) {
  for (const auto& p : corpus_potentials())
    for (Sector s : {Sector::star, Sector::diamond}) {
      CovarianceOracle oracle(spec(build_torus(2), p, s));
      const auto f = random_twists(8, 6, 17);
      for (std::size_t k = 0; k + 1 < f.size(); k += 2) {
        const auto r = oracle.check(f[k], f[k + 1], p.describe());
        EXPECT_LE(r.residual, 1e-7) << r.instance << ' ' << to_string(s);
      }
    }
}

// ---------------------------------------------------------------------------
// GFF bound

TEST(GffBound, ZeroFunction) {
  const auto r = verify_gff_bound(spec(build_cycle(4), make_xy(1.0), Sector::star), ZeroForm<double>(4, 0.0), "c4");
  EXPECT_DOUBLE_EQ(r.lhs, 0.0);
  EXPECT_DOUBLE_EQ(r.rhs, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(GffBound, PathIsTight) {
  // On a tree the dual measure is a point mass, C = U''(0) = ν[n²] and h_{v1} = n_0.
  const auto p = make_xy(1.0);
  const auto r = verify_gff_bound(spec(build_path(3), p, Sector::star), {0.0, 1.0, 0.0}, "path3");
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.rhs, p.spin().U2(0.0), 1e-12);  // Δ^{-1}(v1, v1) = G(v1, v1)/deg(v1) = 1
  EXPECT_NEAR(r.lhs, r.rhs, 1e-10);
}

TEST(GffBound, SquareRandomIntegerFunction) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> U(-3, 3);
  for (int trial = 0; trial < 5; ++trial) {
    ZeroForm<double> f(4, 0.0);
    for (std::size_t v = 1; v < 4; ++v) f[v] = U(rng);
    const auto r = verify_gff_bound(spec(build_cycle(4), make_xy(1.0), Sector::star), f, "c4");
    EXPECT_TRUE(r.pass) << r.lhs << ' ' << r.rhs;
  }
}

TEST(GffBound, StrictOnTorus) {
  // On a single cycle U'(J) is a constant circulation and the bound is an equality;
  // the torus has two independent cycles and the discarded term is positive.
  ZeroForm<double> f{0.0, 1.0, -1.0, 2.0};
  const auto r = verify_gff_bound(spec(build_torus(2), make_xy(1.0), Sector::star), f, "torus");
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.rhs - r.lhs, 1e-6);
}

// ---------------------------------------------------------------------------
// projected field

TEST(Projection, SingleEdgeCoincides) {
  const auto rs = verify_projection_bounds(spec(build_path(2), make_xy(1.0), Sector::star), {0.0, 1.0}, {0.0, 1.0},
                                           "edge");
  for (const auto& r : rs) {
    EXPECT_TRUE(r.pass) << r.identity;
    EXPECT_NEAR(r.lhs, r.rhs, 1e-12) << r.identity << r.instance;
  }
}

TEST(Projection, TriangleDelta) {
  const auto rs = verify_projection_bounds(spec(build_cycle(3), make_xy(1.0), Sector::star), {0.0, 1.0, 0.0},
                                           {0.0, 1.0, 0.0}, "triangle");
  for (const auto& r : rs) EXPECT_TRUE(r.pass) << r.identity << r.instance << ' ' << r.lhs << ' ' << r.rhs;
}

TEST(Projection, SquareIdentity) {
  for (const auto& p : corpus_potentials()) {
    const auto rs = verify_projection_bounds(spec(build_cycle(4), p, Sector::star), {0.0, 1.0, -2.0, 0.5},
                                             {0.0, 0.3, 1.0, 1.0}, p.describe());
    for (const auto& r : rs) EXPECT_TRUE(r.pass) << r.identity << r.instance << ' ' << r.lhs << ' ' << r.rhs;
    EXPECT_LE(rs.back().residual, 1e-9);
  }
}

// ---------------------------------------------------------------------------
// Ginibre core integral

TEST(Ginibre, ConstantFactor) {
  const auto g = build_cycle(3);
  EXPECT_NEAR(ginibre_core_integral(g, {0}, {0}, {+1}), 2.0, 1e-14);
  EXPECT_NEAR(ginibre_core_integral(g, {0}, {0}, {-1}), 0.0, 1e-14);
}

TEST(Ginibre, MatchesDirectDoubleIntegral) {
  // On a consistently oriented cycle every edge carries the single free angle.
  const auto g = build_cycle(3);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<EdgeIndex> es;
    std::vector<int> ms, ss;
    const int n = 1 + trial % 3;
    for (int i = 0; i < n; ++i) {
      es.push_back(rng() % 3);
      ms.push_back(int(rng() % 4));
      ss.push_back(rng() % 2 ? 1 : -1);
    }
    const double direct = circle_average(
        [&](double x) {
          return circle_average(
              [&](double y) {
                double prod = 1.0;
                for (int i = 0; i < n; ++i) prod *= std::cos(ms[i] * x) + ss[i] * std::cos(ms[i] * y);
                return prod;
              },
              64);
        },
        64);
    const double v = ginibre_core_integral(g, es, ms, ss);
    EXPECT_NEAR(v, direct, 1e-12);
    EXPECT_GE(v, -1e-10);
  }
}

TEST(Ginibre, TriangleExample) {
  EXPECT_GE(ginibre_core_integral(build_cycle(3), {0, 1}, {1, 2}, {+1, -1}), -1e-10);
}

TEST(Ginibre, TorusRandomNonNegative) {
  const auto g = build_torus(2);
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<EdgeIndex> es;
    std::vector<int> ms, ss;
    for (int i = 0; i < 4; ++i) {
      es.push_back(rng() % 8);
      ms.push_back(int(rng() % 3));
      ss.push_back(rng() % 2 ? 1 : -1);
    }
    EXPECT_GE(ginibre_core_integral(g, es, ms, ss), -1e-10);
  }
}

// ---------------------------------------------------------------------------
// monotonicity

TEST(Monotonicity, SingleEdgeVariance) {
  const Network net = homogeneous(build_path(2), make_xy(1.0));
  SweepTarget t;
  t.x = 1;
  t.y = 0;
  t.name = "var";
  std::vector<double> vals;
  const auto r = monotonicity_sweep(net, 0, make_xy, {0.0, 0.5, 1.0, 2.0}, t, "edge", 1e-9, &vals);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(vals[0], 0.0, 1e-15);
  for (std::size_t i = 1; i < vals.size(); ++i) {
    EXPECT_GT(vals[i], vals[i - 1]);
    const double b = std::vector<double>{0.0, 0.5, 1.0, 2.0}[i];
    EXPECT_NEAR(vals[i], make_xy(b).spin().U2(0.0), 1e-12);
  }
}

TEST(Monotonicity, TriangleCosine) {
  const Network net = homogeneous(build_cycle(3), make_xy(1.0));
  SweepTarget t;
  t.kind = SweepTarget::spin_function;
  t.edge = 1;
  t.F = [](double a) { return std::cos(a); };
  t.name = "cos";
  EXPECT_TRUE(monotonicity_sweep(net, 0, make_xy, {0.0, 0.25, 0.5, 1.0, 2.0}, t, "c3").pass);
}

TEST(Monotonicity, SquareHeightVariance) {
  const Network net = homogeneous(build_cycle(4), make_ivgff(1.0));
  SweepTarget t;
  t.x = 1;
  t.y = 2;
  t.name = "var";
  std::vector<double> vals;
  EXPECT_TRUE(monotonicity_sweep(net, 1, make_xy, {0.0, 0.25, 0.5, 1.0, 2.0}, t, "c4", 1e-9, &vals).pass);
  EXPECT_GT(vals.back(), vals.front());
}

// ---------------------------------------------------------------------------
// reflection positivity

TEST(ReflectionPositivity, ConstantTestFunction) {
  const Network net = homogeneous(build_torus(2), make_xy(1.0));
  TrigPolynomial one;
  one.vertices = torus_half(2);
  one.terms.push_back({{0, 0}, 1.0, 0.0});
  const auto r = rp_check(net, torus_edge_reflection(2), one, one);
  EXPECT_NEAR(r.positivity, 1.0, 1e-12);
  EXPECT_NEAR(r.symmetry, 0.0, 1e-14);
}

TEST(ReflectionPositivity, CosineOnHalf) {
  const Network net = homogeneous(build_torus(2), make_xy(1.0));
  const auto half = torus_half(2);
  ASSERT_EQ(half.size(), 2u);
  TrigPolynomial G;
  G.vertices = half;
  G.terms.push_back({{1, -1}, 1.0, 0.0});
  TrigPolynomial F;
  F.vertices = half;
  F.terms.push_back({{1, 0}, 0.5, 0.3});
  const auto r = rp_check(net, torus_edge_reflection(2), G, F);
  EXPECT_GE(r.positivity, -1e-9);
  EXPECT_LE(r.symmetry, 1e-9);
}

TEST(ReflectionPositivity, RandomTrigPolynomials) {
  const Network net = homogeneous(build_torus(2), make_xy(0.5));
  const auto half = torus_half(2);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> K(-2, 2);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 5; ++trial) {
    TrigPolynomial G, F;
    G.vertices = F.vertices = half;
    for (int t = 0; t < 4; ++t) {
      G.terms.push_back({{K(rng), K(rng)}, N(rng), N(rng)});
      F.terms.push_back({{K(rng), K(rng)}, N(rng), N(rng)});
    }
    const auto r = rp_check(net, torus_edge_reflection(2), G, F);
    EXPECT_GE(r.positivity, -1e-9);
    EXPECT_LE(r.symmetry, 1e-9);
  }
}

// ---------------------------------------------------------------------------
// reports and corpus

TEST(Report, CsvLine) {
  std::ostringstream os;
  write_csv_header(os);
  write_csv(os, make_equality("duality", "a,b", 1.0, 1.0, 1e-8));
  EXPECT_EQ(os.str(), "identity,instance,lhs,rhs,residual,tolerance,pass\nduality,\"a,b\",1,1,0,1e-08,true\n");
  const auto bad = make_inequality("gff_bound", "x", 2.0, 1.0, 1e-9);
  EXPECT_FALSE(bad.pass);
  EXPECT_DOUBLE_EQ(bad.residual, 1.0);
}

TEST(Corpus, ConnectedGraphCounts) {
  const auto gs = small_connected_graphs(5);
  ASSERT_EQ(gs.size(), 22u);
  std::size_t per[6] = {};
  for (const auto& g : gs) ++per[g.graph.num_edges()];
  EXPECT_EQ(per[1], 1u);
  EXPECT_EQ(per[2], 1u);
  EXPECT_EQ(per[3], 3u);
  EXPECT_EQ(per[4], 5u);
  EXPECT_EQ(per[5], 12u);
  const auto all = corpus_graphs();
  EXPECT_EQ(all.size(), 24u);
  EXPECT_EQ(all[22].graph.multiplicity(0, 1), 3u);
}
