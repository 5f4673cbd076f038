#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hdual/oracle/height_sum.hpp"
#include "hdual/oracle/spin_quadrature.hpp"

namespace hdual {

/// One checked identity or inequality. For inequalities the residual is the
/// violation max(0, -slack), so pass ⇔ |residual| <= tolerance in every case.
struct VerificationReport {
  std::string identity;
  std::string instance;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline VerificationReport make_equality(std::string identity, std::string instance, double lhs, double rhs,
                                        double tol, double residual = std::numeric_limits<double>::quiet_NaN()) {
  if (std::isnan(residual)) residual = std::abs(lhs - rhs);
  return {std::move(identity), std::move(instance), lhs, rhs, residual, tol, std::abs(residual) <= tol};
}

/// Report for lhs <= rhs.
inline VerificationReport make_inequality(std::string identity, std::string instance, double lhs, double rhs,
                                          double tol) {
  const double residual = std::max(0.0, lhs - rhs);
  return {std::move(identity), std::move(instance), lhs, rhs, residual, tol, std::abs(residual) <= tol};
}

inline void write_csv_header(std::ostream& os) { os << "identity,instance,lhs,rhs,residual,tolerance,pass\n"; }

inline void write_csv(std::ostream& os, const VerificationReport& r) {
  auto quoted = [](const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::ostringstream line;
  line.precision(17);
  line << quoted(r.identity) << ',' << quoted(r.instance) << ',' << r.lhs << ',' << r.rhs << ',' << r.residual << ','
       << r.tolerance << ',' << (r.pass ? "true" : "false") << '\n';
  os << line.str();
}

inline bool all_pass(const std::vector<VerificationReport>& rs) {
  for (const auto& r : rs)
    if (!r.pass) return false;
  return true;
}

inline std::string describe(const ModelSpec& m, const std::string& graph_name) {
  std::string pots;
  std::vector<PotentialId> seen;
  for (const Edge& e : m.graph().edges()) {
    if (std::find(seen.begin(), seen.end(), e.potential) != seen.end()) continue;
    seen.push_back(e.potential);
    pots += (pots.empty() ? "" : "+") + m.net.potentials[e.potential].describe();
  }
  return graph_name + "/" + pots + "/" + to_string(m.sector);
}

// ---------------------------------------------------------------------------
// Fourier duality

/// ν_{-#}[exp(i(n, ε))] against Z_#(ε)/Z_# for each twist; m carries the spin sector #.
inline std::vector<VerificationReport> verify_duality(const ModelSpec& m, const std::vector<OneForm<double>>& twists,
                                                      const std::string& instance, double tol = 1e-8) {
  const auto ch = height_characteristic(m.dual_spec(), twists);
  const auto z = twisted_partition(m, twists);
  std::vector<VerificationReport> out;
  for (std::size_t k = 0; k < twists.size(); ++k) {
    const double residual = std::max(std::abs(ch[k].real() - z[k]), std::abs(ch[k].imag()));
    out.push_back(make_equality("duality", instance + "#" + std::to_string(k), ch[k].real(), z[k], tol, residual));
  }
  return out;
}

inline VerificationReport verify_duality(const ModelSpec& m, const OneForm<double>& eps, const std::string& instance,
                                         double tol = 1e-8) {
  return verify_duality(m, std::vector<OneForm<double>>{eps}, instance, tol)[0];
}

// ---------------------------------------------------------------------------
// Covariance duality

/// Height moments under ν_# and spin moments under μ_{-#}, computed once.
struct CovarianceOracle {
  HeightMoments heights;
  SpinMoments spins;

  /// m carries the height sector #.
  explicit CovarianceOracle(const ModelSpec& m) : heights(height_moments(m)), spins(spin_moments(m.dual_spec())) {}

  VerificationReport check(const OneForm<double>& eps, const OneForm<double>& om, const std::string& instance,
                           double tol = 1e-7) const {
    const double lhs = heights.bilinear(eps, om) + spins.bilinear(eps, om);
    return make_equality("covariance_duality", instance, lhs, spins.diagonal(eps, om), tol);
  }

  /// ν[n_e²] = μ[U''_e - U'_e²] for every edge, ν[n_e n_f] = -μ[U'_e U'_f] for every pair.
  std::vector<VerificationReport> pointwise(const std::string& instance, double tol = 1e-7) const {
    std::vector<VerificationReport> out;
    const std::size_t E = heights.E;
    for (std::size_t e = 0; e < E; ++e)
      out.push_back(make_equality("edge_variance_duality", instance + "#e" + std::to_string(e), heights.at(e, e),
                                  spins.mean_u2[e] - spins.at(e, e), tol));
    for (std::size_t a = 0; a < E; ++a)
      for (std::size_t b = a + 1; b < E; ++b)
        out.push_back(make_equality("edge_cross_duality",
                                    instance + "#e" + std::to_string(a) + "e" + std::to_string(b), heights.at(a, b),
                                    -spins.at(a, b), tol));
    return out;
  }
};

inline VerificationReport verify_covariance_duality(const ModelSpec& m, const OneForm<double>& eps,
                                                    const OneForm<double>& om, const std::string& instance,
                                                    double tol = 1e-7) {
  return CovarianceOracle(m).check(eps, om, instance, tol);
}

// ---------------------------------------------------------------------------
// GFF upper bound

/// ν_★[(h, f)²] <= C (Δ^{-1} f, f) with C = max_e |μ_◇[U''_e]|.
inline VerificationReport verify_gff_bound(const ModelSpec& m, const ZeroForm<double>& f, const std::string& instance,
                                           double tol = 1e-9) {
  if (m.sector != Sector::star) throw std::invalid_argument("verify_gff_bound: needs the star height sector");
  const FiniteGraph& g = m.graph();
  GreenSolver solver(g);
  ZeroForm<double> f0 = f;
  f0[g.boundary()] = 0.0;
  const OneForm<double> eps = d(g, solver.solve(f0));
  const auto hm = height_moments(m);
  const auto sm = spin_moments(m.dual_spec());
  double C = 0.0;
  for (double v : sm.mean_u2) C = std::max(C, std::abs(v));
  return make_inequality("gff_bound", instance, hm.bilinear(eps, eps), C * solver.form(f0, f0), tol);
}

// ---------------------------------------------------------------------------
// Projected field

/// Covariance of τ = Δ^{-1} d* U'(J) under μ_★ as a quadratic form, bracketed by
/// inf/sup_e μ_★[U''_e] times (h, Δ^{-1} h) for h = f, g, f + g, f - g; plus the
/// exact identity μ_★[(U', dg)(U', df)] = Σ_e μ_★[U''_e] df_e dg_e.
inline std::vector<VerificationReport> verify_projection_bounds(const ModelSpec& m, const ZeroForm<double>& f,
                                                                const ZeroForm<double>& g,
                                                                const std::string& instance, double tol = 1e-9) {
  if (m.sector != Sector::star) throw std::invalid_argument("verify_projection_bounds: needs the star spin sector");
  const FiniteGraph& G = m.graph();
  GreenSolver solver(G);
  const auto sm = spin_moments(m);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : sm.mean_u2) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  auto rooted = [&](ZeroForm<double> x) {
    x[G.boundary()] = 0.0;
    return x;
  };
  auto combine = [&](double a, double b) {
    ZeroForm<double> x(f.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = a * f[i] + b * g[i];
    return rooted(x);
  };
  std::vector<VerificationReport> out;
  const std::pair<const char*, ZeroForm<double>> tests[] = {
      {"f", rooted(f)}, {"g", rooted(g)}, {"f+g", combine(1, 1)}, {"f-g", combine(1, -1)}};
  for (const auto& [name, h] : tests) {
    const OneForm<double> a = d(G, solver.solve(h));  // (τ, h) = (U'(J), a)
    const double cov = sm.bilinear(a, a);
    const double green = solver.form(h, h);
    out.push_back(make_inequality("projection_lower", instance + "#" + name, lo * green, cov, tol));
    out.push_back(make_inequality("projection_upper", instance + "#" + name, cov, hi * green, tol));
  }
  const OneForm<double> df = d(G, rooted(f)), dg = d(G, rooted(g));
  out.push_back(make_equality("projected_identity", instance, sm.bilinear(dg, df), sm.diagonal(df, dg), tol));
  return out;
}

// ---------------------------------------------------------------------------
// Ginibre core integral

/// ∫∫ over H_◇(S)² (Haar probability) of Π_i (cos(m_i J_{e_i}) + s_i cos(m_i J'_{e_i})).
/// Expanding the product over the subsets S of factors taking the J term gives
/// Σ_S I(S) I(S^c) Π_{i∉S} s_i with I(S) = ∫ Π_{i∈S} cos(m_i J_{e_i}); each I(S)
/// is a trigonometric polynomial integral, exact on a grid of Σ m_i + 1 points.
inline double ginibre_core_integral(const FiniteGraph& g, const std::vector<EdgeIndex>& edges,
                                    const std::vector<int>& mult, const std::vector<int>& signs,
                                    std::size_t budget = kDefaultBudget) {
  const std::size_t n = edges.size();
  if (mult.size() != n || signs.size() != n) throw std::invalid_argument("ginibre_core_integral: list sizes differ");
  if (n > 20) throw std::invalid_argument("ginibre_core_integral: at most 20 factors");
  const Parameterization par = parameterize(g, Sector::diamond);
  const std::size_t D = par.dim();
  std::vector<double> I(std::size_t(1) << n, 0.0);
  for (std::size_t S = 0; S < I.size(); ++S) {
    long total = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (S >> i & 1) total += std::abs(mult[i]);
    const long M = total + 1;
    double points = 1.0;
    for (std::size_t i = 0; i < D; ++i) points *= static_cast<double>(M);
    if (points > static_cast<double>(budget)) throw BudgetExceeded("ginibre_core_integral grid");
    std::vector<long> j(D, 0);
    double sum = 0.0;
    std::size_t count = 0;
    for (;;) {
      double prod = 1.0;
      for (std::size_t i = 0; i < n && prod != 0.0; ++i) {
        if (!(S >> i & 1)) continue;
        long idx = 0;
        for (auto [c, s] : par.terms[edges[i]]) idx += s * j[c];
        idx = ((idx * mult[i]) % M + M) % M;
        prod *= std::cos(2.0 * std::numbers::pi * static_cast<double>(idx) / static_cast<double>(M));
      }
      sum += prod;
      ++count;
      std::size_t k = 0;
      while (k < D && ++j[k] == M) j[k++] = 0;
      if (k == D) break;
    }
    I[S] = sum / static_cast<double>(count);
  }
  const std::size_t all = I.size() - 1;
  double value = 0.0;
  for (std::size_t S = 0; S <= all; ++S) {
    double sign = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!(S >> i & 1)) sign *= signs[i] >= 0 ? 1.0 : -1.0;
    value += sign * I[S] * I[all ^ S];
  }
  return value;
}

// ---------------------------------------------------------------------------
// Monotonicity in a single edge's inverse temperature

/// Observable evaluated by the oracle at one parameter value.
struct SweepTarget {
  enum Kind { height_increment, spin_function } kind = height_increment;
  Vertex x = 0, y = 0;                  // height_increment: ν_★[(h_x - h_y)²]
  EdgeIndex edge = 0;                   // spin_function: μ_◇[F(J_edge)]
  std::function<double(double)> F;     // positive definite
  std::string name;
};

inline double evaluate_target(const Network& net, const SweepTarget& t) {
  if (t.kind == SweepTarget::height_increment) {
    ModelSpec m{net, Sector::star};
    ZeroForm<double> f(net.graph.num_vertices(), 0.0);
    f[t.x] += 1.0;
    f[t.y] -= 1.0;
    GreenSolver solver(net.graph);
    f[net.graph.boundary()] = 0.0;
    const OneForm<double> eps = d(net.graph, solver.solve(f));
    return height_moments(m).bilinear(eps, eps);
  }
  ModelSpec m{net, Sector::diamond};
  SpinGrid grid(m);
  struct Acc {
    const SpinGrid* grid;
    const std::function<double(double)>* F;
    EdgeIndex e;
    double sum = 0.0;
    void add(double w, const std::vector<long>& idx, const double*) { sum += w * (*F)(grid->angle(idx[e])); }
    void merge(const Acc& o) { sum += o.sum; }
  } acc{&grid, &t.F, t.edge};
  const double Z = grid.run(acc);
  return acc.sum / Z;
}

/// Replace the potential of edge e by family(β) for each β in the grid and require
/// the target to be non-decreasing up to tol.
inline VerificationReport monotonicity_sweep(const Network& net, EdgeIndex e,
                                             const std::function<PotentialPair(double)>& family,
                                             const std::vector<double>& betas, const SweepTarget& target,
                                             const std::string& instance, double tol = 1e-9,
                                             std::vector<double>* values = nullptr) {
  std::vector<double> vals;
  for (double b : betas) {
    Network n = net;
    const PotentialId pid = n.add_potential(family(b));
    std::vector<Edge> edges = n.graph.edges();
    edges.at(e).potential = pid;
    n.graph = FiniteGraph(n.graph.num_vertices(), std::move(edges), n.graph.boundary());
    vals.push_back(evaluate_target(n, target));
  }
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < vals.size(); ++i) worst = std::min(worst, vals[i] - vals[i - 1]);
  if (vals.size() < 2) worst = 0.0;
  if (values) *values = vals;
  return make_inequality("monotonicity", instance + "#" + target.name + "@e" + std::to_string(e), 0.0, worst, tol);
}

// ---------------------------------------------------------------------------
// Reflection positivity of the vertex-angle measure

/// Trigonometric polynomial in a subset of vertex angles.
struct TrigPolynomial {
  std::vector<Vertex> vertices;
  struct Term {
    std::vector<int> freq;
    double a = 0.0, b = 0.0;  // a cos(k·θ) + b sin(k·θ)
  };
  std::vector<Term> terms;

  double operator()(const std::vector<double>& theta, const std::vector<Vertex>& relabel = {}) const {
    double s = 0.0;
    for (const auto& t : terms) {
      double phase = 0.0;
      for (std::size_t i = 0; i < vertices.size(); ++i)
        phase += t.freq[i] * theta[relabel.empty() ? vertices[i] : relabel[vertices[i]]];
      s += t.a * std::cos(phase) + t.b * std::sin(phase);
    }
    return s;
  }

  int degree() const {
    int d = 0;
    for (const auto& t : terms) {
      int s = 0;
      for (int k : t.freq) s += std::abs(k);
      d = std::max(d, s);
    }
    return d;
  }
};

/// Expectations over all vertex angles (no gauge fixing) with weight Π_e w_e(θ_head - θ_tail).
class VertexAngleMeasure {
 public:
  VertexAngleMeasure(const Network& net, int M, std::size_t budget = kDefaultBudget) : net_(net), M_(M) {
    const std::size_t V = net.graph.num_vertices();
    double points = 1.0;
    for (std::size_t i = 0; i < V; ++i) points *= M;
    if (points > static_cast<double>(budget)) throw BudgetExceeded("vertex-angle quadrature grid");
    const std::size_t E = net.graph.num_edges();
    w_.resize(E);
    for (EdgeIndex e = 0; e < E; ++e) {
      const auto& s = net.potential(e).spin();
      const double w0 = s.w(0.0);
      for (int j = 0; j < M; ++j) w_[e].push_back(s.w(2.0 * std::numbers::pi * j / M) / w0);
    }
  }

  /// μ[Π_k F_k] for a product of functions of θ.
  double expect(const std::function<double(const std::vector<double>&)>& F) const {
    const std::size_t V = net_.graph.num_vertices();
    std::vector<long> j(V, 0);
    std::vector<double> theta(V, 0.0);
    double num = 0.0, Z = 0.0;
    for (;;) {
      double w = 1.0;
      for (EdgeIndex e = 0; e < net_.graph.num_edges(); ++e) {
        const Edge& ed = net_.graph.edge(e);
        w *= w_[e][((j[ed.head] - j[ed.tail]) % M_ + M_) % M_];
      }
      for (std::size_t v = 0; v < V; ++v) theta[v] = 2.0 * std::numbers::pi * j[v] / M_;
      num += w * F(theta);
      Z += w;
      std::size_t k = 0;
      while (k < V && ++j[k] == M_) j[k++] = 0;
      if (k == V) break;
    }
    return num / Z;
  }

 private:
  Network net_;
  int M_;
  std::vector<std::vector<double>> w_;
};

struct RpResult {
  double positivity;  // μ(G ΘG)
  double symmetry;    // |μ(G ΘF) - μ(F ΘG)|
};

/// Condition (b) μ(G·ΘG) >= 0 and condition (a) μ(G·ΘF) = μ(F·ΘG) for a
/// reflection given as a vertex permutation; G and F live on one half.
inline RpResult rp_check(const Network& net, const std::vector<Vertex>& reflection, const TrigPolynomial& G,
                         const TrigPolynomial& F, int M = 0) {
  if (M <= 0) {
    int kmax = 1;
    for (Vertex v = 0; v < net.graph.num_vertices(); ++v)
      kmax = std::max<int>(kmax, static_cast<int>(net.graph.degree(v)));
    for (const auto& p : net.potentials) M = std::max(M, grid_for(p, kmax));
    M += 2 * std::max(G.degree(), F.degree());
  }
  VertexAngleMeasure mu(net, M);
  RpResult r;
  r.positivity = mu.expect([&](const std::vector<double>& th) { return G(th) * G(th, reflection); });
  const double gf = mu.expect([&](const std::vector<double>& th) { return G(th) * F(th, reflection); });
  const double fg = mu.expect([&](const std::vector<double>& th) { return F(th) * G(th, reflection); });
  r.symmetry = std::abs(gf - fg);
  return r;
}

/// Reflection x -> 1 - x (mod side) of the torus through the midpoints of edges.
inline std::vector<Vertex> torus_edge_reflection(std::size_t side) {
  TorusLayout L{side};
  std::vector<Vertex> r(side * side);
  for (long y = 0; y < static_cast<long>(side); ++y)
    for (long x = 0; x < static_cast<long>(side); ++x) r[L.vertex(x, y)] = L.vertex(1 - x, y);
  return r;
}

/// Vertices of the half {x in [1 - side/2, 0]} of the torus that the edge reflection swaps with its image.
inline std::vector<Vertex> torus_half(std::size_t side) {
  TorusLayout L{side};
  std::vector<Vertex> out;
  const long s = static_cast<long>(side);
  for (long y = 0; y < s; ++y)
    for (long x = 1 - s / 2; x <= 0; ++x) out.push_back(L.vertex(x, y));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace hdual
