#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hdual/corpus.hpp"
#include "hdual/mcmc.hpp"
#include "hdual/observables.hpp"
#include "hdual/oracle/transport.hpp"
#include "hdual/oracle/verify.hpp"
#include "hdual/stats.hpp"

namespace hdual {

/// Knobs shared by every corpus suite. Defaults are the acceptance settings.
struct SuiteOptions {
  std::uint64_t seed = 20240611;
  std::size_t budget = kDefaultBudget;
  std::size_t twists = 20;        // per instance and sector
  std::size_t random_forms = 3;   // random test forms per instance
  std::vector<double> betas{0.0, 0.25, 0.5, 1.0, 2.0};
  std::size_t ginibre_trials = 100;
  std::size_t rp_trials = 50;
  // chains against the oracle
  std::size_t mcmc_sweeps = 1'000'000;
  std::size_t mcmc_burn_in = 10'000;
  // torus experiments
  std::size_t torus_side = 16;
  std::vector<double> torus_betas{0.5, 1.1};
  std::size_t torus_sweeps = 1'000'000, torus_burn_in = 20'000, torus_thin = 5;
  std::size_t clt_side = 32;
  double clt_beta = 1.0;
  std::vector<std::size_t> clt_lengths{8, 16};
  std::size_t clt_sweeps = 400'000, clt_burn_in = 20'000, clt_thin = 10;
  double nsigma = 3.0;
  std::function<void(const std::string&)> progress;  // optional log sink
};

struct SuiteResult {
  std::string name;
  std::vector<VerificationReport> reports;
  double seconds = 0.0;
  std::vector<std::string> notes;

  bool pass() const { return !reports.empty() && all_pass(reports); }
  std::size_t failures() const {
    std::size_t k = 0;
    for (const auto& r : reports) k += !r.pass;
    return k;
  }
  void append(const std::vector<VerificationReport>& rs) { reports.insert(reports.end(), rs.begin(), rs.end()); }
};

/// Graph and homogeneous potential from the corpus.
struct CorpusInstance {
  std::string name;
  FiniteGraph graph;
  PotentialPair potential;
  Network network() const { return homogeneous(graph, potential); }
};

inline std::vector<CorpusInstance> corpus_instances() {
  std::vector<CorpusInstance> out;
  for (const auto& ng : corpus_graphs())
    for (const auto& p : corpus_potentials()) out.push_back({ng.name + "/" + p.describe(), ng.graph, p});
  return out;
}

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline void say(const SuiteOptions& o, const std::string& s) {
  if (o.progress) o.progress(s);
}

inline ZeroForm<double> random_vertex_form(std::size_t V, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  ZeroForm<double> f(V);
  for (double& x : f) x = U(rng);
  return f;
}

inline ModelSpec spec_of(const Network& net, Sector s, const SuiteOptions& o) {
  ModelSpec m{net, s};
  m.budget = o.budget;
  return m;
}

inline SuiteResult finish(SuiteResult r, const Stopwatch& w, const SuiteOptions& o) {
  r.seconds = w.seconds();
  say(o, r.name + ": " + std::to_string(r.reports.size()) + " reports, " + std::to_string(r.failures()) +
             " failed, " + std::to_string(r.seconds) + " s");
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Oracle identities on the corpus

/// Characteristic functions of heights against twisted partition functions, both sectors.
inline SuiteResult duality_suite(const SuiteOptions& o = {}) {
  detail::Stopwatch w;
  SuiteResult r;
  r.name = "duality";
  std::size_t k = 0;
  for (const auto& inst : corpus_instances())
    for (Sector s : {Sector::star, Sector::diamond}) {
      const ModelSpec m = detail::spec_of(inst.network(), s, o);
      const auto twists = random_twists(inst.graph.num_edges(), o.twists, chain_seed(o.seed, k++));
      r.append(verify_duality(m, twists, inst.name + "/" + to_string(s)));
    }
  return detail::finish(std::move(r), w, o);
}

/// Covariance duality for random pairs of 1-forms plus the edge-wise specialisations.
inline SuiteResult covariance_suite(const SuiteOptions& o = {}) {
  detail::Stopwatch w;
  SuiteResult r;
  r.name = "covariance";
  std::size_t k = 0;
  for (const auto& inst : corpus_instances())
    for (Sector s : {Sector::star, Sector::diamond}) {
      const std::string name = inst.name + "/" + to_string(s);
      const CovarianceOracle oracle(detail::spec_of(inst.network(), s, o));
      const auto forms = random_twists(inst.graph.num_edges(), 2 * o.random_forms, chain_seed(o.seed, k++));
      for (std::size_t i = 0; i < o.random_forms; ++i)
        r.reports.push_back(oracle.check(forms[2 * i], forms[2 * i + 1], name + "#" + std::to_string(i)));
      r.append(oracle.pointwise(name));
    }
  return detail::finish(std::move(r), w, o);
}

/// GFF upper bound for vertex indicators and random vertex weights, and one
/// cyclic instance where the bound must be strict.
inline SuiteResult gff_suite(const SuiteOptions& o = {}) {
  detail::Stopwatch w;
  SuiteResult r;
  r.name = "gff_bound";
  std::size_t k = 0;
  for (const auto& inst : corpus_instances()) {
    const ModelSpec m = detail::spec_of(inst.network(), Sector::star, o);
    const std::size_t V = inst.graph.num_vertices();
    std::mt19937_64 rng(chain_seed(o.seed, k++));
    for (Vertex v = 0; v < V; ++v) {
      if (v == inst.graph.boundary()) continue;
      ZeroForm<double> f(V, 0.0);
      f[v] = 1.0;
      r.reports.push_back(verify_gff_bound(m, f, inst.name + "#v" + std::to_string(v)));
    }
    for (std::size_t i = 0; i < o.random_forms; ++i)
      r.reports.push_back(verify_gff_bound(m, detail::random_vertex_form(V, rng), inst.name + "#r" + std::to_string(i)));
  }
  // On a single cycle U'(J) is a constant circulation and the bound is an equality,
  // so strictness is asserted on the 2x2 torus.
  const auto strict = verify_gff_bound(detail::spec_of(homogeneous(build_torus(2), make_xy(1.0)), Sector::star, o),
                                       ZeroForm<double>{0.0, 1.0, -1.0, 2.0}, "torus2/xy(1)");
  r.reports.push_back(make_inequality("gff_strict_slack", strict.instance, 1e-6, strict.rhs - strict.lhs, 0.0));
  return detail::finish(std::move(r), w, o);
}

/// Sandwich bounds on the covariance of τ and the exact identity behind them.
inline SuiteResult projection_suite(const SuiteOptions& o = {}) {
  detail::Stopwatch w;
  SuiteResult r;
  r.name = "projection";
  std::size_t k = 0;
  for (const auto& inst : corpus_instances()) {
    const ModelSpec m = detail::spec_of(inst.network(), Sector::star, o);
    const std::size_t V = inst.graph.num_vertices();
    std::mt19937_64 rng(chain_seed(o.seed, k++));
    for (std::size_t i = 0; i < o.random_forms; ++i) {
      const auto f = detail::random_vertex_form(V, rng), g = detail::random_vertex_form(V, rng);
      r.append(verify_projection_bounds(m, f, g, inst.name + "#" + std::to_string(i)));
    }
  }
  return detail::finish(std::move(r), w, o);
}

// ---------------------------------------------------------------------------
// Monotonicity

/// Every sweep target at once: ν_★[(h_x - h_y)²] for all vertex pairs, then
/// μ_◇[cos J_e] and μ_◇[cos 2J_e] for all edges.
struct MonotonicityProfile {
  std::vector<std::string> names;
  std::vector<double> values;
};

inline MonotonicityProfile monotonicity_profile(const Network& net, std::size_t budget = kDefaultBudget) {
  const FiniteGraph& g = net.graph;
  MonotonicityProfile p;
  {
    ModelSpec m{net, Sector::star};
    m.budget = budget;
    const auto hm = height_moments(m);
    GreenSolver solver(g);
    for (Vertex x = 0; x < g.num_vertices(); ++x)
      for (Vertex y = x + 1; y < g.num_vertices(); ++y) {
        ZeroForm<double> f(g.num_vertices(), 0.0);
        f[x] += 1.0;
        f[y] -= 1.0;
        f[g.boundary()] = 0.0;
        const OneForm<double> eps = d(g, solver.solve(f));
        p.names.push_back("var(h" + std::to_string(x) + "-h" + std::to_string(y) + ")");
        p.values.push_back(hm.bilinear(eps, eps));
      }
  }
  ModelSpec m{net, Sector::diamond};
  m.budget = budget;
  SpinGrid grid(m);
  const std::size_t E = g.num_edges();
  std::vector<double> cos1(grid.M()), cos2(grid.M());
  for (int j = 0; j < grid.M(); ++j) {
    cos1[j] = std::cos(grid.angle(j));
    cos2[j] = std::cos(2.0 * grid.angle(j));
  }
  struct Acc {
    const std::vector<double>*t1, *t2;
    std::vector<double> c1, c2;
    void add(double w, const std::vector<long>& idx, const double*) {
      for (std::size_t e = 0; e < c1.size(); ++e) {
        c1[e] += w * (*t1)[idx[e]];
        c2[e] += w * (*t2)[idx[e]];
      }
    }
    void merge(const Acc& o) {
      for (std::size_t e = 0; e < c1.size(); ++e) {
        c1[e] += o.c1[e];
        c2[e] += o.c2[e];
      }
    }
  } acc{&cos1, &cos2, std::vector<double>(E, 0.0), std::vector<double>(E, 0.0)};
  const double Z = grid.run(acc);
  for (EdgeIndex e = 0; e < E; ++e) {
    p.names.push_back("cos(J" + std::to_string(e) + ")");
    p.values.push_back(acc.c1[e] / Z);
  }
  for (EdgeIndex e = 0; e < E; ++e) {
    p.names.push_back("cos(2J" + std::to_string(e) + ")");
    p.values.push_back(acc.c2[e] / Z);
  }
  return p;
}

/// Network with edge e carrying p.
inline Network with_edge_potential(const Network& net, EdgeIndex e, PotentialPair p) {
  Network n = net;
  const PotentialId pid = n.add_potential(std::move(p));
  std::vector<Edge> edges = n.graph.edges();
  edges.at(e).potential = pid;
  n.graph = FiniteGraph(n.graph.num_vertices(), std::move(edges), n.graph.boundary());
  return n;
}

/// Vary the inverse temperature of one xy edge over the grid with every other edge
/// held at the instance potential; every target must be non-decreasing.
inline SuiteResult monotonicity_suite(const SuiteOptions& o = {}) {
  detail::Stopwatch w;
  SuiteResult r;
  r.name = "monotonicity";
  for (const auto& inst : corpus_instances()) {
    const Network net = inst.network();
    for (EdgeIndex e = 0; e < inst.graph.num_edges(); ++e) {
      std::vector<MonotonicityProfile> ps;
      for (double b : o.betas) ps.push_back(monotonicity_profile(with_edge_potential(net, e, make_xy(b)), o.budget));
      for (std::size_t t = 0; t < ps[0].values.size(); ++t) {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < ps.size(); ++i) worst = std::min(worst, ps[i].values[t] - ps[i - 1].values[t]);
        if (ps.size() < 2) worst = 0.0;
        r.reports.push_back(make_inequality("monotonicity", inst.name + "#" + ps[0].names[t] + "@e" + std::to_string(e),
                                            0.0, worst, 1e-9));
      }
    }
  }
  return detail::finish(std::move(r), w, o);
}

/// Glue, degree reduction and the star-tree transform never increase the height
/// variance at an original vertex; splitting keeps the law of the original heights.
/// Instances: corpus graphs on at most 5 vertices with xy potentials (the family
/// whose β scaling the splitting step needs).
inline SuiteResult transform_suite(const SuiteOptions& o = {}) {
  detail::Stopwatch w;
  SuiteResult r;
  r.name = "transform_monotonicity";
  std::size_t k = 0;
  for (const auto& ng : corpus_graphs()) {
    const FiniteGraph& g = ng.graph;
    if (g.num_vertices() > 5) continue;
    for (const auto& p : corpus_potentials()) {
      if (p.family() != Family::xy) continue;
      const Network net = homogeneous(g, p);
      const std::string name = ng.name + "/" + p.describe();
      for (Vertex x = 0; x < g.num_vertices(); ++x)
        for (Vertex y = x + 1; y < g.num_vertices(); ++y) {
          std::vector<Vertex> map;
          const Network glued = glue_vertices(net, x, y, &map);
          r.append(verify_variance_transport(net, glued, map, "glue",
                                             name + "#glue" + std::to_string(x) + "," + std::to_string(y)));
        }
      bool high = false;
      for (Vertex v = 0; v < g.num_vertices(); ++v) {
        if (v == g.boundary() || g.neighbors(v).size() < 4) continue;
        high = true;
        std::vector<Vertex> map;
        const Network reduced = degree_reduce(net, v, &map);
        r.append(verify_variance_transport(net, reduced, map, "degree_reduce", name + "#v" + std::to_string(v)));
      }
      if (high) {
        const auto st = star_tree_transform(net);
        r.append(verify_variance_transport(net, st.network, st.log.vertex_map, "star_tree", name));
      }
      std::mt19937_64 rng(chain_seed(o.seed, k++));
      std::vector<ZeroForm<double>> ts;
      for (std::size_t i = 0; i < o.random_forms; ++i) {
        ZeroForm<double> t(g.num_vertices(), 0.0);
        for (double& x : t) x = static_cast<double>(static_cast<long>(rng() % 5) - 2);
        ts.push_back(t);
      }
      for (EdgeIndex e = 0; e < g.num_edges(); ++e)
        r.append(verify_split_marginal(net, e, 2, ts, name + "#e" + std::to_string(e)));
    }
  }
  return detail::finish(std::move(r), w, o);
}

// ---------------------------------------------------------------------------
// Ginibre core and reflection positivity

/// Random products of 1 to 4 factors cos(m J_e) ± cos(m J'_e) on every corpus graph with a cycle.
inline SuiteResult ginibre_suite(const SuiteOptions& o = {}) {
  detail::Stopwatch w;
  SuiteResult r;
  r.name = "ginibre";
  std::size_t k = 0;
  for (const auto& ng : corpus_graphs()) {
    const FiniteGraph& g = ng.graph;
    if (g.num_edges() + 1 == g.num_vertices()) continue;  // trees: H_◇ is trivial
    std::mt19937_64 rng(chain_seed(o.seed, k++));
    for (std::size_t t = 0; t < o.ginibre_trials; ++t) {
      const std::size_t n = 1 + rng() % 4;
      std::vector<EdgeIndex> es;
      std::vector<int> ms, ss;
      for (std::size_t i = 0; i < n; ++i) {
        es.push_back(static_cast<EdgeIndex>(rng() % g.num_edges()));
        ms.push_back(static_cast<int>(rng() % 4));
        ss.push_back(rng() % 2 ? 1 : -1);
      }
      const double v = ginibre_core_integral(g, es, ms, ss, o.budget);
      r.reports.push_back(make_inequality("ginibre_core", ng.name + "#" + std::to_string(t), -v, 0.0, 1e-10));
    }
  }
  return detail::finish(std::move(r), w, o);
}

/// Random trigonometric polynomial in the angles of the vertices in `half`.
inline TrigPolynomial random_trig_polynomial(const std::vector<Vertex>& half, std::mt19937_64& rng,
                                             int max_freq = 2, std::size_t terms = 3) {
  std::normal_distribution<double> N(0.0, 1.0);
  TrigPolynomial p;
  p.vertices = half;
  for (std::size_t t = 0; t < terms; ++t) {
    TrigPolynomial::Term term;
    for (std::size_t i = 0; i < half.size(); ++i)
      term.freq.push_back(static_cast<int>(rng() % (2 * max_freq + 1)) - max_freq);
    term.a = N(rng);
    term.b = N(rng);
    p.terms.push_back(term);
  }
  return p;
}

/// μ(G ΘG) >= 0 and μ(G ΘF) = μ(F ΘG) on the 2x2 torus for the xy potentials.
inline SuiteResult reflection_suite(const SuiteOptions& o = {}) {
  detail::Stopwatch w;
  SuiteResult r;
  r.name = "reflection_positivity";
  const auto refl = torus_edge_reflection(2);
  const auto half = torus_half(2);
  std::size_t k = 0;
  for (const auto& p : corpus_potentials()) {
    if (p.family() != Family::xy) continue;
    const Network net = homogeneous(build_torus(2), p);
    std::mt19937_64 rng(chain_seed(o.seed, k++));
    for (std::size_t t = 0; t < o.rp_trials; ++t) {
      const auto G = random_trig_polynomial(half, rng), F = random_trig_polynomial(half, rng);
      const auto rp = rp_check(net, refl, G, F);
      const std::string name = "torus2/" + p.describe() + "#" + std::to_string(t);
      r.reports.push_back(make_inequality("rp_positivity", name, -rp.positivity, 0.0, 1e-9));
      r.reports.push_back(make_equality("rp_symmetry", name, rp.symmetry, 0.0, 1e-9));
    }
  }
  return detail::finish(std::move(r), w, o);
}

// ---------------------------------------------------------------------------
// Potential bridge

inline SuiteResult bridge_suite(const SuiteOptions& o = {}) {
  detail::Stopwatch w;
  SuiteResult r;
  r.name = "potential_bridge";
  const std::vector<double> betas{0.25, 0.5, 1.0, 2.0, 4.0};
  auto pots = corpus_potentials();
  for (double b : betas) {
    pots.push_back(make_xy(b));
    pots.push_back(make_ivgff(b));
  }
  for (const auto& p : pots)
    r.reports.push_back(make_inequality("round_trip", p.describe(), round_trip_error(p) / p.c(0), 0.0, 1e-10));
  for (double b : betas) {
    const auto p = make_xy(b);
    for (int k : {2, 3, 4})
      r.reports.push_back(make_inequality("split_convolution", p.describe() + "#k" + std::to_string(k),
                                          split_convolution_error(p, k), 0.0, 1e-9));
    for (const auto& q : {make_xy(b), make_ivgff(b)})
      r.reports.push_back(make_inequality("turan_slack", q.describe(), -convexity_slack(q.height()), 0.0, 0.0));
  }
  return detail::finish(std::move(r), w, o);
}

// ---------------------------------------------------------------------------
// Chains against the oracle

namespace detail {

/// |estimate - exact| <= nsigma SE, with a 1e-9 relative floor (the rounding of a
/// running sum over 10^6 samples) for chains that never move, i.e. trees in the
/// divergence-free sector.
inline VerificationReport agreement(const std::string& id, const std::string& inst, const Estimate& est, double exact,
                                    double nsigma) {
  VerificationReport r;
  r.identity = id;
  r.instance = inst;
  r.lhs = est.mean;
  r.rhs = exact;
  r.residual = std::abs(est.mean - exact);
  const double floor = 1e-9 * std::max(1.0, std::abs(exact));
  r.tolerance = std::max(nsigma * est.se, floor);
  r.pass = (est.se <= floor || est.reliable) && r.residual <= r.tolerance;
  return r;
}

/// U''_e for every edge then U'_a U'_b for a <= b.
inline std::vector<VerificationReport> spin_agreement(const Network& net, const BatchAccumulator& acc,
                                                      const SpinMoments& sm, const std::string& inst,
                                                      double nsigma) {
  const std::size_t E = net.graph.num_edges();
  std::vector<VerificationReport> out;
  for (std::size_t e = 0; e < E; ++e)
    out.push_back(agreement("mcmc_u2", inst + "#e" + std::to_string(e), acc.estimate(e), sm.mean_u2[e], nsigma));
  std::size_t k = E;
  for (std::size_t a = 0; a < E; ++a)
    for (std::size_t b = a; b < E; ++b, ++k)
      out.push_back(agreement("mcmc_u1u1", inst + "#e" + std::to_string(a) + "e" + std::to_string(b),
                              acc.estimate(k), sm.at(a, b), nsigma));
  return out;
}

template <class Chain>
BatchAccumulator spin_run(const Network& net, Chain& chain, const RunOptions& opt) {
  const std::size_t E = net.graph.num_edges();
  BatchAccumulator acc(E + E * (E + 1) / 2, BatchAccumulator::batch_size_for(sample_count(opt)));
  std::vector<double> u1, u2, x(acc.dim());
  run_chain(chain, opt, [&](const Chain& c) {
    spin_derivatives(net, c.J(), u1, u2);
    std::size_t k = 0;
    for (std::size_t e = 0; e < E; ++e) x[k++] = u2[e];
    for (std::size_t a = 0; a < E; ++a)
      for (std::size_t b = a; b < E; ++b) x[k++] = u1[a] * u1[b];
    acc.add(x);
  });
  return acc;
}

}  // namespace detail

/// ν_★[n_e²] from the height chain, μ_★ and μ_◇ moments from the spin chains,
/// each against the oracle on every corpus instance.
inline SuiteResult mcmc_suite(const SuiteOptions& o = {}) {
  detail::Stopwatch w;
  SuiteResult r;
  r.name = "mcmc_oracle";
  RunOptions opt;
  opt.sweeps = o.mcmc_sweeps;
  opt.burn_in = o.mcmc_burn_in;
  std::size_t k = 0;
  for (const auto& inst : corpus_instances()) {
    const Network net = inst.network();
    const std::size_t E = inst.graph.num_edges();
    {
      const auto hm = height_moments(detail::spec_of(net, Sector::star, o));
      HeightChain chain(net, chain_seed(o.seed, k++));
      BatchAccumulator acc(E, BatchAccumulator::batch_size_for(sample_count(opt)));
      std::vector<double> x(E);
      run_chain(chain, opt, [&](const HeightChain& c) {
        for (EdgeIndex e = 0; e < E; ++e) {
          const double n = static_cast<double>(c.n(e));
          x[e] = n * n;
        }
        acc.add(x);
      });
      for (EdgeIndex e = 0; e < E; ++e)
        r.reports.push_back(detail::agreement("mcmc_height_n2", inst.name + "/star#e" + std::to_string(e),
                                              acc.estimate(e), hm.at(e, e), o.nsigma));
    }
    {
      const auto sm = spin_moments(detail::spec_of(net, Sector::star, o));
      SpinStarChain chain(net, chain_seed(o.seed, k++));
      const auto acc = detail::spin_run(net, chain, opt);
      r.append(detail::spin_agreement(net, acc, sm, inst.name + "/star", o.nsigma));
    }
    {
      const auto sm = spin_moments(detail::spec_of(net, Sector::diamond, o));
      SpinDiamondChain chain(net, chain_seed(o.seed, k++));
      const auto acc = detail::spin_run(net, chain, opt);
      r.append(detail::spin_agreement(net, acc, sm, inst.name + "/diamond", o.nsigma));
    }
    detail::say(o, "  " + inst.name + " done at " + std::to_string(w.seconds()) + " s");
  }
  return detail::finish(std::move(r), w, o);
}

// ---------------------------------------------------------------------------
// Torus experiments

/// Divergence-free xy samples on a torus folded into a series accumulator.
inline TorusSeriesAccumulator torus_series(std::size_t side, double beta, std::size_t sweeps, std::size_t burn_in,
                                           std::size_t thin, TorusSeriesOptions sopt, std::uint64_t seed) {
  const Network net = homogeneous(build_torus(side), make_xy(beta));
  RunOptions opt;
  opt.sweeps = sweeps;
  opt.burn_in = burn_in;
  opt.thin = thin;
  SpinDiamondChain chain(net, seed, torus_moves(side));
  TorusSeriesAccumulator acc(net, side, sample_count(opt), std::move(sopt));
  run_chain(chain, opt, [&](const SpinDiamondChain& c) { acc.add(c.J()); });
  return acc;
}

/// Symmetric sum at L = side/2 and the vanishing bound for every n <= L on the
/// side-16 torus; CLT variance and KS distance on the side-32 torus.
inline SuiteResult torus_suite(const SuiteOptions& o = {}) {
  detail::Stopwatch w;
  SuiteResult r;
  r.name = "torus_experiments";
  std::size_t k = 0;
  const std::size_t L = o.torus_side / 2;
  for (double beta : o.torus_betas) {
    const std::string name = "torus" + std::to_string(o.torus_side) + "/" + make_xy(beta).describe();
    TorusSeriesOptions sopt;
    sopt.max_distance = L;
    const auto acc =
        torus_series(o.torus_side, beta, o.torus_sweeps, o.torus_burn_in, o.torus_thin, sopt, chain_seed(o.seed, k++));
    const auto rep = acc.report();
    r.reports.push_back(symmetric_sum_check(acc, L, name, o.nsigma));
    r.append(vanishing_bound_check(rep, name, o.nsigma));
    detail::say(o, "  " + name + " done at " + std::to_string(w.seconds()) + " s");
  }
  {
    const std::string name = "torus" + std::to_string(o.clt_side) + "/" + make_xy(o.clt_beta).describe();
    TorusSeriesOptions sopt;
    sopt.max_distance = 1;
    sopt.clt_lengths = o.clt_lengths;
    const auto acc =
        torus_series(o.clt_side, o.clt_beta, o.clt_sweeps, o.clt_burn_in, o.clt_thin, sopt, chain_seed(o.seed, k++));
    auto rep = acc.report();
    for (auto& c : rep.clt) {
      c.finite_size_bound = clt_finite_size_bound(o.clt_side, c.n, rep.u2.mean);
      r.reports.push_back(clt_check(rep, c, name, o.nsigma));
      r.reports.push_back(clt_ks_check(c, name));
      r.notes.push_back(name + " n=" + std::to_string(c.n) + ": " + std::to_string(c.values) + " values, tau " +
                        std::to_string(c.variance.tau));
    }
    detail::say(o, "  " + name + " done at " + std::to_string(w.seconds()) + " s");
  }
  return detail::finish(std::move(r), w, o);
}

}  // namespace hdual
