#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdual/green.hpp"
#include "hdual/oracle/verify.hpp"
#include "hdual/stats.hpp"
#include "hdual/transforms.hpp"

namespace hdual {

/// Directed path of edges e_0 … e_{n-1} from start to end, identified with the ±1 one-form p_n.
struct PathSpec {
  std::vector<EdgeIndex> edges;
  std::vector<int> signs;
  Vertex start = 0, end = 0;

  OneForm<double> form(const FiniteGraph& g) const {
    OneForm<double> p(g.num_edges(), 0.0);
    for (std::size_t i = 0; i < edges.size(); ++i) p[edges[i]] += signs[i];
    return p;
  }
};

/// Horizontal path of n edges on a torus starting at (x0, y0).
inline PathSpec horizontal_path(std::size_t side, long x0, long y0, std::size_t n) {
  TorusLayout L{side};
  PathSpec p;
  p.start = L.vertex(x0, y0);
  for (std::size_t i = 0; i < n; ++i) {
    p.edges.push_back(L.horizontal(x0 + static_cast<long>(i), y0));
    p.signs.push_back(1);
  }
  p.end = L.vertex(x0 + static_cast<long>(n), y0);
  return p;
}

/// U'(J_e) and U''(J_e) for every edge.
inline void spin_derivatives(const Network& net, const OneForm<double>& J, std::vector<double>& u1,
                             std::vector<double>& u2) {
  u1.resize(J.size());
  u2.resize(J.size());
  for (EdgeIndex e = 0; e < J.size(); ++e) {
    const auto v = net.potential(e).spin().evaluate(J[e]);
    u1[e] = v.U1;
    u2[e] = v.U2;
  }
}

// ---------------------------------------------------------------------------
// Torus series

struct TorusSeriesOptions {
  std::size_t max_distance = 0;           // 0: side/2
  std::vector<std::size_t> clt_lengths;   // path lengths n for n^{-1/2} Σ U'(J_i)
  std::size_t clt_keep_every = 1;         // keep CLT values of every k-th sample for the KS distance
};

/// One row of the per-distance table.
struct SeriesRow {
  std::size_t i = 0;
  Estimate c;         // μ[U'(J_0)U'(J_i)]
  Estimate partial;   // Σ_{1<=j<=i} j c_j
  Estimate u;         // u_i = Σ_{1<=j<=i} c_j
  Estimate cesaro;    // (1/i) Σ_{1<=k<i} u_k
  Estimate vanish;    // Σ_{j<i} μ[U''] - μ[(Σ_{j<i} U')²], i >= 1
  Estimate cos_dual;  // μ[cos(θ_0 - θ_i)] for the faces along the path
  Estimate xy_gap;    // ½μ[cos(θ_0+θ'_0-θ_i-θ'_i)] + |c_i|/β² - μ[cos(θ_0-θ_i)]²
};

struct CltRow {
  std::size_t n = 0;
  Estimate variance;  // μ[(n^{-1/2} Σ U')²]
  double ks = 1.0;    // against N(0, μ[U''])
  std::size_t values = 0;
  double finite_size_bound = 0.0;  // C (Δ^{-1} f, f)/n for f = δ_start - δ_end, filled by the caller
};

struct SeriesReport {
  std::size_t side = 0;
  Estimate u2;       // μ[U''(J_0)]
  Estimate u1;       // μ[U'(J_0)]
  Estimate loop;     // (Σ_loop U')²/side - loop mean of U'' (exact mean 0 on the torus)
  std::vector<SeriesRow> rows;
  std::vector<CltRow> clt;
};

/// Translation- and rotation-averaged observables of divergence-free spin samples on a torus.
/// Distances along a path, faces on either side of it, loops around the torus.
class TorusSeriesAccumulator {
 public:
  TorusSeriesAccumulator(const Network& net, std::size_t side, std::size_t expected_samples,
                         TorusSeriesOptions opt = {})
      : net_(net), side_(side), L_(side), opt_(std::move(opt)) {
    if (net.graph.num_edges() != 2 * side * side) throw std::invalid_argument("torus series: not a torus network");
    D_ = opt_.max_distance == 0 ? side / 2 : opt_.max_distance;
    if (D_ > side / 2)
      throw std::invalid_argument("torus series: distance " + std::to_string(D_) + " exceeds half the side " +
                                  std::to_string(side / 2) + " (wrap-around bias)");
    for (std::size_t n : opt_.clt_lengths)
      if (n == 0 || n > side) throw std::invalid_argument("torus series: CLT length out of range");
    beta_ = net.potentials.empty() ? 0.0 : net.potential(0).beta();
    dim_ = idx_clt() + opt_.clt_lengths.size();
    acc_ = BatchAccumulator(dim_, BatchAccumulator::batch_size_for(expected_samples));
    clt_values_.resize(opt_.clt_lengths.size());
  }

  std::size_t side() const { return side_; }
  std::size_t max_distance() const { return D_; }

  void add(const OneForm<double>& J) {
    spin_derivatives(net_, J, u1_, u2_);
    std::vector<double> x(dim_, 0.0);
    const long s = static_cast<long>(side_);
    const double norm = 1.0 / (2.0 * static_cast<double>(side_ * side_));
    std::vector<double> a1(side_), a2(side_), top(side_), bottom(side_);
    for (int o = 0; o < 2; ++o)
      for (long b = 0; b < s; ++b) {
        for (long a = 0; a < s; ++a) {
          const EdgeIndex e = path_edge(o, a, b);
          a1[a] = u1_[e];
          a2[a] = u2_[e];
          top[a] = J[cross_edge(o, a, b)];
          bottom[a] = J[cross_edge(o, a, b - 1)];
        }
        double sum1 = 0.0, sum2 = 0.0;
        for (long a = 0; a < s; ++a) {
          sum1 += a1[a];
          sum2 += a2[a];
          x[idx_u2()] += a2[a] * norm;
          x[idx_u1()] += a1[a] * norm;
          for (std::size_t i = 0; i <= D_; ++i) x[idx_c(i)] += a1[a] * a1[(a + i) % side_] * norm;
          double p1 = 0.0, p2 = 0.0, ct = 0.0, cb = 0.0;
          for (std::size_t n = 1; n <= D_; ++n) {
            p1 += a1[(a + n - 1) % side_];
            p2 += a2[(a + n - 1) % side_];
            x[idx_vanish(n)] += (p2 - p1 * p1) * norm;
            ct += top[(a + n) % side_];
            cb += bottom[(a + n) % side_];
            x[idx_cos(n)] += 0.5 * (std::cos(ct) + std::cos(cb)) * norm;
            x[idx_cos2(n)] += std::cos(ct + cb) * norm;
          }
          for (std::size_t k = 0; k < opt_.clt_lengths.size(); ++k) {
            const std::size_t n = opt_.clt_lengths[k];
            double S = 0.0;
            for (std::size_t j = 0; j < n; ++j) S += a1[(a + j) % side_];
            S /= std::sqrt(static_cast<double>(n));
            x[idx_clt() + k] += S * S * norm;
            if (samples_ % opt_.clt_keep_every == 0 && a % static_cast<long>(n) == 0 && b % static_cast<long>(n) == 0)
              clt_values_[k].push_back(S);
          }
        }
        x[idx_loop()] += (sum1 * sum1 / static_cast<double>(side_) - sum2 / static_cast<double>(side_)) /
                         (2.0 * static_cast<double>(side_));
      }
    acc_.add(x);
    ++samples_;
  }

  void merge(const TorusSeriesAccumulator& o) {
    acc_.merge(o.acc_);
    for (std::size_t k = 0; k < clt_values_.size(); ++k)
      clt_values_[k].insert(clt_values_[k].end(), o.clt_values_[k].begin(), o.clt_values_[k].end());
    samples_ += o.samples_;
  }

  const BatchAccumulator& accumulator() const { return acc_; }
  const std::vector<double>& clt_values(std::size_t k) const { return clt_values_.at(k); }

  SeriesReport report() const {
    SeriesReport r;
    r.side = side_;
    r.u2 = acc_.estimate(idx_u2());
    r.u1 = acc_.estimate(idx_u1());
    r.loop = acc_.estimate(idx_loop());
    for (std::size_t i = 0; i <= D_; ++i) {
      SeriesRow row;
      row.i = i;
      row.c = acc_.estimate(idx_c(i));
      std::vector<double> partial(dim_, 0.0), u(dim_, 0.0), ces(dim_, 0.0);
      for (std::size_t j = 1; j <= i; ++j) {
        partial[idx_c(j)] = static_cast<double>(j);
        u[idx_c(j)] = 1.0;
      }
      // (1/i) Σ_{k=1}^{i-1} u_k = (1/i) Σ_{j=1}^{i-1} (i - j) c_j
      for (std::size_t j = 1; j < i; ++j) ces[idx_c(j)] = static_cast<double>(i - j) / static_cast<double>(i);
      row.partial = acc_.linear(partial);
      row.u = acc_.linear(u);
      row.cesaro = acc_.linear(ces);
      if (i >= 1) {
        row.vanish = acc_.estimate(idx_vanish(i));
        row.cos_dual = acc_.estimate(idx_cos(i));
        const std::size_t ic = idx_c(i), ia = idx_cos(i), ib = idx_cos2(i);
        const double b2 = beta_ * beta_;
        row.xy_gap = acc_.apply([=](const double* m) {
          return 0.5 * m[ib] + (b2 > 0.0 ? std::abs(m[ic]) / b2 : 0.0) - m[ia] * m[ia];
        });
      }
      r.rows.push_back(row);
    }
    for (std::size_t k = 0; k < opt_.clt_lengths.size(); ++k) {
      CltRow c;
      c.n = opt_.clt_lengths[k];
      c.variance = acc_.estimate(idx_clt() + k);
      c.values = clt_values_[k].size();
      const double sigma = std::sqrt(std::max(r.u2.mean, 1e-300));
      c.ks = ks_distance(clt_values_[k], [sigma](double t) { return normal_cdf(t, sigma); });
      r.clt.push_back(c);
    }
    return r;
  }

  /// Edge of the path in orientation o (0 horizontal, 1 vertical) at position a of line b.
  EdgeIndex path_edge(int o, long a, long b) const {
    return o == 0 ? L_.horizontal(a, b) : L_.vertical(b, a);
  }
  /// Edge crossed when moving from the face beside position a-1 to the face beside a, on the side b.
  EdgeIndex cross_edge(int o, long a, long b) const {
    return o == 0 ? L_.vertical(a, b) : L_.horizontal(b, a);
  }

 private:
  std::size_t idx_u2() const { return 0; }
  std::size_t idx_u1() const { return 1; }
  std::size_t idx_loop() const { return 2; }
  std::size_t idx_c(std::size_t i) const { return 3 + i; }
  std::size_t idx_vanish(std::size_t n) const { return 3 + (D_ + 1) + (n - 1); }
  std::size_t idx_cos(std::size_t n) const { return 3 + (D_ + 1) + D_ + (n - 1); }
  std::size_t idx_cos2(std::size_t n) const { return 3 + (D_ + 1) + 2 * D_ + (n - 1); }
  std::size_t idx_clt() const { return 3 + (D_ + 1) + 3 * D_; }

  Network net_;
  std::size_t side_;
  TorusLayout L_;
  TorusSeriesOptions opt_;
  std::size_t D_ = 0, dim_ = 0, samples_ = 0;
  double beta_ = 0.0;
  BatchAccumulator acc_;
  std::vector<double> u1_, u2_;
  std::vector<std::vector<double>> clt_values_;
};

// ---------------------------------------------------------------------------
// Checks on a series report

/// Σ_i c_i = μ[U''(J_0)]. At L = side/2 the torus closure c_0 + 2Σ_{0<i<L} c_i + c_L is
/// exact; for smaller L the truncated 2Σ_{1<=i<=L} c_i + c_0 is used and the pass
/// additionally requires |c_L| below its error bar.
inline VerificationReport symmetric_sum_check(const TorusSeriesAccumulator& acc, std::size_t L,
                                              const std::string& instance, double nsigma = 3.0) {
  const auto r = acc.report();
  if (L == 0 || L > acc.max_distance()) throw std::invalid_argument("symmetric_sum_check: L out of range");
  const bool closed = 2 * L == acc.side();
  std::vector<double> coeff(acc.accumulator().dim(), 0.0), lhs_coeff(coeff.size(), 0.0);
  for (std::size_t i = 0; i <= L; ++i) {
    double w = i == 0 ? 1.0 : 2.0;
    if (closed && i == L) w = 1.0;
    coeff[3 + i] = w;
    lhs_coeff[3 + i] = w;
  }
  coeff[0] -= 1.0;
  const Estimate diff = acc.accumulator().linear(coeff);
  const Estimate lhs = acc.accumulator().linear(lhs_coeff);
  VerificationReport rep;
  rep.identity = "symmetric_sum";
  rep.instance = instance + "#L" + std::to_string(L);
  rep.lhs = lhs.mean;
  rep.rhs = r.u2.mean;
  rep.residual = diff.mean;
  rep.tolerance = nsigma * diff.se;
  rep.pass = diff.reliable && std::abs(diff.mean) <= rep.tolerance;
  if (!closed) rep.pass = rep.pass && std::abs(r.rows[L].c.mean) <= std::max(r.rows[L].c.se, diff.se);
  return rep;
}

/// Σ_{i<n} μ[U''] - μ[(Σ_{i<n} U')²] >= 0 within nsigma error bars, for every 1 <= n <= max.
inline std::vector<VerificationReport> vanishing_bound_check(const SeriesReport& r, const std::string& instance,
                                                             double nsigma = 3.0) {
  std::vector<VerificationReport> out;
  for (std::size_t n = 1; n < r.rows.size(); ++n) {
    const Estimate& v = r.rows[n].vanish;
    VerificationReport rep = make_inequality("vanishing_bound", instance + "#n" + std::to_string(n), 0.0,
                                             v.mean + nsigma * v.se, 0.0);
    rep.lhs = v.mean;
    rep.rhs = 0.0;
    rep.residual = std::max(0.0, -v.mean);
    rep.tolerance = nsigma * v.se;
    rep.pass = v.reliable && rep.residual <= rep.tolerance;
    out.push_back(rep);
  }
  return out;
}

/// ½μ[cos(θ_0+θ'_0-θ_i-θ'_i)] + |c_i|/β² <= μ[cos(θ_0-θ_i)]² (XY model), soft check.
inline std::vector<VerificationReport> xy_inequality_check(const SeriesReport& r, const std::string& instance,
                                                           double nsigma = 3.0) {
  std::vector<VerificationReport> out;
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const Estimate& g = r.rows[i].xy_gap;
    VerificationReport rep;
    rep.identity = "xy_correlation_inequality";
    rep.instance = instance + "#i" + std::to_string(i);
    rep.lhs = g.mean;
    rep.rhs = 0.0;
    rep.residual = std::max(0.0, g.mean);
    rep.tolerance = nsigma * g.se;
    rep.pass = g.reliable && rep.residual <= rep.tolerance;
    out.push_back(rep);
  }
  return out;
}

/// Reflection positivity consequence c_i >= 0 within nsigma error bars.
inline std::vector<VerificationReport> positive_correlation_check(const SeriesReport& r, const std::string& instance,
                                                                  double nsigma = 3.0) {
  std::vector<VerificationReport> out;
  for (const auto& row : r.rows) {
    VerificationReport rep;
    rep.identity = "two_point_nonnegative";
    rep.instance = instance + "#i" + std::to_string(row.i);
    rep.lhs = row.c.mean;
    rep.rhs = 0.0;
    rep.residual = std::max(0.0, -row.c.mean);
    rep.tolerance = nsigma * row.c.se;
    rep.pass = row.c.reliable && rep.residual <= rep.tolerance;
    out.push_back(rep);
  }
  return out;
}

/// C (Δ^{-1} f, f)/n with f = δ_x - δ_y for the two ends of a straight path of n edges
/// on the torus: by the GFF bound this caps ν_★[(h_x - h_y)²]/n, the amount by which the
/// variance of n^{-1/2} Σ U' may fall short of μ[U''] at finite n.
inline double clt_finite_size_bound(std::size_t side, std::size_t n, double C) {
  const FiniteGraph g = build_torus(side);
  GreenSolver solver(g);
  const TorusLayout L{side};
  ZeroForm<double> f(g.num_vertices(), 0.0);
  const long half = static_cast<long>(side / 2);
  f[L.vertex(half, half)] += 1.0;
  f[L.vertex(half + static_cast<long>(n), half)] -= 1.0;
  f[g.boundary()] = 0.0;
  if (L.vertex(half + static_cast<long>(n), half) == g.boundary()) {
    // Shift so that neither end is the boundary vertex.
    std::fill(f.begin(), f.end(), 0.0);
    f[L.vertex(1, 1)] = 1.0;
    f[L.vertex(1 + static_cast<long>(n), 1)] -= 1.0;
  }
  return C * solver.form(f, f) / static_cast<double>(n);
}

/// Pass iff var ∈ [μ[U''] - bound - k·SE, μ[U''] + k·SE].
inline VerificationReport clt_check(const SeriesReport& r, const CltRow& c, const std::string& instance,
                                    double nsigma = 3.0) {
  VerificationReport rep;
  rep.identity = "clt_variance";
  rep.instance = instance + "#n" + std::to_string(c.n);
  rep.lhs = c.variance.mean;
  rep.rhs = r.u2.mean;
  const double se = std::hypot(c.variance.se, r.u2.se);
  const double lo = r.u2.mean - c.finite_size_bound - nsigma * se;
  const double hi = r.u2.mean + nsigma * se;
  rep.residual = c.variance.mean < lo ? lo - c.variance.mean : (c.variance.mean > hi ? c.variance.mean - hi : 0.0);
  rep.tolerance = 0.0;
  rep.pass = c.variance.reliable && rep.residual == 0.0;
  return rep;
}

inline VerificationReport clt_ks_check(const CltRow& c, const std::string& instance, double ks_max = 0.05) {
  return make_inequality("clt_ks", instance + "#n" + std::to_string(c.n), c.ks, ks_max, 0.0);
}

// ---------------------------------------------------------------------------
// Heights and the projected field

/// Estimate of ν[(h_x - h_y)²] from height samples.
inline Estimate height_increment_variance(const std::vector<std::vector<long>>& samples, Vertex x, Vertex y) {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& h : samples) {
    const double d = static_cast<double>(h.at(x) - h.at(y));
    v.push_back(d * d);
  }
  return batch_means(v);
}

/// τ = Δ^{-1} d* U'(J), so that dτ = P_★ U'(J).
inline ZeroForm<double> tau_field(const GreenSolver& solver, const Network& net, const OneForm<double>& J) {
  std::vector<double> u1, u2;
  spin_derivatives(net, J, u1, u2);
  return solver.solve(d_star(net.graph, u1));
}

/// Streaming estimate of μ[(τ, f)(τ, g)].
class TauCovariance {
 public:
  TauCovariance(const Network& net, ZeroForm<double> f, ZeroForm<double> g, std::size_t expected_samples)
      : net_(net),
        solver_(net.graph),
        f_(std::move(f)),
        g_(std::move(g)),
        acc_(1, BatchAccumulator::batch_size_for(expected_samples)) {
    f_[net.graph.boundary()] = 0.0;
    g_[net.graph.boundary()] = 0.0;
  }
  void add(const OneForm<double>& J) {
    const auto tau = tau_field(solver_, net_, J);
    const double x = inner(tau, f_) * inner(tau, g_);
    acc_.add(&x);
  }
  Estimate estimate() const { return acc_.estimate(0); }

 private:
  Network net_;
  GreenSolver solver_;
  ZeroForm<double> f_, g_;
  BatchAccumulator acc_;
};

}  // namespace hdual
