#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "hdual/oracle/model.hpp"
#include "hdual/parallel.hpp"

namespace hdual {

/// Grid quadrature of the spin measure of a sector. Free coordinates run over
/// θ_j = 2πj/M (the uniform product measure, i.e. Haar measure on the sector),
/// every edge angle is the grid point Σ coeff·j mod M, and the weight is
/// Π_e w_e(J_e)/w_e(0). Twisted channels use w_e(J_e + ε_e)/w_e(0).
class SpinGrid {
 public:
  SpinGrid(const ModelSpec& m, std::vector<OneForm<double>> twists = {})
      : spec_(&m), par_(parameterize(m.graph(), m.sector)), twists_(std::move(twists)) {
    M_ = m.M > 0 ? m.M : default_grid(m, par_);
    const std::size_t D = par_.dim();
    double points = 1.0;
    for (std::size_t i = 0; i < D; ++i) points *= M_;
    if (points > static_cast<double>(m.budget))
      throw BudgetExceeded("spin quadrature needs " + std::to_string(M_) + "^" + std::to_string(D) +
                           " grid points");
    const std::size_t E = m.graph().num_edges();
    w_.resize(E);
    u1_.resize(E);
    u2_.resize(E);
    tw_.resize(E);
    for (EdgeIndex e = 0; e < E; ++e) {
      const auto& s = m.potential(e).spin();
      const double w0 = s.w(0.0);
      for (int j = 0; j < M_; ++j) {
        const auto v = s.evaluate(angle(j));
        w_[e].push_back(v.w / w0);
        u1_[e].push_back(v.U1);
        u2_[e].push_back(v.U2);
      }
      for (const auto& eps : twists_)
        for (int j = 0; j < M_; ++j) tw_[e].push_back(s.w(angle(j) + eps.at(e)) / w0);
    }
  }

  int M() const { return M_; }
  const Parameterization& parameterization() const { return par_; }
  double angle(long j) const { return 2.0 * std::numbers::pi * static_cast<double>(j) / M_; }
  /// Angle in (-π, π] of grid index j.
  double wrapped(long j) const { return j <= M_ / 2 ? angle(j) : angle(j) - 2.0 * std::numbers::pi; }
  const std::vector<double>& U1(EdgeIndex e) const { return u1_[e]; }
  const std::vector<double>& U2(EdgeIndex e) const { return u2_[e]; }
  std::size_t num_twists() const { return twists_.size(); }

  /// Visit every grid point. Acc provides add(weight, edge_index_vector, channels)
  /// and merge(other); one copy per value of the outermost coordinate.
  template <class Acc>
  double run(Acc& acc) const {
    const std::size_t E = spec_->graph().num_edges(), D = par_.dim(), K = twists_.size();
    std::vector<std::vector<std::pair<EdgeIndex, int>>> touches(D);
    for (EdgeIndex e = 0; e < E; ++e)
      for (auto [j, c] : par_.terms[e]) touches[j].push_back({e, c});
    // Constant edges sit at angle 0.
    double w_const = 1.0;
    std::vector<std::complex<double>> ch_const(K, 1.0);
    for (EdgeIndex e : par_.constant_edges) {
      w_const *= w_[e][0];
      for (std::size_t k = 0; k < K; ++k) ch_const[k] *= tw_[e][k * M_];
    }
    if (D == 0) {
      std::vector<long> idx(E, 0);
      std::vector<double> ch(K);
      for (std::size_t k = 0; k < K; ++k) ch[k] = ch_const[k].real();
      acc.add(w_const, idx, ch.data());
      return w_const;
    }
    std::vector<Acc> parts(static_cast<std::size_t>(M_), acc);
    std::vector<double> Z(static_cast<std::size_t>(M_), 0.0);
    parallel_for(static_cast<std::size_t>(M_), [&](std::size_t chunk) {
      Acc& local = parts[chunk];
      std::vector<long> idx(E, 0);
      std::vector<double> w(D + 1, w_const);
      std::vector<double> ch((D + 1) * K);
      for (std::size_t k = 0; k < K; ++k) ch[k] = ch_const[k].real();
      std::function<void(std::size_t, long)> visit = [&](std::size_t i, long j) {
        for (auto [e, c] : touches[i]) idx[e] = ((idx[e] + c * j) % M_ + M_) % M_;
        double wi = w[i];
        for (EdgeIndex e : par_.settled[i]) wi *= w_[e][idx[e]];
        w[i + 1] = wi;
        if (K > 0) {
          const double* src = &ch[i * K];
          double* dst = &ch[(i + 1) * K];
          for (std::size_t k = 0; k < K; ++k) dst[k] = src[k];
          for (EdgeIndex e : par_.settled[i]) {
            const double* row = &tw_[e][idx[e]];
            for (std::size_t k = 0; k < K; ++k) dst[k] *= row[k * M_];
          }
        }
        if (i + 1 == D) {
          local.add(wi, idx, K > 0 ? &ch[D * K] : nullptr);
          Z[chunk] += wi;
        } else {
          for (long u = 0; u < M_; ++u) visit(i + 1, u);
        }
        for (auto [e, c] : touches[i]) idx[e] = ((idx[e] - c * j) % M_ + M_) % M_;
      };
      visit(0, static_cast<long>(chunk));
    });
    double total = 0.0;
    for (std::size_t c = 0; c < parts.size(); ++c) {
      if (c == 0)
        acc = parts[0];
      else
        acc.merge(parts[c]);
      total += Z[c];
    }
    return total;
  }

 private:
  const ModelSpec* spec_;
  Parameterization par_;
  std::vector<OneForm<double>> twists_;
  int M_ = 0;
  std::vector<std::vector<double>> w_, u1_, u2_, tw_;  // tw_[e][k*M + j]
};

// ---------------------------------------------------------------------------
// Standard accumulators and entry points

/// μ_#[ψ(J)] with J reduced to (-π, π].
inline double spin_expect(const ModelSpec& m, const std::function<double(const OneForm<double>&)>& psi) {
  SpinGrid grid(m);
  struct Acc {
    const SpinGrid* grid;
    const std::function<double(const OneForm<double>&)>* psi;
    double sum = 0.0;
    OneForm<double> J;
    void add(double w, const std::vector<long>& idx, const double*) {
      J.resize(idx.size());
      for (std::size_t e = 0; e < idx.size(); ++e) J[e] = grid->wrapped(idx[e]);
      sum += w * (*psi)(J);
    }
    void merge(const Acc& o) { sum += o.sum; }
  } acc{&grid, &psi, 0.0, {}};
  const double Z = grid.run(acc);
  return acc.sum / Z;
}

/// Z_#(ε_k)/Z_# for a batch of twists.
inline std::vector<double> twisted_partition(const ModelSpec& m, const std::vector<OneForm<double>>& twists) {
  SpinGrid grid(m, twists);
  struct Acc {
    std::vector<double> sum;
    void add(double, const std::vector<long>&, const double* ch) {
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += ch[k];
    }
    void merge(const Acc& o) {
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += o.sum[k];
    }
  } acc{std::vector<double>(twists.size(), 0.0)};
  const double Z = grid.run(acc);
  for (double& v : acc.sum) v /= Z;
  return acc.sum;
}

inline double twisted_partition(const ModelSpec& m, const OneForm<double>& eps) {
  return twisted_partition(m, std::vector<OneForm<double>>{eps})[0];
}

/// μ[U'_e], μ[U''_e] and μ[U'_e U'_f].
struct SpinMoments {
  std::size_t E = 0;
  int M = 0;
  std::vector<double> mean_u1, mean_u2;
  std::vector<double> cross;  // row-major E x E

  double at(EdgeIndex a, EdgeIndex b) const { return cross[a * E + b]; }

  /// μ[(U'(J), ε)(U'(J), ω)]
  double bilinear(const OneForm<double>& eps, const OneForm<double>& om) const {
    double s = 0.0;
    for (std::size_t a = 0; a < E; ++a)
      for (std::size_t b = 0; b < E; ++b) s += eps[a] * cross[a * E + b] * om[b];
    return s;
  }

  /// Σ_e μ[U''_e] ε_e ω_e
  double diagonal(const OneForm<double>& eps, const OneForm<double>& om) const {
    double s = 0.0;
    for (std::size_t a = 0; a < E; ++a) s += mean_u2[a] * eps[a] * om[a];
    return s;
  }
};

inline SpinMoments spin_moments(const ModelSpec& m) {
  SpinGrid grid(m);
  const std::size_t E = m.graph().num_edges();
  struct Acc {
    const SpinGrid* grid;
    std::size_t E;
    std::vector<double> u1, u2, cross;
    std::vector<double> vals;
    void add(double w, const std::vector<long>& idx, const double*) {
      vals.resize(E);
      for (std::size_t e = 0; e < E; ++e) {
        vals[e] = grid->U1(e)[idx[e]];
        u1[e] += w * vals[e];
        u2[e] += w * grid->U2(e)[idx[e]];
      }
      for (std::size_t a = 0; a < E; ++a) {
        const double wa = w * vals[a];
        for (std::size_t b = 0; b < E; ++b) cross[a * E + b] += wa * vals[b];
      }
    }
    void merge(const Acc& o) {
      for (std::size_t i = 0; i < E; ++i) {
        u1[i] += o.u1[i];
        u2[i] += o.u2[i];
      }
      for (std::size_t i = 0; i < cross.size(); ++i) cross[i] += o.cross[i];
    }
  } acc{&grid, E, std::vector<double>(E, 0.0), std::vector<double>(E, 0.0), std::vector<double>(E * E, 0.0), {}};
  const double Z = grid.run(acc);
  SpinMoments out;
  out.E = E;
  out.M = grid.M();
  out.mean_u1 = acc.u1;
  out.mean_u2 = acc.u2;
  out.cross = acc.cross;
  for (double& v : out.mean_u1) v /= Z;
  for (double& v : out.mean_u2) v /= Z;
  for (double& v : out.cross) v /= Z;
  return out;
}

}  // namespace hdual
