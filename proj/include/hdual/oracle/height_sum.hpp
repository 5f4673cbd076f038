#pragma once

#include <atomic>
#include <complex>
#include <functional>
#include <vector>

#include "hdual/oracle/model.hpp"
#include "hdual/parallel.hpp"

namespace hdual {

/// Totals of one enumeration, in units where the zero configuration has weight 1.
struct HeightRun {
  double Z = 0.0;       // summed weight
  double tail = 0.0;    // upper bound on the weight that was not enumerated
  std::size_t nodes = 0;
};

/// Exhaustive sum over integer one-forms of the sector, weight Π_e c_{n_e}/c_0.
/// Coordinate i ranges over [-B_i, B_i] with B_i the table support of its edge
/// (or K if set). A branch is dropped when its partial weight times the largest
/// possible mass of its completions is below `prune`; dropped bounds add to tail.
///
/// Acc must provide add(weight, n, channels) and merge(other). channels[k] is
/// weight·exp(i(n, twists[k])). One accumulator copy is used per value of the
/// outermost coordinate and they are merged in index order.
template <class Acc>
HeightRun enumerate_heights(const ModelSpec& m, const std::vector<OneForm<double>>& twists, Acc& acc,
                            double prune = 1e-15) {
  const FiniteGraph& g = m.graph();
  const Parameterization par = parameterize(g, m.sector);
  const std::size_t E = g.num_edges(), D = par.dim(), K = twists.size();

  std::vector<std::vector<double>> t(E);
  std::vector<long> nmax(E);
  for (EdgeIndex e = 0; e < E; ++e) {
    const auto& p = m.potential(e);
    nmax[e] = p.nmax();
    for (long n = 0; n <= nmax[e]; ++n) t[e].push_back(p.c(n) / p.c(0));
  }
  auto table = [&](EdgeIndex e, long v) {
    const long a = v < 0 ? -v : v;
    return a <= nmax[e] ? t[e][a] : 0.0;
  };
  // phase[e][k][v + nmax] = exp(i v ε_e)
  std::vector<std::vector<std::vector<std::complex<double>>>> phase(E);
  for (EdgeIndex e = 0; e < E; ++e) {
    phase[e].resize(K);
    for (std::size_t k = 0; k < K; ++k)
      for (long v = -nmax[e]; v <= nmax[e]; ++v) phase[e][k].push_back(std::polar(1.0, v * twists[k].at(e)));
  }

  std::vector<long> box(D);
  std::vector<double> S(D), outside(D);
  for (std::size_t i = 0; i < D; ++i) {
    const EdgeIndex e = par.free_edge[i];
    box[i] = m.K > 0 ? std::min<long>(m.K, nmax[e]) : nmax[e];
    S[i] = 0.0;
    for (long v = -box[i]; v <= box[i]; ++v) S[i] += table(e, v);
    outside[i] = 0.0;
    for (long v = box[i] + 1; v <= nmax[e]; ++v) outside[i] += 2.0 * table(e, v);
  }
  std::vector<double> rest(D + 1, 1.0);  // rest[i] = Π_{j>=i} S_j
  for (std::size_t i = D; i-- > 0;) rest[i] = rest[i + 1] * S[i];

  std::vector<std::vector<std::pair<EdgeIndex, int>>> touches(D);
  for (EdgeIndex e = 0; e < E; ++e)
    for (auto [j, c] : par.terms[e]) touches[j].push_back({e, c});

  HeightRun total;
  for (std::size_t j = 0; j < D; ++j) {
    double b = outside[j];
    for (std::size_t l = 0; l < D; ++l)
      if (l != j) b *= S[l];
    total.tail += b;
  }

  // Constant edges carry n = 0: weight 1 and phase 1.
  std::vector<long> zero(E, 0);
  if (D == 0) {
    std::vector<std::complex<double>> ch(K, 1.0);
    acc.add(1.0, zero, ch.data());
    total.Z = 1.0;
    total.nodes = 1;
    return total;
  }

  const long width0 = 2 * box[0] + 1;
  std::vector<Acc> parts(static_cast<std::size_t>(width0), acc);
  std::vector<HeightRun> runs(static_cast<std::size_t>(width0));
  std::atomic<std::size_t> nodes{0};

  parallel_for(static_cast<std::size_t>(width0), [&](std::size_t chunk) {
    Acc& local = parts[chunk];
    HeightRun& run = runs[chunk];
    std::vector<long> val(E, 0);
    std::vector<double> w(D + 1, 1.0);
    std::vector<std::complex<double>> ch((D + 1) * K, 1.0);
    std::size_t since_check = 0;

    std::function<void(std::size_t, long)> visit = [&](std::size_t i, long v) {
      if (++since_check == 4096) {
        if (nodes.fetch_add(since_check) + since_check > m.budget)
          throw BudgetExceeded("height enumeration exceeded its node budget");
        since_check = 0;
      }
      for (auto [e, c] : touches[i]) val[e] += c * v;
      double wi = w[i];
      for (EdgeIndex e : par.settled[i]) {
        wi *= table(e, val[e]);
        if (wi == 0.0) break;
      }
      if (wi != 0.0) {
        const double bound = wi * rest[i + 1];
        if (bound < prune) {
          run.tail += bound;
        } else {
          w[i + 1] = wi;
          if (K > 0) {
            std::complex<double>* src = &ch[i * K];
            std::complex<double>* dst = &ch[(i + 1) * K];
            for (std::size_t k = 0; k < K; ++k) dst[k] = src[k];
            for (EdgeIndex e : par.settled[i]) {
              const long idx = val[e] + nmax[e];
              for (std::size_t k = 0; k < K; ++k) dst[k] *= phase[e][k][idx];
            }
          }
          if (i + 1 == D) {
            if (K > 0)
              for (std::size_t k = 0; k < K; ++k) ch[D * K + k] *= wi;
            local.add(wi, val, K > 0 ? &ch[D * K] : nullptr);
            run.Z += wi;
          } else {
            for (long u = -box[i + 1]; u <= box[i + 1]; ++u) visit(i + 1, u);
          }
        }
      }
      for (auto [e, c] : touches[i]) val[e] -= c * v;
    };
    visit(0, static_cast<long>(chunk) - box[0]);
    if (nodes.fetch_add(since_check) + since_check > m.budget)
      throw BudgetExceeded("height enumeration exceeded its node budget");
  });

  for (std::size_t c = 0; c < parts.size(); ++c) {
    if (c == 0)
      acc = parts[0];
    else
      acc.merge(parts[c]);
    total.Z += runs[c].Z;
    total.tail += runs[c].tail;
  }
  total.nodes = nodes.load();
  return total;
}

// ---------------------------------------------------------------------------
// Standard accumulators

/// Σ weight·φ(n) for a user observable.
struct HeightObservableAcc {
  std::function<double(const std::vector<long>&)> phi;
  double sum = 0.0;
  void add(double w, const std::vector<long>& n, const std::complex<double>*) { sum += w * phi(n); }
  void merge(const HeightObservableAcc& o) { sum += o.sum; }
};

/// Σ weight·exp(i(n, ε_k)) for a batch of twists.
struct HeightCharacteristicAcc {
  std::vector<std::complex<double>> sum;
  explicit HeightCharacteristicAcc(std::size_t k = 0) : sum(k, 0.0) {}
  void add(double, const std::vector<long>&, const std::complex<double>* ch) {
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += ch[k];
  }
  void merge(const HeightCharacteristicAcc& o) {
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += o.sum[k];
  }
};

/// Σ weight·n_e and Σ weight·n_e n_f.
struct HeightMomentAcc {
  std::size_t E = 0;
  std::vector<double> first, second;
  explicit HeightMomentAcc(std::size_t edges = 0) : E(edges), first(edges, 0.0), second(edges * edges, 0.0) {}
  void add(double w, const std::vector<long>& n, const std::complex<double>*) {
    for (std::size_t a = 0; a < E; ++a) {
      if (n[a] == 0) continue;
      const double wa = w * static_cast<double>(n[a]);
      first[a] += wa;
      for (std::size_t b = 0; b < E; ++b) second[a * E + b] += wa * static_cast<double>(n[b]);
    }
  }
  void merge(const HeightMomentAcc& o) {
    for (std::size_t i = 0; i < first.size(); ++i) first[i] += o.first[i];
    for (std::size_t i = 0; i < second.size(); ++i) second[i] += o.second[i];
  }
};

/// Expectation value with its truncation estimate (relative to the total mass).
struct OracleValue {
  double value = 0.0;
  double tail = 0.0;
};

/// ν_#[φ(n)], the height measure of the sector.
inline OracleValue height_expect(const ModelSpec& m, const std::function<double(const std::vector<long>&)>& phi) {
  HeightObservableAcc acc{phi};
  auto run = enumerate_heights(m, {}, acc);
  return {acc.sum / run.Z, run.tail / run.Z};
}

/// ν_#[exp(i(n, ε_k))] for each twist.
inline std::vector<std::complex<double>> height_characteristic(const ModelSpec& m,
                                                               const std::vector<OneForm<double>>& twists,
                                                               double* tail = nullptr) {
  HeightCharacteristicAcc acc(twists.size());
  auto run = enumerate_heights(m, twists, acc);
  for (auto& v : acc.sum) v /= run.Z;
  if (tail) *tail = run.tail / run.Z;
  return acc.sum;
}

/// Mean vector and second-moment matrix of the edge values.
struct HeightMoments {
  std::size_t E = 0;
  std::vector<double> mean;
  std::vector<double> second;  // row-major E x E: ν[n_e n_f]
  double tail = 0.0;

  double at(EdgeIndex a, EdgeIndex b) const { return second[a * E + b]; }

  /// ν[(n, ε)(n, ω)]
  double bilinear(const OneForm<double>& eps, const OneForm<double>& om) const {
    double s = 0.0;
    for (std::size_t a = 0; a < E; ++a)
      for (std::size_t b = 0; b < E; ++b) s += eps[a] * second[a * E + b] * om[b];
    return s;
  }
};

inline HeightMoments height_moments(const ModelSpec& m) {
  const std::size_t E = m.graph().num_edges();
  HeightMomentAcc acc(E);
  auto run = enumerate_heights(m, {}, acc);
  HeightMoments out;
  out.E = E;
  out.mean = acc.first;
  out.second = acc.second;
  for (double& v : out.mean) v /= run.Z;
  for (double& v : out.second) v /= run.Z;
  out.tail = run.tail / run.Z;
  return out;
}

}  // namespace hdual
