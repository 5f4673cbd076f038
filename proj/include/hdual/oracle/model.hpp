#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdual/green.hpp"
#include "hdual/potentials.hpp"
#include "hdual/transforms.hpp"
#include "hdual/tree_gauge.hpp"

namespace hdual {

inline constexpr std::size_t kDefaultBudget = 20'000'000;

class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(const std::string& what)
      : std::runtime_error(what + " (raise the limit with --budget)") {}
};

/// Graph, per-edge potentials, sector and oracle resolution.
struct ModelSpec {
  Network net;
  Sector sector = Sector::star;
  int K = 0;  // height box per free coordinate; 0 = the full table support
  int M = 0;  // quadrature points per free coordinate; 0 = automatic
  std::size_t budget = kDefaultBudget;

  const FiniteGraph& graph() const { return net.graph; }
  const PotentialPair& potential(EdgeIndex e) const { return net.potential(e); }

  ModelSpec dual_spec() const {
    ModelSpec d = *this;
    d.sector = dual(sector);
    return d;
  }
};

inline ModelSpec make_spec(const FiniteGraph& g, const PotentialPair& p, Sector s) {
  return ModelSpec{homogeneous(g, p), s};
}

/// Linear coordinates on H_star or H_diamond: every edge value is a signed sum of
/// free coordinates. Star uses tree-edge values, diamond uses fundamental-cycle
/// coefficients; either way coordinate i equals the value on free_edge[i].
struct Parameterization {
  std::vector<EdgeIndex> free_edge;
  std::vector<std::vector<std::pair<std::size_t, int>>> terms;  // per edge
  std::vector<int> depth;                                       // last coordinate an edge depends on, -1 if none
  std::vector<std::vector<EdgeIndex>> settled;                  // edges completed at each depth
  std::vector<EdgeIndex> constant_edges;                        // edges identically zero

  std::size_t dim() const { return free_edge.size(); }

  /// Number of edges that depend on coordinate i.
  std::size_t column_support(std::size_t i) const {
    std::size_t k = 0;
    for (const auto& t : terms)
      for (auto [j, c] : t)
        if (j == i) ++k;
    return k;
  }
};

inline Parameterization parameterize(const FiniteGraph& g, Sector s) {
  const TreeGauge tg(g);
  const std::size_t E = g.num_edges();
  std::vector<EdgeIndex> free = s == Sector::star ? tg.tree_edges() : tg.non_tree_edges();
  std::vector<std::vector<std::pair<EdgeIndex, int>>> raw(E);  // in terms of free edges
  if (s == Sector::star) {
    for (EdgeIndex e : free) raw[e].push_back({e, 1});
    for (std::size_t i = 0; i < tg.num_free(); ++i) {
      const EdgeIndex f = tg.non_tree_edges()[i];
      for (auto [e, sign] : tg.cycles()[i])
        if (e != f) raw[f].push_back({e, -sign});
    }
  } else {
    for (std::size_t i = 0; i < tg.num_free(); ++i) {
      const EdgeIndex f = tg.non_tree_edges()[i];
      for (auto [e, sign] : tg.cycles()[i]) raw[e].push_back({f, sign});
    }
  }
  // Greedy order: next coordinate is the one that completes the most edges,
  // ties broken by edge id, so dependent factors enter as early as possible.
  std::vector<char> placed(E, 0);
  std::vector<EdgeIndex> order;
  std::sort(free.begin(), free.end());
  while (order.size() < free.size()) {
    EdgeIndex best = 0;
    long best_score = -1;
    for (EdgeIndex cand : free) {
      if (placed[cand]) continue;
      long score = 0;
      for (EdgeIndex e = 0; e < E; ++e) {
        if (raw[e].empty()) continue;
        bool uses = false, done = true;
        for (auto [f, sign] : raw[e]) {
          if (f == cand) uses = true;
          else if (!placed[f]) done = false;
        }
        if (uses && done) ++score;
      }
      if (score > best_score) {
        best_score = score;
        best = cand;
      }
    }
    placed[best] = 1;
    order.push_back(best);
  }
  Parameterization p;
  p.free_edge = order;
  std::vector<std::size_t> index_of(E, 0);
  for (std::size_t i = 0; i < order.size(); ++i) index_of[order[i]] = i;
  p.terms.resize(E);
  p.depth.assign(E, -1);
  p.settled.resize(order.size());
  for (EdgeIndex e = 0; e < E; ++e) {
    for (auto [f, sign] : raw[e]) {
      p.terms[e].push_back({index_of[f], sign});
      p.depth[e] = std::max(p.depth[e], static_cast<int>(index_of[f]));
    }
    if (p.depth[e] < 0)
      p.constant_edges.push_back(e);
    else
      p.settled[p.depth[e]].push_back(e);
  }
  return p;
}

/// Max over frequencies of |Fourier coefficient| of f on an N-grid, and the last
/// frequency whose coefficient exceeds rel times that max.
inline int fourier_bandwidth(const std::function<double(double)>& f, double rel, int N = 512) {
  std::vector<double> v(N);
  for (int j = 0; j < N; ++j) v[j] = f(2.0 * std::numbers::pi * j / N);
  std::vector<double> mag(N / 2 + 1);
  double mx = 0.0;
  for (int k = 0; k <= N / 2; ++k) {
    std::complex<double> s = 0.0;
    for (int j = 0; j < N; ++j) s += v[j] * std::polar(1.0, -2.0 * std::numbers::pi * ((long(k) * j) % N) / N);
    mag[k] = std::abs(s) / N;
    mx = std::max(mx, mag[k]);
  }
  int last = 0;
  for (int k = 0; k <= N / 2; ++k)
    if (mag[k] > rel * mx) last = k;
  return last;
}

/// Grid size for one potential when a coordinate touches up to kmax edges: the
/// Fourier coefficients of w^k beyond the grid stay below 1e-13 of the mean for
/// every k <= kmax (w has positive coefficients, so w^k bounds any product of k
/// shifted copies), with two extra frequencies for U'U' observables; and the grid
/// resolves U' and U'' down to 1e-9 of their largest coefficient.
inline int grid_for(const PotentialPair& p, int kmax) {
  static std::mutex mu;
  static std::map<std::pair<std::vector<double>, int>, int> cache;
  const auto key = std::make_pair(p.height().table(), kmax);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const auto& s = p.spin();
  const double w0 = s.w(0.0);
  int M = 8;
  for (int k = 1; k <= kmax; ++k)
    M = std::max(M, fourier_bandwidth([&](double a) { return std::pow(s.w(a) / w0, k); }, 1e-13, 1024) + 3);
  const int n1 = fourier_bandwidth([&](double a) { return s.U1(a); }, 1e-9);
  const int n2 = fourier_bandwidth([&](double a) { return s.U2(a); }, 1e-9);
  M = std::max(M, std::max(n1, n2) + 2);
  M += M % 2;
  std::lock_guard<std::mutex> lock(mu);
  cache[key] = M;
  return M;
}

inline int default_grid(const ModelSpec& m, const Parameterization& p) {
  int kmax = 1;
  for (std::size_t i = 0; i < p.dim(); ++i) kmax = std::max<int>(kmax, static_cast<int>(p.column_support(i)));
  int M = 8;
  std::vector<PotentialId> seen;
  for (const Edge& e : m.graph().edges()) {
    if (std::find(seen.begin(), seen.end(), e.potential) != seen.end()) continue;
    seen.push_back(e.potential);
    M = std::max(M, grid_for(m.net.potentials[e.potential], kmax));
  }
  return M;
}

}  // namespace hdual
