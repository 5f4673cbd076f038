#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdual/forms.hpp"
#include "hdual/stats.hpp"
#include "hdual/transforms.hpp"
#include "hdual/tree_gauge.hpp"

namespace hdual {

struct RunOptions {
  std::size_t sweeps = 10000;  // total, burn-in included
  std::size_t burn_in = 1000;
  std::size_t thin = 1;
  std::size_t resync_every = 10000;
  std::size_t tune_block = 100;  // sweeps between proposal-width updates during burn-in
};

inline std::size_t sample_count(const RunOptions& o) {
  if (o.sweeps <= o.burn_in) throw std::invalid_argument("sweeps must exceed burn-in");
  if (o.thin == 0) throw std::invalid_argument("thin must be >= 1");
  return (o.sweeps - o.burn_in) / o.thin;
}

namespace detail {

/// Metropolis acceptance for an energy change; infinite increases are rejected.
template <class Rng>
bool metropolis(double dE, Rng& rng) {
  if (dE <= 0.0) return true;
  if (!std::isfinite(dE)) return false;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < std::exp(-dE);
}

/// Proposal-width controller aiming at acceptance in [0.3, 0.5].
struct WidthTuner {
  double delta = 1.0;
  std::size_t tried = 0, accepted = 0;
  void record(bool ok) {
    ++tried;
    accepted += ok;
  }
  void adapt() {
    if (tried == 0) return;
    const double a = static_cast<double>(accepted) / static_cast<double>(tried);
    if (a > 0.5) delta = std::min(std::numbers::pi, delta * 1.25);
    if (a < 0.3) delta = std::max(1e-4, delta / 1.25);
    tried = accepted = 0;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Heights on vertices

/// ν_★: integer heights on V with h(∂) = 0, single-site ±1 Metropolis updates.
class HeightChain {
 public:
  HeightChain(const Network& net, std::uint64_t seed) : net_(net), rng_(seed), h_(net.graph.num_vertices(), 0) {
    const std::size_t E = net.graph.num_edges();
    logc_.resize(E);
    for (EdgeIndex e = 0; e < E; ++e) {
      const auto& p = net.potential(e);
      for (long n = 0; n <= static_cast<long>(p.nmax()); ++n) logc_[e].push_back(std::log(p.c(n)));
    }
    energy_.resize(E);
    resync();
  }

  const Network& network() const { return net_; }
  const std::vector<long>& heights() const { return h_; }
  long n(EdgeIndex e) const {
    const Edge& ed = net_.graph.edge(e);
    return h_[ed.head] - h_[ed.tail];
  }
  OneForm<long> gradient() const {
    OneForm<long> out(net_.graph.num_edges());
    for (EdgeIndex e = 0; e < out.size(); ++e) out[e] = n(e);
    return out;
  }

  /// V_e(n) = -log c_n, infinite outside the support.
  double edge_energy(EdgeIndex e, long n) const {
    const auto a = static_cast<std::size_t>(std::abs(n));
    return a < logc_[e].size() ? -logc_[e][a] : std::numeric_limits<double>::infinity();
  }
  double energy() const { return total_; }
  double recompute_energy(const std::vector<long>& h) const {
    double s = 0.0;
    for (EdgeIndex e = 0; e < net_.graph.num_edges(); ++e) {
      const Edge& ed = net_.graph.edge(e);
      s += edge_energy(e, h[ed.head] - h[ed.tail]);
    }
    return s;
  }
  /// Energy change of h_v -> h_v + step.
  double delta_energy(Vertex v, long step) const {
    double dE = 0.0;
    for (EdgeIndex e : net_.graph.incident(v)) {
      const Edge& ed = net_.graph.edge(e);
      const long n0 = h_[ed.head] - h_[ed.tail];
      const long n1 = n0 + (ed.head == v ? step : -step);
      dE += edge_energy(e, n1) - energy_[e];
    }
    return dE;
  }

  void sweep() {
    const Vertex b = net_.graph.boundary();
    for (Vertex v = 0; v < net_.graph.num_vertices(); ++v) {
      if (v == b) continue;
      const long step = std::uniform_int_distribution<int>(0, 1)(rng_) ? 1 : -1;
      const bool ok = detail::metropolis(delta_energy(v, step), rng_);
      ++tried_;
      if (!ok) continue;
      ++accepted_;
      h_[v] += step;
      for (EdgeIndex e : net_.graph.incident(v)) {
        const double old = energy_[e];
        energy_[e] = edge_energy(e, n(e));
        total_ += energy_[e] - old;
      }
    }
    ++sweeps_;
  }

  void tune() {}
  void resync() {
    const double before = total_;
    total_ = 0.0;
    for (EdgeIndex e = 0; e < net_.graph.num_edges(); ++e) total_ += energy_[e] = edge_energy(e, n(e));
    if (sweeps_ > 0 && std::abs(before - total_) > 1e-8 * std::max(1.0, std::abs(total_)))
      throw std::logic_error("height chain: cached energy drifted");
  }
  double acceptance() const { return tried_ ? static_cast<double>(accepted_) / static_cast<double>(tried_) : 0.0; }
  void reset_counters() { tried_ = accepted_ = 0; }
  std::size_t sweeps() const { return sweeps_; }
  void set_heights(std::vector<long> h) {
    h_ = std::move(h);
    h_[net_.graph.boundary()] = 0;
    resync();
  }

 private:
  Network net_;
  std::mt19937_64 rng_;
  std::vector<long> h_;
  std::vector<std::vector<double>> logc_;
  std::vector<double> energy_;
  double total_ = 0.0;
  std::size_t tried_ = 0, accepted_ = 0, sweeps_ = 0;
};

// ---------------------------------------------------------------------------
// Spins: shared edge-energy bookkeeping

namespace detail {

class SpinEdges {
 public:
  explicit SpinEdges(const Network& net) : net_(net), J_(net.graph.num_edges(), 0.0), U_(J_.size(), 0.0) {}

  double edge_energy(EdgeIndex e, double a) const { return net_.potential(e).spin().U(a); }
  const OneForm<double>& J() const { return J_; }
  double energy() const { return total_; }
  double recompute_energy(const OneForm<double>& J) const {
    double s = 0.0;
    for (EdgeIndex e = 0; e < J.size(); ++e) s += edge_energy(e, J[e]);
    return s;
  }
  void resync(bool check) {
    const double before = total_;
    total_ = 0.0;
    for (EdgeIndex e = 0; e < J_.size(); ++e) {
      J_[e] = wrap_angle(J_[e]);
      total_ += U_[e] = edge_energy(e, J_[e]);
    }
    if (check && std::abs(before - total_) > 1e-8 * std::max(1.0, std::abs(total_)))
      throw std::logic_error("spin chain: cached energy drifted");
  }

 protected:
  Network net_;
  OneForm<double> J_;
  std::vector<double> U_;
  double total_ = 0.0;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Spins on vertices

/// μ_★: angles θ on V with θ_∂ = 0 and J = dθ; θ_v -> θ_v + Uniform(-δ, δ).
class SpinStarChain : public detail::SpinEdges {
 public:
  SpinStarChain(const Network& net, std::uint64_t seed)
      : SpinEdges(net), rng_(seed), theta_(net.graph.num_vertices(), 0.0) {
    resync(false);
  }

  const ZeroForm<double>& theta() const { return theta_; }
  double delta() const { return tuner_.delta; }
  void set_delta(double d) { tuner_.delta = d; }

  double delta_energy(Vertex v, double step) const {
    double dE = 0.0;
    for (EdgeIndex e : net_.graph.incident(v)) {
      const Edge& ed = net_.graph.edge(e);
      dE += edge_energy(e, J_[e] + (ed.head == v ? step : -step)) - U_[e];
    }
    return dE;
  }

  void sweep() {
    const Vertex b = net_.graph.boundary();
    std::uniform_real_distribution<double> step(-tuner_.delta, tuner_.delta);
    for (Vertex v = 0; v < net_.graph.num_vertices(); ++v) {
      if (v == b) continue;
      const double s = step(rng_);
      const bool ok = detail::metropolis(delta_energy(v, s), rng_);
      tuner_.record(ok);
      ++tried_;
      if (!ok) continue;
      ++accepted_;
      theta_[v] = wrap_angle(theta_[v] + s);
      for (EdgeIndex e : net_.graph.incident(v)) {
        const Edge& ed = net_.graph.edge(e);
        J_[e] = wrap_angle(J_[e] + (ed.head == v ? s : -s));
        const double old = U_[e];
        U_[e] = edge_energy(e, J_[e]);
        total_ += U_[e] - old;
      }
    }
    ++sweeps_;
  }

  void tune() { tuner_.adapt(); }
  void resync() {
    for (EdgeIndex e = 0; e < J_.size(); ++e) {
      const Edge& ed = net_.graph.edge(e);
      J_[e] = theta_[ed.head] - theta_[ed.tail];
    }
    resync(true);
  }
  double acceptance() const { return tried_ ? static_cast<double>(accepted_) / static_cast<double>(tried_) : 0.0; }
  void reset_counters() { tried_ = accepted_ = 0; }
  std::size_t sweeps() const { return sweeps_; }

 private:
  using SpinEdges::resync;
  std::mt19937_64 rng_;
  ZeroForm<double> theta_;
  detail::WidthTuner tuner_;
  std::size_t tried_ = 0, accepted_ = 0, sweeps_ = 0;
};

// ---------------------------------------------------------------------------
// Spins in the divergence-free sector

/// A cycle move: J_e -> J_e + s_e δ for the signed edges of a cycle.
struct CycleMove {
  SignedCycle cycle;
  std::size_t kind = 0;  // moves of one kind share a proposal width
};

/// Fundamental cycles of the tree gauge: moving cycle f changes the free coordinate J_f.
inline std::vector<CycleMove> fundamental_moves(const FiniteGraph& g) {
  const TreeGauge gauge(g);
  std::vector<CycleMove> out;
  for (const auto& c : gauge.cycles()) out.push_back({c, 0});
  return out;
}

/// Plaquettes (kind 0) and one winding loop per row and per column (kind 1) of a torus.
inline std::vector<CycleMove> torus_moves(std::size_t side) {
  TorusLayout L{side};
  const long s = static_cast<long>(side);
  std::vector<CycleMove> out;
  for (long y = 0; y < s; ++y)
    for (long x = 0; x < s; ++x)
      out.push_back({{{L.horizontal(x, y), 1}, {L.vertical(x + 1, y), 1}, {L.horizontal(x, y + 1), -1},
                      {L.vertical(x, y), -1}},
                     0});
  for (long y = 0; y < s; ++y) {
    CycleMove m{{}, 1};
    for (long x = 0; x < s; ++x) m.cycle.push_back({L.horizontal(x, y), 1});
    out.push_back(m);
  }
  for (long x = 0; x < s; ++x) {
    CycleMove m{{}, 1};
    for (long y = 0; y < s; ++y) m.cycle.push_back({L.vertical(x, y), 1});
    out.push_back(m);
  }
  return out;
}

/// μ_◇: J in ker d* (mod 2π), moved along cycles, started at J = 0.
class SpinDiamondChain : public detail::SpinEdges {
 public:
  SpinDiamondChain(const Network& net, std::uint64_t seed, std::vector<CycleMove> moves = {})
      : SpinEdges(net), rng_(seed), moves_(moves.empty() ? fundamental_moves(net.graph) : std::move(moves)) {
    std::size_t kinds = 0;
    for (const auto& m : moves_) kinds = std::max(kinds, m.kind + 1);
    tuners_.resize(kinds);
    resync(false);
  }

  const std::vector<CycleMove>& moves() const { return moves_; }
  double delta(std::size_t kind = 0) const { return tuners_.at(kind).delta; }
  void set_delta(double d, std::size_t kind = 0) { tuners_.at(kind).delta = d; }

  double delta_energy(const CycleMove& m, double step) const {
    double dE = 0.0;
    for (auto [e, s] : m.cycle) dE += edge_energy(e, J_[e] + s * step) - U_[e];
    return dE;
  }

  void sweep() {
    for (const auto& m : moves_) {
      auto& t = tuners_[m.kind];
      const double s = std::uniform_real_distribution<double>(-t.delta, t.delta)(rng_);
      const bool ok = detail::metropolis(delta_energy(m, s), rng_);
      t.record(ok);
      ++tried_;
      if (!ok) continue;
      ++accepted_;
      for (auto [e, sg] : m.cycle) {
        J_[e] = wrap_angle(J_[e] + sg * s);
        const double old = U_[e];
        U_[e] = edge_energy(e, J_[e]);
        total_ += U_[e] - old;
      }
    }
    ++sweeps_;
  }

  void tune() {
    for (auto& t : tuners_) t.adapt();
  }

  /// Largest |d*J| at a vertex after reduction mod 2π.
  double divergence_defect() const {
    const auto div = d_star(net_.graph, J_);
    double worst = 0.0;
    for (double v : div) worst = std::max(worst, std::abs(wrap_angle(v)));
    return worst;
  }

  void resync() {
    resync(true);
    if (divergence_defect() > 1e-8) throw std::logic_error("diamond chain left ker d*");
  }
  double acceptance() const { return tried_ ? static_cast<double>(accepted_) / static_cast<double>(tried_) : 0.0; }
  void reset_counters() { tried_ = accepted_ = 0; }
  std::size_t sweeps() const { return sweeps_; }

 private:
  using SpinEdges::resync;
  std::mt19937_64 rng_;
  std::vector<CycleMove> moves_;
  std::vector<detail::WidthTuner> tuners_;
  std::size_t tried_ = 0, accepted_ = 0, sweeps_ = 0;
};

// ---------------------------------------------------------------------------
// Driver

/// Burn in (adapting proposal widths), then call observe(chain) every thin sweeps.
/// Energies are re-synchronised every resync_every sweeps.
template <class Chain, class Observer>
void run_chain(Chain& chain, const RunOptions& opt, Observer&& observe) {
  sample_count(opt);
  for (std::size_t s = 1; s <= opt.sweeps; ++s) {
    chain.sweep();
    if (s <= opt.burn_in && opt.tune_block > 0 && s % opt.tune_block == 0) chain.tune();
    if (opt.resync_every > 0 && s % opt.resync_every == 0) chain.resync();
    if (s > opt.burn_in && (s - opt.burn_in) % opt.thin == 0) observe(static_cast<const Chain&>(chain));
  }
  chain.resync();
}

}  // namespace hdual
