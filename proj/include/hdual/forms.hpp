#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "hdual/graph.hpp"

namespace hdual {

/// Function on vertices, indexed by vertex id.
template <class T>
using ZeroForm = std::vector<T>;

/// Function on oriented edges, stored once per edge in its stored orientation.
template <class T>
using OneForm = std::vector<T>;

/// Value of ω on the edge e traversed from x; negated against the stored orientation.
template <class T>
T oriented(const FiniteGraph& g, const OneForm<T>& w, EdgeIndex e, Vertex from) {
  const Edge& ed = g.edge(e);
  if (ed.tail == from) return w[e];
  if (ed.head == from) return -w[e];
  throw std::invalid_argument("vertex is not an endpoint of edge");
}

/// (df)_{xy} = f_y - f_x.
template <class T>
OneForm<T> d(const FiniteGraph& g, const ZeroForm<T>& f) {
  if (f.size() != g.num_vertices()) throw std::invalid_argument("d: zero-form size mismatch");
  OneForm<T> out(g.num_edges());
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) out[e] = f[g.edge(e).head] - f[g.edge(e).tail];
  return out;
}

/// (d*ω)_x = sum over y ~ x of ω_{yx}.
template <class T>
ZeroForm<T> d_star(const FiniteGraph& g, const OneForm<T>& w) {
  if (w.size() != g.num_edges()) throw std::invalid_argument("d_star: one-form size mismatch");
  ZeroForm<T> out(g.num_vertices(), T{});
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
    out[g.edge(e).tail] -= w[e];
    out[g.edge(e).head] += w[e];
  }
  return out;
}

template <class T>
double inner(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("inner: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

/// Representative of an angle in (-π, π].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(a, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

inline OneForm<double> wrap(OneForm<double> w) {
  for (double& x : w) x = wrap_angle(x);
  return w;
}

/// Indicator of a single edge.
inline OneForm<double> edge_indicator(const FiniteGraph& g, EdgeIndex e, double value = 1.0) {
  OneForm<double> w(g.num_edges(), 0.0);
  w.at(e) = value;
  return w;
}

}  // namespace hdual
