#pragma once

#include <string>
#include <vector>

#include "hdual/oracle/verify.hpp"
#include "hdual/transforms.hpp"

namespace hdual {

/// ν_★[(h, t)²] for a weight t on vertices; t(∂) is ignored.
inline double height_quadratic(const Network& net, ZeroForm<double> t) {
  GreenSolver solver(net.graph);
  t[net.graph.boundary()] = 0.0;
  const OneForm<double> eps = d(net.graph, solver.solve(t));
  return height_moments(ModelSpec{net, Sector::star}).bilinear(eps, eps);
}

/// ν_★[h_v²] for every vertex (0 at ∂), from one enumeration.
inline std::vector<double> height_variances(const Network& net) {
  const FiniteGraph& g = net.graph;
  GreenSolver solver(g);
  const auto hm = height_moments(ModelSpec{net, Sector::star});
  std::vector<double> out(g.num_vertices(), 0.0);
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    if (v == g.boundary()) continue;
    ZeroForm<double> t(g.num_vertices(), 0.0);
    t[v] = 1.0;
    const OneForm<double> eps = d(g, solver.solve(t));
    out[v] = hm.bilinear(eps, eps);
  }
  return out;
}

/// ν_★[exp(i(h, t))] for several vertex weights t, computed through n = dh.
inline std::vector<double> height_marginal_characteristic(const Network& net,
                                                          const std::vector<ZeroForm<double>>& ts) {
  GreenSolver solver(net.graph);
  std::vector<OneForm<double>> eps;
  for (auto t : ts) {
    t[net.graph.boundary()] = 0.0;
    eps.push_back(d(net.graph, solver.solve(t)));
  }
  const auto ch = height_characteristic(ModelSpec{net, Sector::star}, eps);
  std::vector<double> out;
  for (const auto& c : ch) out.push_back(c.real());
  return out;
}

/// Height variance at every original vertex must not increase from before to after;
/// map sends original vertices to vertices of after.
inline std::vector<VerificationReport> verify_variance_transport(const Network& before, const Network& after,
                                                                 const std::vector<Vertex>& map,
                                                                 const std::string& identity,
                                                                 const std::string& instance, double tol = 1e-9) {
  const auto vb = height_variances(before);
  const auto va = height_variances(after);
  std::vector<VerificationReport> out;
  for (Vertex v = 0; v < before.graph.num_vertices(); ++v) {
    if (v == before.graph.boundary()) continue;
    out.push_back(make_inequality(identity, instance + "#v" + std::to_string(v), va.at(map.at(v)), vb[v], tol));
  }
  return out;
}

/// Splitting an edge leaves the joint law of the original vertex heights unchanged:
/// characteristic functions at random integer-frequency weights agree.
inline std::vector<VerificationReport> verify_split_marginal(const Network& net, EdgeIndex e, int k,
                                                             const std::vector<ZeroForm<double>>& ts,
                                                             const std::string& instance, double tol = 1e-9) {
  const Network split = split_edge(net, e, k);
  const auto a = height_marginal_characteristic(net, ts);
  std::vector<ZeroForm<double>> lifted;
  for (const auto& t : ts) {
    ZeroForm<double> x(split.graph.num_vertices(), 0.0);
    std::copy(t.begin(), t.end(), x.begin());  // original vertices keep their labels
    lifted.push_back(x);
  }
  const auto b = height_marginal_characteristic(split, lifted);
  std::vector<VerificationReport> out;
  for (std::size_t i = 0; i < ts.size(); ++i)
    out.push_back(make_equality("split_marginal", instance + "#" + std::to_string(i), b[i], a[i], tol));
  return out;
}

/// Gluing x and y as the limit of an auxiliary xy(λ) edge between them: the height
/// variance at tracked vertices is non-decreasing in λ, equals the glued value at
/// λ = 0 and stays below the value without the edge.
struct AuxiliaryEdgeSweep {
  std::vector<double> lambdas;
  std::vector<std::vector<double>> variances;  // per λ, per original vertex
  std::vector<double> glued, free;
};

inline AuxiliaryEdgeSweep auxiliary_edge_sweep(const Network& net, Vertex x, Vertex y,
                                               const std::vector<double>& lambdas) {
  AuxiliaryEdgeSweep s;
  s.lambdas = lambdas;
  const std::size_t V = net.graph.num_vertices();
  for (double l : lambdas) {
    const auto var = height_variances(add_edge(net, x, y, make_xy(l)));
    s.variances.emplace_back(var.begin(), var.begin() + static_cast<long>(V));
  }
  std::vector<Vertex> map;
  const Network glued = glue_vertices(net, x, y, &map);
  const auto vg = height_variances(glued);
  for (Vertex v = 0; v < V; ++v) s.glued.push_back(vg.at(map[v]));
  s.free = height_variances(net);
  return s;
}

}  // namespace hdual
