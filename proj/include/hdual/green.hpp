#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <stdexcept>
#include <vector>

#include "hdual/forms.hpp"

namespace hdual {

enum class Sector { star, diamond };

inline Sector dual(Sector s) { return s == Sector::star ? Sector::diamond : Sector::star; }
inline const char* to_string(Sector s) { return s == Sector::star ? "star" : "diamond"; }

/// Full graph Laplacian d*d on all vertices (multi-edges counted with multiplicity).
inline Eigen::MatrixXd laplacian_matrix(const FiniteGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    const auto a = static_cast<Eigen::Index>(e.tail), b = static_cast<Eigen::Index>(e.head);
    L(a, a) += 1;
    L(b, b) += 1;
    L(a, b) -= 1;
    L(b, a) -= 1;
  }
  return L;
}

/// Inverse of the Laplacian restricted to V minus the boundary vertex.
/// Dense LDLT up to kDenseLimit vertices, conjugate gradients above.
class GreenSolver {
 public:
  static constexpr std::size_t kDenseLimit = 2000;
  static constexpr double kCgTolerance = 1e-12;

  explicit GreenSolver(const FiniteGraph& g) : g_(&g) {
    const std::size_t n = g.num_vertices();
    reduced_.assign(n, -1);
    Eigen::Index k = 0;
    for (Vertex v = 0; v < n; ++v)
      if (v != g.boundary()) reduced_[v] = k++;
    dim_ = k;
    std::vector<Eigen::Triplet<double>> trip;
    for (const Edge& e : g.edges()) {
      const auto a = reduced_[e.tail], b = reduced_[e.head];
      if (a >= 0) trip.emplace_back(a, a, 1.0);
      if (b >= 0) trip.emplace_back(b, b, 1.0);
      if (a >= 0 && b >= 0) {
        trip.emplace_back(a, b, -1.0);
        trip.emplace_back(b, a, -1.0);
      }
    }
    sparse_.resize(dim_, dim_);
    sparse_.setFromTriplets(trip.begin(), trip.end());
    if (dim_ == 0) return;
    if (n <= kDenseLimit) {
      dense_ = true;
      ldlt_.compute(Eigen::MatrixXd(sparse_));
      if (ldlt_.info() != Eigen::Success) throw std::runtime_error("green_solve: factorization failed");
    } else {
      cg_.setTolerance(kCgTolerance);
      cg_.compute(sparse_);
    }
  }

  const FiniteGraph& graph() const { return *g_; }

  /// u with (Δu)(x) = f(x) for x ≠ ∂ and u(∂) = 0; f(∂) is ignored.
  ZeroForm<double> solve(const ZeroForm<double>& f) const {
    if (f.size() != g_->num_vertices()) throw std::invalid_argument("green_solve: size mismatch");
    ZeroForm<double> u(f.size(), 0.0);
    if (dim_ == 0) return u;
    Eigen::VectorXd rhs(dim_);
    for (Vertex v = 0; v < f.size(); ++v)
      if (reduced_[v] >= 0) rhs(reduced_[v]) = f[v];
    Eigen::VectorXd x;
    if (dense_) {
      x = ldlt_.solve(rhs);
    } else {
      x = cg_.solve(rhs);
      if (cg_.info() != Eigen::Success)
        throw std::runtime_error("green_solve: conjugate gradients did not converge");
    }
    for (Vertex v = 0; v < f.size(); ++v)
      if (reduced_[v] >= 0) u[v] = x(reduced_[v]);
    return u;
  }

  /// Δ^{-1}(x, y), zero if either is the boundary.
  double inverse_laplacian(Vertex x, Vertex y) const {
    ZeroForm<double> f(g_->num_vertices(), 0.0);
    f.at(y) = 1.0;
    return solve(f)[x];
  }

  /// Walk Green's function G = Δ^{-1} D: expected visits to y of the walk from x killed at ∂.
  double green(Vertex x, Vertex y) const {
    return inverse_laplacian(x, y) * static_cast<double>(g_->degree(y));
  }

  /// Dense Δ^{-1} on all vertices (zero row/column at ∂).
  Eigen::MatrixXd inverse_matrix() const {
    const auto n = static_cast<Eigen::Index>(g_->num_vertices());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Vertex y = 0; y < g_->num_vertices(); ++y) {
      if (reduced_[y] < 0) continue;
      ZeroForm<double> f(g_->num_vertices(), 0.0);
      f[y] = 1.0;
      auto u = solve(f);
      for (Vertex x = 0; x < g_->num_vertices(); ++x) out(x, y) = u[x];
    }
    return out;
  }

  /// (Δ^{-1} f, g), the quadratic form of the walk Green's function.
  double form(const ZeroForm<double>& f, const ZeroForm<double>& g) const {
    auto u = solve(f);
    double s = 0.0;
    for (Vertex v = 0; v < g.size(); ++v)
      if (v != g_->boundary()) s += u[v] * g[v];
    return s;
  }

 private:
  const FiniteGraph* g_;
  std::vector<Eigen::Index> reduced_;
  Eigen::Index dim_ = 0;
  bool dense_ = false;
  Eigen::SparseMatrix<double> sparse_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg_;
};

inline ZeroForm<double> green_solve(const FiniteGraph& g, const ZeroForm<double>& f) {
  return GreenSolver(g).solve(f);
}

/// Orthogonal projection onto exact forms (star) or co-closed forms (diamond).
inline OneForm<double> hodge_project(const GreenSolver& solver, const OneForm<double>& w, Sector s) {
  const FiniteGraph& g = solver.graph();
  OneForm<double> exact = d(g, solver.solve(d_star(g, w)));
  if (s == Sector::star) return exact;
  OneForm<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] - exact[i];
  return out;
}

inline OneForm<double> hodge_project(const FiniteGraph& g, const OneForm<double>& w, Sector s) {
  return hodge_project(GreenSolver(g), w, s);
}

}  // namespace hdual
