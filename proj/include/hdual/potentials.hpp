#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hdual {

/// Dropped-tail target for adaptive table truncation, relative to c_0.
inline constexpr double kTableTail = 1e-14;

// ---------------------------------------------------------------------------
// Modified Bessel functions of integer order

/// e^{-x} I_n(x) for n = 0..nmax by Miller's backward recurrence, normalised
/// through e^{x} = I_0(x) + 2 Σ_{n≥1} I_n(x).
inline std::vector<double> bessel_i_scaled(double x, int nmax) {
  if (x < 0) throw std::invalid_argument("bessel: negative argument");
  std::vector<double> out(nmax + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const int start = std::max(nmax, static_cast<int>(std::ceil(x + 40.0 * std::sqrt(x + 1.0)))) + 40;
  std::vector<double> t(start + 2, 0.0);
  t[start + 1] = 0.0;
  t[start] = 1e-300;
  for (int n = start; n >= 1; --n) {
    t[n - 1] = (2.0 * n / x) * t[n] + t[n + 1];
    if (t[n - 1] > 1e250) {
      for (int k = n - 1; k <= start + 1; ++k) t[k] *= 1e-250;
    }
  }
  double norm = t[0];
  for (int n = 1; n <= start; ++n) norm += 2.0 * t[n];
  for (int n = 0; n <= nmax; ++n) out[n] = t[n] / norm;
  return out;
}

/// I_n(x) for n = 0..nmax; x must be small enough for e^x to be finite.
inline std::vector<double> bessel_i(double x, int nmax) {
  if (x > 700.0) throw std::overflow_error("bessel_i: argument too large for unscaled values");
  auto t = bessel_i_scaled(x, nmax);
  const double ex = std::exp(x);
  for (double& v : t) v *= ex;
  return t;
}

// ---------------------------------------------------------------------------
// Height potential: symmetric table c_n = e^{-V(n)}

class HeightPotential {
 public:
  HeightPotential() : c_{1.0} {}

  /// c holds c_0..c_N; entries beyond N are zero (V = ∞).
  explicit HeightPotential(std::vector<double> c) : c_(std::move(c)) {
    if (c_.empty()) throw std::invalid_argument("height potential: empty table");
    if (!(c_[0] > 0.0)) throw std::invalid_argument("height potential: c_0 must be positive");
    for (double v : c_)
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("height potential: coefficients must be finite and >= 0");
    while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
  }

  int nmax() const { return static_cast<int>(c_.size()) - 1; }
  double c(long n) const {
    const auto a = static_cast<std::size_t>(n < 0 ? -n : n);
    return a < c_.size() ? c_[a] : 0.0;
  }
  const std::vector<double>& table() const { return c_; }

  /// V(n) = -log c_n; infinite outside the support.
  double V(long n) const {
    double v = c(n);
    return v > 0.0 ? -std::log(v) : std::numeric_limits<double>::infinity();
  }

  /// Σ_n c_n over all integers.
  double total() const {
    double s = c_[0];
    for (std::size_t n = 1; n < c_.size(); ++n) s += 2.0 * c_[n];
    return s;
  }

  /// Σ_n n² c_n over all integers.
  double second_moment() const {
    double s = 0.0;
    for (std::size_t n = 1; n < c_.size(); ++n) s += 2.0 * static_cast<double>(n * n) * c_[n];
    return s;
  }

 private:
  std::vector<double> c_;
};

/// Smallest N with 2 Σ_{n>N} (1+n²) c_n < tol·c_0, for a table given by a generator.
template <class F>
std::vector<double> adaptive_table(F&& coefficient, double tol = kTableTail, int hard_max = 4096) {
  std::vector<double> c;
  double c0 = coefficient(0);
  c.push_back(c0);
  // Extend until the terms themselves are far below the target, then trim.
  for (int n = 1; n <= hard_max; ++n) {
    double v = coefficient(n);
    c.push_back(v);
    if (v == 0.0 || (2.0 * (1.0 + double(n) * n) * v < 1e-6 * tol * c0 && n > 2)) break;
  }
  double tail = 0.0;
  int N = static_cast<int>(c.size()) - 1;
  while (N > 0) {
    double add = 2.0 * (1.0 + double(N) * N) * c[N];
    if (tail + add >= tol * c0) break;
    tail += add;
    --N;
  }
  c.resize(N + 1);
  return c;
}

// ---------------------------------------------------------------------------
// Spin potential: w(α) = Σ c_n e^{inα}, U = -log w

struct SpinValues {
  double w, U, U1, U2;
};

enum class Family { xy, ivgff, lipschitz, annealed, custom, product };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::xy: return "xy";
    case Family::ivgff: return "ivgff";
    case Family::lipschitz: return "lipschitz";
    case Family::annealed: return "annealed";
    case Family::custom: return "custom";
    case Family::product: return "product";
  }
  return "?";
}

class SpinPotential {
 public:
  SpinPotential() = default;

  /// closed_form_beta >= 0 enables the exact XY evaluation U = -β cos α + log_scale.
  explicit SpinPotential(HeightPotential h, double closed_form_beta = -1.0, double log_scale = 0.0)
      : h_(std::move(h)), xy_beta_(closed_form_beta), log_scale_(log_scale) {}

  const HeightPotential& height() const { return h_; }
  /// Stored tables are w e^{-log_scale}; U already includes the shift.
  double log_scale() const { return log_scale_; }

  /// Direct trigonometric sums from the table.
  SpinValues evaluate_series(double a) const {
    const auto& c = h_.table();
    double w = c[0], w1 = 0.0, w2 = 0.0;
    if (c.size() > 1) {
      const double c1 = std::cos(a), s1 = std::sin(a);
      double cn = c1, sn = s1;
      for (std::size_t n = 1; n < c.size(); ++n) {
        const double nn = static_cast<double>(n);
        w += 2.0 * c[n] * cn;
        w1 -= 2.0 * nn * c[n] * sn;
        w2 -= 2.0 * nn * nn * c[n] * cn;
        const double cn1 = cn * c1 - sn * s1;
        sn = sn * c1 + cn * s1;
        cn = cn1;
      }
    }
    SpinValues v;
    v.w = w;
    v.U = w > 0.0 ? -std::log(w) : std::numeric_limits<double>::infinity();
    v.U1 = -w1 / w;
    v.U2 = (w1 * w1 - w2 * w) / (w * w);
    return v;
  }

  SpinValues evaluate(double a) const {
    if (xy_beta_ < 0.0) return evaluate_series(a);
    const double ca = std::cos(a), sa = std::sin(a);
    const double U = -xy_beta_ * ca + log_scale_;
    return {std::exp(-U), U, xy_beta_ * sa, xy_beta_ * ca};
  }

  double w(double a) const { return evaluate(a).w; }
  double U(double a) const { return evaluate(a).U; }
  double U1(double a) const { return evaluate(a).U1; }
  double U2(double a) const { return evaluate(a).U2; }

 private:
  HeightPotential h_;
  double xy_beta_ = -1.0;
  double log_scale_ = 0.0;
};

// ---------------------------------------------------------------------------
// Potential pairs

struct AnnealedComponent {
  double gamma;
  double weight;
};

class PotentialPair {
 public:
  PotentialPair() : spin_(HeightPotential{}) {}

  PotentialPair(Family family, double beta, HeightPotential h, std::vector<AnnealedComponent> annealed = {},
                double closed_form_beta = -1.0, double log_scale = 0.0, std::string label = {})
      : family_(family),
        beta_(beta),
        annealed_(std::move(annealed)),
        spin_(std::move(h), closed_form_beta, log_scale),
        label_(std::move(label)) {}

  Family family() const { return family_; }
  double beta() const { return beta_; }
  const std::vector<AnnealedComponent>& annealed() const { return annealed_; }
  const HeightPotential& height() const { return spin_.height(); }
  const SpinPotential& spin() const { return spin_; }
  double c(long n) const { return spin_.height().c(n); }
  int nmax() const { return spin_.height().nmax(); }
  /// Fourier coefficient of the unshifted weight (xy tables are stored times e^{-β}).
  double coefficient(long n) const { return c(n) * std::exp(spin_.log_scale()); }

  /// Carries an inverse-temperature scale that split_potential can divide.
  bool scalable() const { return family_ == Family::xy; }

  std::string describe() const {
    if (!label_.empty()) return label_;
    std::ostringstream os;
    os.precision(17);
    os << to_string(family_);
    switch (family_) {
      case Family::xy:
      case Family::ivgff:
      case Family::lipschitz:
        os << '(' << beta_ << ')';
        break;
      case Family::annealed:
        os << '(';
        for (std::size_t i = 0; i < annealed_.size(); ++i)
          os << (i ? ";" : "") << annealed_[i].gamma << ':' << annealed_[i].weight;
        os << ')';
        break;
      default:
        break;
    }
    return os.str();
  }

 private:
  Family family_ = Family::custom;
  double beta_ = 0.0;
  std::vector<AnnealedComponent> annealed_;
  SpinPotential spin_;
  std::string label_;
};

inline PotentialPair make_xy(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("xy: beta must be >= 0");
  const int probe = static_cast<int>(std::ceil(beta + 60.0 * std::sqrt(beta + 1.0))) + 60;
  auto scaled = bessel_i_scaled(beta, probe);
  double log_scale = 0.0;
  if (beta <= 700.0) {
    const double eb = std::exp(beta);
    for (double& v : scaled) v *= eb;
  } else {
    log_scale = beta;
  }
  auto table = adaptive_table([&](int n) { return n <= probe ? scaled[n] : 0.0; });
  return PotentialPair(Family::xy, beta, HeightPotential(std::move(table)), {}, beta, log_scale);
}

inline PotentialPair make_ivgff(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("ivgff: beta must be > 0");
  auto table = adaptive_table([&](int n) { return std::exp(-beta * double(n) * n); });
  return PotentialPair(Family::ivgff, beta, HeightPotential(std::move(table)));
}

inline PotentialPair make_lipschitz(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("lipschitz: beta must be > 0");
  const double a = std::exp(-beta);
  if (a >= 0.5)
    throw std::invalid_argument("lipschitz: exp(-beta) >= 1/2 makes w(pi) = 1 - 2exp(-beta) <= 0");
  return PotentialPair(Family::lipschitz, beta, HeightPotential({1.0, a}));
}

inline PotentialPair make_annealed(std::vector<AnnealedComponent> parts) {
  if (parts.empty()) throw std::invalid_argument("annealed: no components");
  bool any = false;
  for (const auto& p : parts) {
    if (!(p.gamma > 0.0)) throw std::invalid_argument("annealed: gamma must be > 0");
    if (!(p.weight >= 0.0)) throw std::invalid_argument("annealed: weights must be >= 0");
    any = any || p.weight > 0.0;
  }
  if (!any) throw std::invalid_argument("annealed: weights are all zero");
  auto table = adaptive_table([&](int n) {
    double s = 0.0;
    for (const auto& p : parts) s += p.weight * std::exp(-0.5 * p.gamma * double(n) * n);
    return s;
  });
  return PotentialPair(Family::annealed, 0.0, HeightPotential(std::move(table)), std::move(parts));
}

inline PotentialPair make_custom(std::vector<double> table, std::string label = {}) {
  return PotentialPair(Family::custom, 0.0, HeightPotential(std::move(table)), {}, -1.0, 0.0, std::move(label));
}

/// Gaussian heights V(n) = n²/(2β); β = 0 is the frozen table {1}.
inline PotentialPair make_gaussian(double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("gaussian: beta must be >= 0");
  if (beta == 0.0) return make_custom({1.0}, "gaussian(0)");
  auto p = make_ivgff(1.0 / (2.0 * beta));
  std::ostringstream os;
  os.precision(17);
  os << "gaussian(" << beta << ')';
  return make_custom(p.height().table(), os.str());
}

/// Custom table from two-column text "n c_n"; missing n are zero, negative n mirror positive.
inline PotentialPair read_custom_table(std::istream& is) {
  std::vector<double> c;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    long n;
    double v;
    if (line.empty() || line[0] == '#') continue;
    if (!(ls >> n >> v)) throw std::invalid_argument("custom table: expected 'n c_n' per line");
    const auto a = static_cast<std::size_t>(n < 0 ? -n : n);
    if (a >= c.size()) c.resize(a + 1, 0.0);
    c[a] = v;
  }
  return make_custom(std::move(c));
}

// ---------------------------------------------------------------------------
// Bridges and diagnostics

/// Cosine Fourier coefficients a_k = (1/M) Σ_j F(θ_j) cos(kθ_j), k = 0..N, θ_j = 2πj/M.
/// max_imag receives the largest |(1/M) Σ F sin(kθ_j)|.
inline std::vector<double> fourier_coefficients(const std::function<double(double)>& F, int N, int M,
                                                double* max_imag = nullptr) {
  std::vector<double> vals(M);
  for (int j = 0; j < M; ++j) vals[j] = F(2.0 * std::numbers::pi * j / M);
  std::vector<double> a(N + 1, 0.0);
  double imag = 0.0;
  for (int k = 0; k <= N; ++k) {
    double re = 0.0, im = 0.0;
    for (int j = 0; j < M; ++j) {
      const long idx = (static_cast<long>(k) * j) % M;
      const double t = 2.0 * std::numbers::pi * idx / M;
      re += vals[j] * std::cos(t);
      im += vals[j] * std::sin(t);
    }
    a[k] = re / M;
    imag = std::max(imag, std::abs(im / M));
  }
  if (max_imag) *max_imag = imag;
  return a;
}

/// c_n = ∫ e^{-U} e^{-inθ} dθ/2π by periodic quadrature. M = 0 means start at 256
/// and double until two successive extractions agree to 1e-12 (relative to c_0).
inline HeightPotential height_from_spin(const std::function<double(double)>& U, int N, int M = 0) {
  auto w = [&](double t) { return std::exp(-U(t)); };
  std::vector<double> a;
  double imag = 0.0;
  if (M > 0) {
    a = fourier_coefficients(w, N, M, &imag);
  } else {
    int m = 256;
    auto prev = fourier_coefficients(w, N, m, &imag);
    for (;;) {
      m *= 2;
      a = fourier_coefficients(w, N, m, &imag);
      double diff = 0.0;
      for (int k = 0; k <= N; ++k) diff = std::max(diff, std::abs(a[k] - prev[k]));
      if (diff <= 1e-12 * std::abs(a[0]) || m >= (1 << 16)) break;
      prev = a;
    }
  }
  if (!(a[0] > 0.0)) throw std::domain_error("height_from_spin: non-positive c_0");
  if (imag > 1e-12 * a[0]) throw std::domain_error("height_from_spin: U is not even (imaginary coefficients)");
  const double floor = 1e-13 * a[0];
  for (int k = 0; k <= N; ++k) {
    if (a[k] < -floor) {
      std::ostringstream os;
      os << "height_from_spin: not positive definite as height dual (c_" << k << " = " << a[k] << ")";
      throw std::domain_error(os.str());
    }
    if (a[k] < 0.0) a[k] = 0.0;
  }
  return HeightPotential(std::move(a));
}

/// Re-synthesise w from the table and re-extract coefficients; returns max_n |Δc_n| / c_0.
inline double round_trip_error(const PotentialPair& p, int M = 0) {
  const auto& c = p.height().table();
  const SpinPotential series(p.height());
  auto back = height_from_spin([&](double t) { return series.evaluate_series(t).U; }, p.nmax(), M);
  double err = 0.0;
  for (int n = 0; n <= p.nmax(); ++n) err = std::max(err, std::abs(back.c(n) - c[n]));
  return err / c[0];
}

struct PositiveDefiniteReport {
  double margin;  // smallest cosine coefficient (round-off floor applied)
  int argmin;     // its frequency
};

/// Positive definiteness of an even function via its Fourier coefficients on an M-grid.
inline PositiveDefiniteReport check_positive_definite(const std::function<double(double)>& F, int M = 512) {
  auto a = fourier_coefficients(F, M / 2, M);
  double amax = 0.0;
  for (double v : a) amax = std::max(amax, std::abs(v));
  PositiveDefiniteReport r{std::numeric_limits<double>::infinity(), 0};
  for (int k = 0; k < static_cast<int>(a.size()); ++k) {
    double v = std::abs(a[k]) <= 1e-13 * amax ? 0.0 : a[k];
    if (v < r.margin) r = {v, k};
  }
  return r;
}

struct DivisibilityEntry {
  int m;
  double smallest;  // smallest coefficient of e^{-U/m}, relative to its zeroth
  int argmin;
};

/// For each m, the Fourier coefficients of e^{-U/m}; infinitely divisible potentials keep them all >= 0.
inline std::vector<DivisibilityEntry> check_infinitely_divisible(const std::function<double(double)>& U,
                                                                 const std::vector<int>& powers, int M = 512) {
  std::vector<DivisibilityEntry> out;
  for (int m : powers) {
    if (m < 1) throw std::invalid_argument("check_infinitely_divisible: powers must be >= 1");
    auto a = fourier_coefficients([&](double t) { return std::exp(-U(t) / m); }, M / 2, M);
    DivisibilityEntry e{m, std::numeric_limits<double>::infinity(), 0};
    for (int k = 0; k < static_cast<int>(a.size()); ++k) {
      double v = a[k] / a[0];
      if (std::abs(v) <= 1e-13) v = 0.0;
      if (v < e.smallest) e = {m, v, k};
    }
    out.push_back(e);
  }
  return out;
}

/// min over k >= 1 of (c_k² - c_{k-1}c_{k+1}) / c_0²; nonnegative iff V is convex on its support.
inline double convexity_slack(const HeightPotential& V) {
  const double c0 = V.c(0);
  double worst = std::numeric_limits<double>::infinity();
  for (long k = 1; k <= V.nmax() + 1; ++k)
    worst = std::min(worst, (V.c(k) * V.c(k) - V.c(k - 1) * V.c(k + 1)) / (c0 * c0));
  return worst;
}

/// Discrete convolution of symmetric tables.
inline std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  const long na = static_cast<long>(a.size()) - 1, nb = static_cast<long>(b.size()) - 1;
  auto at = [](const std::vector<double>& t, long n) {
    const auto k = static_cast<std::size_t>(n < 0 ? -n : n);
    return k < t.size() ? t[k] : 0.0;
  };
  std::vector<double> out(na + nb + 1, 0.0);
  for (long n = 0; n <= na + nb; ++n) {
    double s = 0.0;
    for (long m = -na; m <= na; ++m) s += at(a, m) * at(b, n - m);
    out[n] = s;
  }
  return out;
}

inline std::vector<double> convolve_power(const std::vector<double>& a, int k) {
  if (k < 1) throw std::invalid_argument("convolve_power: k must be >= 1");
  std::vector<double> out = a;
  for (int i = 1; i < k; ++i) out = convolve(out, a);
  return out;
}

/// The pair whose k-fold convolution is p: xy(β) -> xy(β/k).
inline PotentialPair split_potential(const PotentialPair& p, int k) {
  if (k < 1) throw std::invalid_argument("split_potential: k must be >= 1");
  if (k == 1) return p;
  if (!p.scalable()) throw std::invalid_argument("split_potential: potential " + p.describe() + " has no beta scale");
  return make_xy(p.beta() / k);
}

/// max_n |(q^{*k})_n - p_n| / p_0 where q = split_potential(p, k).
inline double split_convolution_error(const PotentialPair& p, int k) {
  auto q = split_potential(p, k);
  auto conv = convolve_power(q.height().table(), k);
  double err = 0.0;
  const long N = std::max<long>(static_cast<long>(conv.size()) - 1, p.nmax());
  for (long n = 0; n <= N; ++n) {
    const double a = n < static_cast<long>(conv.size()) ? conv[n] : 0.0;
    err = std::max(err, std::abs(a - p.c(n)));
  }
  return err / p.c(0);
}

/// Effective potential of two parallel edges: V1 + V2, i.e. the entrywise product of tables.
inline PotentialPair merge_parallel(const PotentialPair& a, const PotentialPair& b) {
  if (a.height().nmax() == 0 && a.c(0) == 1.0) return b;
  if (b.height().nmax() == 0 && b.c(0) == 1.0) return a;
  if (a.family() == Family::ivgff && b.family() == Family::ivgff) return make_ivgff(a.beta() + b.beta());
  const int N = std::min(a.nmax(), b.nmax());
  std::vector<double> c(N + 1);
  for (int n = 0; n <= N; ++n) c[n] = a.c(n) * b.c(n);
  if (c[0] < 1e-200 || c[0] > 1e200) {
    const double s = c[0];
    for (double& v : c) v /= s;
  }
  return PotentialPair(Family::product, 0.0, HeightPotential(std::move(c)), {}, -1.0, 0.0,
                       "product(" + a.describe() + "," + b.describe() + ")");
}

/// Parse "xy(1.5)", "ivgff(1)", "lipschitz(2)", "gaussian(0.5)", "annealed(g:w;g:w)".
inline PotentialPair parse_potential(const std::string& text) {
  auto open = text.find('('), close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw std::invalid_argument("potential spec '" + text + "' must look like family(args)");
  const std::string fam = text.substr(0, open), arg = text.substr(open + 1, close - open - 1);
  if (fam == "annealed") {
    std::vector<AnnealedComponent> parts;
    std::istringstream is(arg);
    std::string item;
    while (std::getline(is, item, ';')) {
      auto colon = item.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("annealed component must be gamma:weight");
      parts.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    }
    return make_annealed(std::move(parts));
  }
  double beta;
  try {
    std::size_t used = 0;
    beta = std::stod(arg, &used);
    if (used != arg.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw std::invalid_argument("potential spec '" + text + "': bad numeric argument");
  }
  if (fam == "xy") return make_xy(beta);
  if (fam == "ivgff") return make_ivgff(beta);
  if (fam == "lipschitz") return make_lipschitz(beta);
  if (fam == "gaussian") return make_gaussian(beta);
  throw std::invalid_argument("unknown potential family '" + fam + "'");
}

}  // namespace hdual
