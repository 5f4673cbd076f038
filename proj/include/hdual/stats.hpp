#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace hdual {

/// Mean with a batch-means standard error. tau is the integrated
/// autocorrelation time n·SE²/var (1 for independent samples).
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  double tau = 1.0;
  std::size_t n = 0;
  std::size_t batches = 0;
  bool reliable = false;  // at least 16 batches
};

inline constexpr std::size_t kMinBatches = 16;

/// Number of batches used for n samples.
inline std::size_t batch_count(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
}

/// Batch-means estimate with ceil(sqrt(n)) batches of equal size; trailing
/// samples that do not fill a batch are dropped from the error bar only.
inline Estimate batch_means(const std::vector<double>& x) {
  Estimate e;
  e.n = x.size();
  if (x.empty()) return e;
  double sum = 0.0, sq = 0.0;
  for (double v : x) sum += v;
  e.mean = sum / static_cast<double>(x.size());
  for (double v : x) sq += (v - e.mean) * (v - e.mean);
  const double var = x.size() > 1 ? sq / static_cast<double>(x.size() - 1) : 0.0;
  const std::size_t B = batch_count(x.size());
  const std::size_t b = x.size() / B;
  e.batches = b > 0 ? B : 0;
  e.reliable = e.batches >= kMinBatches;
  if (e.batches < 2) return e;
  std::vector<double> means(B, 0.0);
  for (std::size_t k = 0; k < B; ++k) {
    for (std::size_t i = 0; i < b; ++i) means[k] += x[k * b + i];
    means[k] /= static_cast<double>(b);
  }
  double m = 0.0, s = 0.0;
  for (double v : means) m += v;
  m /= static_cast<double>(B);
  for (double v : means) s += (v - m) * (v - m);
  const double var_batch = s / static_cast<double>(B - 1);
  e.se = std::sqrt(var_batch / static_cast<double>(B));
  e.tau = var > 0.0 ? static_cast<double>(b) * var_batch / var : 1.0;
  return e;
}

/// Streaming batch means for a vector of observables with a fixed batch size.
/// Batch means are kept so linear combinations get their own error bars and
/// independent chains can be pooled by concatenating batches.
class BatchAccumulator {
 public:
  BatchAccumulator() = default;
  BatchAccumulator(std::size_t dim, std::size_t batch_size)
      : dim_(dim), b_(std::max<std::size_t>(1, batch_size)), cur_(dim, 0.0), sum_(dim, 0.0), sq_(dim, 0.0) {}

  /// Batch size giving ceil(sqrt(n)) batches for n expected samples.
  static std::size_t batch_size_for(std::size_t n) {
    if (n == 0) return 1;
    return std::max<std::size_t>(1, n / batch_count(n));
  }

  std::size_t dim() const { return dim_; }
  std::size_t samples() const { return n_; }
  std::size_t batches() const { return batches_.size() / std::max<std::size_t>(dim_, 1); }

  void add(const double* x) {
    for (std::size_t i = 0; i < dim_; ++i) {
      cur_[i] += x[i];
      sum_[i] += x[i];
      sq_[i] += x[i] * x[i];
    }
    ++n_;
    if (++in_batch_ == b_) {
      for (std::size_t i = 0; i < dim_; ++i) {
        batches_.push_back(cur_[i] / static_cast<double>(b_));
        cur_[i] = 0.0;
      }
      in_batch_ = 0;
    }
  }
  void add(const std::vector<double>& x) {
    if (x.size() != dim_) throw std::invalid_argument("BatchAccumulator: dimension mismatch");
    add(x.data());
  }

  /// Pool another chain's samples (same dimension and batch size).
  void merge(const BatchAccumulator& o) {
    if (o.dim_ != dim_ || o.b_ != b_) throw std::invalid_argument("BatchAccumulator: incompatible merge");
    batches_.insert(batches_.end(), o.batches_.begin(), o.batches_.end());
    for (std::size_t i = 0; i < dim_; ++i) {
      sum_[i] += o.sum_[i];
      sq_[i] += o.sq_[i];
    }
    n_ += o.n_;
  }

  Estimate estimate(std::size_t i) const {
    std::vector<double> c(dim_, 0.0);
    c.at(i) = 1.0;
    return linear(c);
  }

  /// Estimate of a smooth function of the means: value at the pooled means,
  /// error bar from the spread of f over batch means.
  Estimate apply(const std::function<double(const double*)>& f) const {
    Estimate e;
    e.n = n_;
    const std::size_t B = batches();
    e.batches = B;
    e.reliable = B >= kMinBatches;
    if (n_ == 0) return e;
    std::vector<double> mean(dim_);
    for (std::size_t i = 0; i < dim_; ++i) mean[i] = sum_[i] / static_cast<double>(n_);
    e.mean = f(mean.data());
    if (B < 2) return e;
    std::vector<double> v(B);
    double m = 0.0;
    for (std::size_t k = 0; k < B; ++k) m += v[k] = f(&batches_[k * dim_]);
    m /= static_cast<double>(B);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    e.se = std::sqrt(s / static_cast<double>(B - 1) / static_cast<double>(B));
    return e;
  }

  /// Estimate of Σ_i coeff_i x_i.
  Estimate linear(const std::vector<double>& coeff) const {
    Estimate e;
    e.n = n_;
    const std::size_t B = batches();
    e.batches = B;
    e.reliable = B >= kMinBatches;
    if (n_ == 0) return e;
    double mean = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) mean += coeff[i] * sum_[i];
    e.mean = mean / static_cast<double>(n_);
    if (B < 2) return e;
    std::vector<double> m(B, 0.0);
    double bm = 0.0;
    for (std::size_t k = 0; k < B; ++k) {
      for (std::size_t i = 0; i < dim_; ++i) m[k] += coeff[i] * batches_[k * dim_ + i];
      bm += m[k];
    }
    bm /= static_cast<double>(B);
    double s = 0.0;
    for (double v : m) s += (v - bm) * (v - bm);
    const double var_batch = s / static_cast<double>(B - 1);
    e.se = std::sqrt(var_batch / static_cast<double>(B));
    // Sample variance is only available for single coordinates.
    std::size_t nz = 0, idx = 0;
    for (std::size_t i = 0; i < dim_; ++i)
      if (coeff[i] != 0.0) {
        ++nz;
        idx = i;
      }
    if (nz == 1 && n_ > 1) {
      const double mu = sum_[idx] / static_cast<double>(n_);
      const double var = (sq_[idx] / static_cast<double>(n_) - mu * mu) * static_cast<double>(n_) /
                         static_cast<double>(n_ - 1);
      e.tau = var > 0.0 ? static_cast<double>(b_) * var_batch / var : 1.0;
    }
    return e;
  }

 private:
  std::size_t dim_ = 0, b_ = 1, n_ = 0, in_batch_ = 0;
  std::vector<double> cur_, sum_, sq_, batches_;
};

/// |a - b| in units of the combined standard error; infinite if the SE is zero and a ≠ b.
inline double z_score(double a, double b, double se) {
  const double diff = std::abs(a - b);
  if (se > 0.0) return diff / se;
  return diff <= 1e-12 * std::max(1.0, std::abs(b)) ? 0.0 : std::numeric_limits<double>::infinity();
}

inline double normal_cdf(double x, double sigma = 1.0) { return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0))); }

/// Kolmogorov-Smirnov distance between the empirical law of x and a continuous cdf.
inline double ks_distance(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) return 1.0;
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  return d;
}

// ---------------------------------------------------------------------------
// Seeds

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed of chain k for a master seed: the (k+1)-th output of splitmix64 started at master.
inline std::uint64_t chain_seed(std::uint64_t master, std::size_t k) {
  std::uint64_t s = master;
  std::uint64_t out = 0;
  for (std::size_t i = 0; i <= k; ++i) out = splitmix64(s);
  return out;
}

}  // namespace hdual
