#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "effreg/errors.hpp"

namespace effreg {

inline constexpr double kSimplexSumTolerance = 1e-9;

inline void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite entry");
  }
}

/// A probability vector on the d-simplex: the meta-action played each round.
///
/// Construction clamps negative entries to zero and rejects vectors whose sum
/// is not 1 within kSimplexSumTolerance, so every live SimplexPoint satisfies
/// the simplex invariants exactly as checked by is_valid().
class SimplexPoint {
 public:
  SimplexPoint() = default;

  explicit SimplexPoint(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.size() < 1) throw ConfigError("SimplexPoint: empty weight vector");
    require_finite(weights_, "SimplexPoint");
    for (double& w : weights_) w = std::max(w, 0.0);
    const double sum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (std::abs(sum - 1.0) > kSimplexSumTolerance) {
      throw DomainError("SimplexPoint: weights sum to " + std::to_string(sum));
    }
  }

  static SimplexPoint uniform(std::size_t d) {
    return SimplexPoint(std::vector<double>(d, 1.0 / static_cast<double>(d)));
  }

  static SimplexPoint vertex(std::size_t d, std::size_t k) {
    std::vector<double> w(d, 0.0);
    w.at(k) = 1.0;
    return SimplexPoint(std::move(w));
  }

  std::size_t dimension() const noexcept { return weights_.size(); }
  double operator[](std::size_t k) const { return weights_[k]; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// True when some coordinate carries all the mass and every other is exactly 0.
  bool is_vertex() const noexcept {
    std::size_t zeros = 0;
    for (double w : weights_) zeros += (w == 0.0);
    return zeros + 1 == weights_.size();
  }

  bool is_vertex(std::size_t k) const noexcept {
    for (std::size_t j = 0; j < weights_.size(); ++j) {
      if (j != k && weights_[j] != 0.0) return false;
    }
    return k < weights_.size();
  }

  bool is_valid() const noexcept {
    if (weights_.empty()) return false;
    double sum = 0.0;
    for (double w : weights_) {
      if (!std::isfinite(w) || w < 0.0) return false;
      sum += w;
    }
    return std::abs(sum - 1.0) <= kSimplexSumTolerance;
  }

  double dot(std::span<const double> v) const {
    if (v.size() != weights_.size()) throw ConfigError("SimplexPoint::dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) s += weights_[k] * v[k];
    return s;
  }

  friend bool operator==(const SimplexPoint&, const SimplexPoint&) = default;

 private:
  std::vector<double> weights_;
};

/// Indices l (0-based) for which some k has w_k - w_l >= 1. Any such
/// coordinate is exactly zero after Euclidean projection onto the simplex.
inline std::vector<std::size_t> gap_zero_coordinates(std::span<const double> w) {
  require_finite(w, "gap_zero_coordinates");
  std::vector<std::size_t> out;
  if (w.empty()) return out;
  const double top = *std::max_element(w.begin(), w.end());
  for (std::size_t l = 0; l < w.size(); ++l) {
    if (top - w[l] >= 1.0) out.push_back(l);
  }
  return out;
}

/// Euclidean projection onto the probability simplex (sort-then-threshold).
inline SimplexPoint project_simplex(std::span<const double> w) {
  const std::size_t d = w.size();
  if (d < 2) throw ConfigError("project_simplex: dimension must be >= 2");
  require_finite(w, "project_simplex");

  // Points already on the simplex (up to rounding) are their own projection.
  {
    bool nonneg = true;
    double sum = 0.0;
    for (double v : w) {
      nonneg = nonneg && v >= 0.0;
      sum += v;
    }
    if (nonneg && std::abs(sum - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon() * d) {
      return SimplexPoint(std::vector<double>(w.begin(), w.end()));
    }
  }

  std::vector<double> sorted(w.begin(), w.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    prefix += sorted[j];
    const double candidate = (prefix - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }

  std::vector<double> x(d);
  for (std::size_t k = 0; k < d; ++k) x[k] = std::max(w[k] - theta, 0.0);
  for (std::size_t l : gap_zero_coordinates(w)) x[l] = 0.0;
  const double sum = std::accumulate(x.begin(), x.end(), 0.0);
  if (sum != 1.0) {
    for (double& v : x) v /= sum;
  }
  return SimplexPoint(std::move(x));
}

inline SimplexPoint project_simplex(std::initializer_list<double> w) {
  return project_simplex(std::span<const double>(w.begin(), w.size()));
}

/// Projection onto [0, 1].
inline double project_interval(double v) {
  if (!std::isfinite(v)) throw DomainError("project_interval: non-finite input");
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace effreg
