#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "effreg/errors.hpp"
#include "effreg/simplex.hpp"
#include "effreg/step_losses.hpp"

namespace effreg {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Combiner internals captured after each observation (NaN / empty when the
/// algorithm has no such quantity).
struct StepDiagnostics {
  double bias = kNaN;             // A_i
  double driver = kNaN;           // B_i
  double bias_increment = kNaN;   // a_i = A_i - A_{i-1}
  double driver_increment = kNaN; // B_i - B_{i-1}
  double step_size = kNaN;        // alpha_i used to form x_{i+1}
  std::vector<double> rewards;    // u_i fed to a multiplicative update
};

struct RegretSnapshot {
  double R = 0.0;                 // combined regret R_n
  std::vector<double> expert;     // R_{k,n}
  double Rtilde = 0.0;            // regret to the best fixed meta-action
  std::size_t best = 0;           // k*, lowest index on ties (0-based)

  double best_expert_regret() const { return expert.at(best); }

  RegretSnapshot scaled(double factor) const {
    RegretSnapshot s = *this;
    s.R *= factor;
    s.Rtilde *= factor;
    for (double& r : s.expert) r *= factor;
    return s;
  }
};

struct StepRecord {
  std::size_t step = 0;
  StepLosses losses;
  SimplexPoint action;
  double combined_loss = 0.0;
  RegretSnapshot regrets;
  StepDiagnostics diagnostics;
};

/// Running regret accounting for a d-expert combination.
///
/// All sums are kept in the (rescaled) units the combiner sees; loss_scale is
/// the factor that converts back to the scenario's original units.
class RegretLedger {
 public:
  explicit RegretLedger(std::size_t d, double loss_scale = 1.0, bool keep_history = false)
      : expert_cum_(d, 0.0), loss_scale_(loss_scale), keep_history_(keep_history) {
    if (d < 1) throw ConfigError("RegretLedger: dimension must be >= 1");
    if (!(loss_scale > 0.0)) throw ConfigError("RegretLedger: loss scale must be > 0");
  }

  std::size_t dimension() const noexcept { return expert_cum_.size(); }
  std::size_t steps() const noexcept { return n_; }
  double loss_scale() const noexcept { return loss_scale_; }
  bool keeps_history() const noexcept { return keep_history_; }

  std::span<const double> expert_cumulative_loss() const noexcept { return expert_cum_; }
  double combined_cumulative_loss() const noexcept { return combined_cum_; }
  double comparator_cumulative_loss() const noexcept { return comparator_cum_; }
  const std::vector<StepRecord>& history() const noexcept { return history_; }

  /// Advance all sums by one round in which `action` was played.
  void record(const StepLosses& losses, const SimplexPoint& action, StepDiagnostics diagnostics = {}) {
    if (losses.dimension() != dimension() || action.dimension() != dimension()) {
      throw ConfigError("RegretLedger::record: dimension mismatch");
    }
    losses.validate();
    const double combined = action.dot(losses.expert_losses);
    const auto [lo, hi] = std::minmax_element(losses.expert_losses.begin(), losses.expert_losses.end());
    const double slack = 1e-12 * std::max(1.0, std::max(std::abs(*lo), std::abs(*hi)));
    if (combined < *lo - slack || combined > *hi + slack) {
      throw InvariantViolation(n_ + 1, "combined loss outside the convex hull of expert losses");
    }

    for (std::size_t k = 0; k < expert_cum_.size(); ++k) expert_cum_[k] += losses.expert_losses[k];
    combined_cum_ += combined;
    comparator_cum_ += losses.comparator_loss;
    ++n_;

    if (keep_history_) {
      history_.push_back(StepRecord{n_, losses, action, combined, regrets(), std::move(diagnostics)});
    }
  }

  /// R_n, R_{k,n}, R-tilde_n and k* in ledger units.
  RegretSnapshot regrets() const {
    if (n_ == 0) throw ConfigError("RegretLedger::regrets: empty ledger");
    RegretSnapshot s;
    s.R = combined_cum_ - comparator_cum_;
    s.expert.resize(expert_cum_.size());
    for (std::size_t k = 0; k < expert_cum_.size(); ++k) s.expert[k] = expert_cum_[k] - comparator_cum_;
    s.best = static_cast<std::size_t>(std::min_element(s.expert.begin(), s.expert.end()) - s.expert.begin());
    // Computed from the losses directly, not as R - min R_k.
    s.Rtilde = combined_cum_ - *std::min_element(expert_cum_.begin(), expert_cum_.end());
    return s;
  }

  RegretSnapshot regrets_original_units() const { return regrets().scaled(loss_scale_); }

  /// |R_n - (min_k R_{k,n} + R-tilde_n)|.
  double decomposition_residual() const {
    const RegretSnapshot s = regrets();
    return std::abs(s.R - (s.best_expert_regret() + s.Rtilde));
  }

 private:
  std::vector<double> expert_cum_;
  double combined_cum_ = 0.0;
  double comparator_cum_ = 0.0;
  std::size_t n_ = 0;
  double loss_scale_ = 1.0;
  bool keep_history_ = false;
  std::vector<StepRecord> history_;
};

inline constexpr std::size_t kMinTailPoints = 100;

/// OLS slope of log(y) against log(x).
inline double power_law_exponent(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw ConfigError("power_law_exponent: need >= 2 paired points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(xs.size());
  std::vector<double> lx(xs.size()), ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw DomainError("power_law_exponent: non-positive value");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw ConfigError("power_law_exponent: degenerate abscissae");
  return sxy / sxx;
}

/// Growth exponent of a series indexed by step 1..n: the log-log OLS slope
/// over the last `tail_fraction` of the steps. ~0.5 means sqrt(n) growth,
/// ~0 means bounded or logarithmic growth.
inline double growth_exponent(std::span<const double> series, double tail_fraction = 0.5) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw ConfigError("growth_exponent: tail fraction must be in (0, 1]");
  const std::size_t n = series.size();
  const auto tail = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n)));
  if (tail < kMinTailPoints) {
    throw ConfigError("growth_exponent: tail has " + std::to_string(tail) + " points, need >= " +
                      std::to_string(kMinTailPoints));
  }
  const std::size_t first = n - tail;
  std::vector<double> steps(tail);
  for (std::size_t i = 0; i < tail; ++i) {
    steps[i] = static_cast<double>(first + i + 1);
    if (!(series[first + i] > 0.0)) {
      throw DomainError("growth_exponent: non-positive value at step " + std::to_string(first + i + 1));
    }
  }
  return power_law_exponent(steps, series.subspan(first));
}

}  // namespace effreg
