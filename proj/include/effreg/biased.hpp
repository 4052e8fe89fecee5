#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "effreg/errors.hpp"
#include "effreg/simplex.hpp"
#include "effreg/step_losses.hpp"

namespace effreg {

enum class BiasVariant {
  Theorem1,  // A_i = -(c sqrt(i) + beta ln i),  B_i = D_i
  Theorem2,  // A_i = -sqrt(i) (c + beta ln i),  B_i = sqrt(i) D_i
};

inline const char* to_string(BiasVariant v) {
  return v == BiasVariant::Theorem1 ? "theorem1" : "theorem2";
}

/// Bias schedule A_i. `sqrt_coeff` is c above: 1/2 for the worst-case
/// guarantee of the first variant, 1 for the second; other values give the
/// alternative schedules used by some scenarios.
struct BiasSchedule {
  BiasVariant variant = BiasVariant::Theorem1;
  double beta = 1.0;
  double sqrt_coeff = 0.5;

  static BiasSchedule theorem1(double beta, double sqrt_coeff = 0.5) {
    return {BiasVariant::Theorem1, beta, sqrt_coeff};
  }
  static BiasSchedule theorem2(double beta, double sqrt_coeff = 1.0) {
    return {BiasVariant::Theorem2, beta, sqrt_coeff};
  }

  double value(std::size_t step) const {
    if (step < 1) throw ConfigError("BiasSchedule: step must be >= 1");
    const double root = std::sqrt(static_cast<double>(step));
    const double log_i = std::log(static_cast<double>(step));
    if (variant == BiasVariant::Theorem1) return -(sqrt_coeff * root + beta * log_i);
    return -root * (sqrt_coeff + beta * log_i);
  }

  /// Driver B_i from the cumulative difference D_i = R_{2,i} - R_{1,i}.
  double driver(std::size_t step, double cum_diff) const {
    if (variant == BiasVariant::Theorem1) return cum_diff;
    return std::sqrt(static_cast<double>(step)) * cum_diff;
  }

  void validate() const {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("BiasSchedule: beta must be >= 0");
    if (!(sqrt_coeff >= 0.0) || !std::isfinite(sqrt_coeff)) throw ConfigError("BiasSchedule: sqrt coefficient must be >= 0");
  }
};

/// A_step for the two default schedules (natural log).
inline double bias_value(std::size_t step, double beta, BiasVariant variant) {
  const BiasSchedule s = variant == BiasVariant::Theorem1 ? BiasSchedule::theorem1(beta)
                                                          : BiasSchedule::theorem2(beta);
  return s.value(step);
}

/// State of the two-expert biased lazy subgradient update
///   x_{1,i+1} = P_[0,1]( 1/2 - A_i/sqrt(i) + B_i/sqrt(i) ),  x_{2,i+1} = 1 - x_{1,i+1}.
/// Expert 1 is the favoured expert; the first action is (1, 0).
struct BiasedState {
  std::size_t step = 0;
  double cum_diff = 0.0;  // D_i = sum_{j<=i} (b_{2,j} - b_{1,j})
  double A = 0.0;         // A_i (A_0 = 0)
  double prev_A = 0.0;    // A_{i-1}
  double B = 0.0;         // B_i (B_0 = 0)
  double prev_B = 0.0;    // B_{i-1}
  BiasSchedule schedule{};
  std::optional<double> lambda;  // loss-difference premise constant, diagnostics only

  static BiasedState initial(BiasSchedule schedule, std::optional<double> lambda = std::nullopt) {
    schedule.validate();
    BiasedState s;
    s.schedule = schedule;
    s.lambda = lambda;
    return s;
  }

  /// a_i = A_i - A_{i-1}: the bias increment consumed by the latest step.
  double bias_increment() const noexcept { return A - prev_A; }
  /// b_i = B_i - B_{i-1}: the driver increment consumed by the latest step.
  double driver_increment() const noexcept { return B - prev_B; }

  /// x_1 the state plays next.
  double favoured_weight() const {
    if (step == 0) return 1.0;
    const double root = std::sqrt(static_cast<double>(step));
    const double shifted_bias = 0.5 - A / root;  // A-tilde_{i+1}
    return project_interval(shifted_bias + B / root);
  }

  SimplexPoint current_point() const {
    const double x1 = favoured_weight();
    return SimplexPoint({x1, 1.0 - x1});
  }

  /// True when the invariant A == schedule(step) holds bitwise.
  bool consistent() const {
    if (step == 0) return A == 0.0 && B == 0.0;
    return A == schedule.value(step) && B == schedule.driver(step, cum_diff) && std::isfinite(cum_diff);
  }
};

/// Advance a biased state by a raw loss difference b_{2,i} - b_{1,i}.
inline BiasedState advance_biased(const BiasedState& state, double loss_difference) {
  if (!std::isfinite(loss_difference)) throw DomainError("biased_step: non-finite loss difference");
  BiasedState next = state;
  next.step += 1;
  next.cum_diff += loss_difference;
  next.prev_A = state.A;
  next.prev_B = state.B;
  next.A = next.schedule.value(next.step);
  next.B = next.schedule.driver(next.step, next.cum_diff);
  return next;
}

inline Step<BiasedState> biased_step(const BiasedState& state, const StepLosses& losses) {
  if (losses.dimension() != 2) {
    throw ConfigError("biased_step: needs exactly 2 experts, got " + std::to_string(losses.dimension()) +
                      " (use cascade_step)");
  }
  losses.validate();
  BiasedState next = advance_biased(state, losses.difference());
  SimplexPoint x = next.current_point();
  return {std::move(x), std::move(next)};
}

}  // namespace effreg
