#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "effreg/errors.hpp"
#include "effreg/simplex.hpp"
#include "effreg/step_losses.hpp"

namespace effreg {

/// Lazy subgradient (dual averaging on the simplex) with alpha_i = scale/sqrt(i).
///
/// After observing b_1..b_i the next action is
///   x_{i+1} = P_S(-alpha_i * sum_{j<=i} b_j),
/// so a regret gap of at least 1/alpha_i between two experts puts exactly zero
/// weight on the worse one. The first action is uniform.
struct LazyState {
  std::vector<double> cumulative_loss;
  std::size_t step = 0;  // observations absorbed so far
  double step_size_scale = 1.0;

  static LazyState initial(std::size_t d, double scale) {
    if (d < 2) throw ConfigError("LazyState: dimension must be >= 2");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("LazyState: step size scale must be > 0");
    return LazyState{std::vector<double>(d, 0.0), 0, scale};
  }

  std::size_t dimension() const noexcept { return cumulative_loss.size(); }

  double step_size(std::size_t i) const { return step_size_scale / std::sqrt(static_cast<double>(i)); }

  /// Point the state will play next (before any new observation).
  SimplexPoint current_point() const {
    if (step == 0) return SimplexPoint::uniform(dimension());
    return project_simplex(pre_projection());
  }

  std::vector<double> pre_projection() const {
    std::vector<double> w(cumulative_loss.size());
    const double alpha = step_size(step == 0 ? 1 : step);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = -alpha * cumulative_loss[k];
    return w;
  }
};

inline Step<LazyState> lazy_step(const LazyState& state, const StepLosses& losses) {
  losses.validate();
  if (losses.dimension() != state.dimension()) throw ConfigError("lazy_step: dimension mismatch");
  LazyState next = state;
  for (std::size_t k = 0; k < next.cumulative_loss.size(); ++k) {
    next.cumulative_loss[k] += losses.expert_losses[k];
  }
  next.step += 1;
  SimplexPoint x = project_simplex(next.pre_projection());
  return {std::move(x), std::move(next)};
}

/// Greedy (online) projected subgradient: x_{i+1} = P_S(x_i - scale * b_i / sqrt(i)).
/// Used as a reference algorithm only.
struct GreedyState {
  SimplexPoint point;
  std::size_t step = 0;
  double step_size_scale = 1.0;

  static GreedyState initial(std::size_t d, double scale) {
    if (d < 2) throw ConfigError("GreedyState: dimension must be >= 2");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("GreedyState: step size scale must be > 0");
    return GreedyState{SimplexPoint::uniform(d), 0, scale};
  }
};

inline Step<GreedyState> greedy_step(const GreedyState& state, const StepLosses& losses) {
  losses.validate();
  if (losses.dimension() != state.point.dimension()) throw ConfigError("greedy_step: dimension mismatch");
  GreedyState next = state;
  next.step += 1;
  const double alpha = state.step_size_scale / std::sqrt(static_cast<double>(next.step));
  std::vector<double> w(losses.dimension());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = state.point[k] - alpha * losses.expert_losses[k];
  next.point = project_simplex(w);
  SimplexPoint x = next.point;
  return {std::move(x), std::move(next)};
}

}  // namespace effreg
