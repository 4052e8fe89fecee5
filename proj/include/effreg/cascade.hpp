#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "effreg/biased.hpp"
#include "effreg/errors.hpp"
#include "effreg/simplex.hpp"
#include "effreg/step_losses.hpp"

namespace effreg {

/// d experts combined by chaining d - 1 biased two-expert stages. Stage 1
/// mixes experts 1 and 2 into a virtual expert; stage j mixes the virtual
/// expert of stage j - 1 (favoured side) with expert j + 1.
struct CascadeState {
  std::vector<BiasedState> stages;

  static CascadeState initial(std::size_t d, BiasSchedule schedule) {
    if (d < 2) throw ConfigError("CascadeState: dimension must be >= 2");
    return CascadeState{std::vector<BiasedState>(d - 1, BiasedState::initial(schedule))};
  }

  std::size_t dimension() const noexcept { return stages.size() + 1; }

  std::vector<double> stage_weights() const {
    std::vector<double> w(stages.size());
    for (std::size_t j = 0; j < stages.size(); ++j) w[j] = stages[j].favoured_weight();
    return w;
  }

  /// Weights over the original experts induced by the stage weights.
  SimplexPoint current_point() const { return induced_point(stage_weights()); }

  static SimplexPoint induced_point(const std::vector<double>& stage_w) {
    const std::size_t d = stage_w.size() + 1;
    std::vector<double> x(d, 0.0);
    // tail[j] = product of stage weights j..end
    std::vector<double> tail(stage_w.size() + 1, 1.0);
    for (std::size_t j = stage_w.size(); j-- > 0;) tail[j] = tail[j + 1] * stage_w[j];
    x[0] = tail[0];
    for (std::size_t k = 1; k < d; ++k) x[k] = (1.0 - stage_w[k - 1]) * tail[k];
    return SimplexPoint(std::move(x));
  }
};

inline Step<CascadeState> cascade_step(const CascadeState& state, const StepLosses& losses) {
  losses.validate();
  if (state.stages.size() + 1 != losses.dimension()) {
    throw ConfigError("cascade_step: " + std::to_string(state.stages.size()) + " stages for " +
                      std::to_string(losses.dimension()) + " experts");
  }
  const std::vector<double> played = state.stage_weights();
  const auto& b = losses.expert_losses;

  CascadeState next = state;
  double virtual_loss = b[0];
  for (std::size_t j = 0; j < next.stages.size(); ++j) {
    const double challenger = b[j + 1];
    next.stages[j] = advance_biased(state.stages[j], challenger - virtual_loss);
    virtual_loss = virtual_loss * played[j] + challenger * (1.0 - played[j]);
  }
  SimplexPoint x = next.current_point();
  return {std::move(x), std::move(next)};
}

}  // namespace effreg
