#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "effreg/errors.hpp"
#include "effreg/simplex.hpp"

namespace effreg {

/// One round of feedback as seen by a combiner: b_{k,i} = l_i . z_{k,i} for
/// every expert, plus the comparator's loss l_i . y*.
struct StepLosses {
  std::vector<double> expert_losses;
  double comparator_loss = 0.0;

  std::size_t dimension() const noexcept { return expert_losses.size(); }

  void validate() const {
    require_finite(expert_losses, "StepLosses");
    if (!std::isfinite(comparator_loss)) throw DomainError("StepLosses: non-finite comparator loss");
  }

  /// Loss difference b_{2,i} - b_{1,i} for a two-expert round.
  double difference() const {
    if (expert_losses.size() != 2) throw ConfigError("StepLosses::difference: needs d = 2");
    return expert_losses[1] - expert_losses[0];
  }

  double sup_norm() const noexcept {
    double m = 0.0;
    for (double b : expert_losses) m = std::max(m, std::abs(b));
    return m;
  }
};

/// A combiner's output for one observation: the point for the next round and
/// the advanced state.
template <class State>
struct Step {
  SimplexPoint point;
  State state;
};

}  // namespace effreg
