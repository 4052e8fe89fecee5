#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "effreg/errors.hpp"
#include "effreg/simplex.hpp"
#include "effreg/step_losses.hpp"

namespace effreg {

enum class MultiplicativeVariant { Hedge, SecondOrderHedge, Prod };

/// Exponent magnitude above which the two-expert Hedge update saturates to a vertex.
inline constexpr double kHedgeSaturation = 700.0;

struct MultiplicativeState {
  std::vector<double> weights;
  double eta = 1.0;
  MultiplicativeVariant variant = MultiplicativeVariant::Hedge;
  double cum_loss_diff = 0.0;  // R_{2,i} - R_{1,i}, Hedge only
  std::size_t step = 0;

  /// Two-expert Hedge with alpha_i = eta / sqrt(i); starts at (1/2, 1/2).
  static MultiplicativeState hedge(double eta) {
    check_eta(eta);
    return {{0.5, 0.5}, eta, MultiplicativeVariant::Hedge, 0.0, 0};
  }

  static MultiplicativeState prod(std::vector<double> initial_weights, double eta) {
    return weighted(std::move(initial_weights), eta, MultiplicativeVariant::Prod);
  }

  static MultiplicativeState second_order_hedge(std::vector<double> initial_weights, double eta) {
    return weighted(std::move(initial_weights), eta, MultiplicativeVariant::SecondOrderHedge);
  }

  std::size_t dimension() const noexcept { return weights.size(); }

  SimplexPoint current_point() const {
    if (variant == MultiplicativeVariant::Hedge) return SimplexPoint(weights);
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<double> x(weights.size());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = weights[k] / total;
    return SimplexPoint(std::move(x));
  }

 private:
  static void check_eta(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("multiplicative update: eta must be > 0");
  }

  static MultiplicativeState weighted(std::vector<double> w, double eta, MultiplicativeVariant v) {
    check_eta(eta);
    if (w.size() < 2) throw ConfigError("multiplicative update: dimension must be >= 2");
    for (double x : w) {
      if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("multiplicative update: initial weights must be > 0");
    }
    return {std::move(w), eta, v, 0.0, 0};
  }
};

/// Logistic weight on expert 1 given alpha and R_{2,i} - R_{1,i}. Both
/// coordinates are computed directly so neither rounds to an exact 0 until
/// the exponent passes kHedgeSaturation.
inline std::array<double, 2> hedge_probabilities(double alpha, double diff) {
  const double t = alpha * diff;
  if (t > kHedgeSaturation) return {1.0, 0.0};
  if (t < -kHedgeSaturation) return {0.0, 1.0};
  return {1.0 / (1.0 + std::exp(-t)), 1.0 / (1.0 + std::exp(t))};
}

inline Step<MultiplicativeState> hedge_step(const MultiplicativeState& state, const StepLosses& losses) {
  if (state.variant != MultiplicativeVariant::Hedge) throw ConfigError("hedge_step: state is not a Hedge state");
  if (losses.dimension() != 2) throw ConfigError("hedge_step: needs exactly 2 experts");
  losses.validate();
  MultiplicativeState next = state;
  next.step += 1;
  next.cum_loss_diff += losses.difference();
  const double alpha = next.eta / std::sqrt(static_cast<double>(next.step));
  const auto p = hedge_probabilities(alpha, next.cum_loss_diff);
  next.weights = {p[0], p[1]};
  SimplexPoint x = next.current_point();
  return {std::move(x), std::move(next)};
}

namespace detail {

inline void renormalize_extremes(std::vector<double>& w) {
  double top = 0.0;
  for (double v : w) top = std::max(top, v);
  if (top > 1e200 || top < 1e-200) {
    for (double& v : w) v /= top;
  }
}

inline void check_rewards(const MultiplicativeState& state, std::span<const double> rewards, const char* who) {
  if (rewards.size() != state.dimension()) throw ConfigError(std::string(who) + ": reward dimension mismatch");
  require_finite(rewards, who);
}

}  // namespace detail

/// Prod: w_k <- w_k (1 + eta u_k), x = w / sum(w).
inline Step<MultiplicativeState> prod_step(const MultiplicativeState& state, std::span<const double> rewards) {
  if (state.variant != MultiplicativeVariant::Prod) throw ConfigError("prod_step: state is not a Prod state");
  detail::check_rewards(state, rewards, "prod_step");
  MultiplicativeState next = state;
  for (std::size_t k = 0; k < rewards.size(); ++k) {
    const double factor = 1.0 + state.eta * rewards[k];
    if (!(factor > 0.0)) {
      throw ConfigError("prod_step: update factor " + std::to_string(factor) +
                        " <= 0 (step size too large for reward range)");
    }
    next.weights[k] *= factor;
  }
  detail::renormalize_extremes(next.weights);
  next.step += 1;
  SimplexPoint x = next.current_point();
  return {std::move(x), std::move(next)};
}

/// Second-Order Hedge: w_k <- w_k exp(eta u_k - eta^2 u_k^2).
inline Step<MultiplicativeState> second_order_hedge_step(const MultiplicativeState& state,
                                                          std::span<const double> rewards) {
  if (state.variant != MultiplicativeVariant::SecondOrderHedge) {
    throw ConfigError("second_order_hedge_step: state is not a Second-Order Hedge state");
  }
  detail::check_rewards(state, rewards, "second_order_hedge_step");
  MultiplicativeState next = state;
  const double eta = state.eta;
  for (std::size_t k = 0; k < rewards.size(); ++k) {
    next.weights[k] *= std::exp(eta * rewards[k] - eta * eta * rewards[k] * rewards[k]);
  }
  detail::renormalize_extremes(next.weights);
  for (double w : next.weights) {
    if (!(w > 0.0)) throw DomainError("second_order_hedge_step: weight underflow");
  }
  next.step += 1;
  SimplexPoint x = next.current_point();
  return {std::move(x), std::move(next)};
}

inline Step<MultiplicativeState> prod_step(const MultiplicativeState& state, std::initializer_list<double> u) {
  return prod_step(state, std::span<const double>(u.begin(), u.size()));
}
inline Step<MultiplicativeState> second_order_hedge_step(const MultiplicativeState& state,
                                                          std::initializer_list<double> u) {
  return second_order_hedge_step(state, std::span<const double>(u.begin(), u.size()));
}

/// (A,B)-Prod configuration for a known bound C on sum_i (l_i . (z_2 - z_1))^2.
struct ABProdConfig {
  double C = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
  double w11 = 0.0;

  std::vector<double> initial_weights() const { return {w11, 1.0 - w11}; }
};

inline constexpr double kABProdMaxEta = 0.499;

inline ABProdConfig ab_prod_config(double C) {
  if (!std::isfinite(C) || !(C > 1.0)) throw ConfigError("ab_prod_config: C must be > 1");
  ABProdConfig cfg;
  cfg.C = C;
  cfg.gamma = std::sqrt(std::log(C)) / 2.0;
  cfg.eta = std::min(cfg.gamma / std::sqrt(C), kABProdMaxEta);
  cfg.w11 = cfg.eta;
  return cfg;
}

/// (A,B)-Prod rewards: expert 1 earns l_i . (z_2 - z_1), expert 2 (the safe one) earns 0.
inline std::array<double, 2> ab_prod_rewards(const StepLosses& losses) {
  return {losses.difference(), 0.0};
}

}  // namespace effreg
