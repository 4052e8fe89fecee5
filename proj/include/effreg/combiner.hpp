#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "effreg/biased.hpp"
#include "effreg/cascade.hpp"
#include "effreg/lazy.hpp"
#include "effreg/ledger.hpp"
#include "effreg/multiplicative.hpp"

namespace effreg {

enum class Algorithm { Lazy, BiasedT1, BiasedT2, Cascade, Hedge, SecondOrderHedge, Prod, ABProd, GreedyReference };

struct AlgorithmName {
  Algorithm algorithm;
  std::string_view name;
};

inline constexpr AlgorithmName kAlgorithmNames[] = {
    {Algorithm::Lazy, "lazy"},
    {Algorithm::BiasedT1, "biased_t1"},
    {Algorithm::BiasedT2, "biased_t2"},
    {Algorithm::Cascade, "cascade"},
    {Algorithm::Hedge, "hedge"},
    {Algorithm::SecondOrderHedge, "second_order_hedge"},
    {Algorithm::Prod, "prod"},
    {Algorithm::ABProd, "ab_prod"},
    {Algorithm::GreedyReference, "greedy_reference"},
};

inline std::string_view to_string(Algorithm a) {
  for (const auto& e : kAlgorithmNames) {
    if (e.algorithm == a) return e.name;
  }
  return "unknown";
}

inline Algorithm parse_algorithm(std::string_view name) {
  for (const auto& e : kAlgorithmNames) {
    if (e.name == name) return e.algorithm;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

/// Common driving interface: play current(), then observe() the round.
class Combiner {
 public:
  virtual ~Combiner() = default;
  virtual SimplexPoint current() const = 0;
  virtual void observe(const StepLosses& losses) = 0;
  /// Internals after the latest observe().
  virtual StepDiagnostics diagnostics() const = 0;
  virtual std::size_t dimension() const = 0;
};

struct CombinerParams {
  double beta = 1.0;
  std::optional<double> eta;         // step-size scale (lazy, greedy, hedge) or Prod eta
  std::optional<double> bias_sqrt;   // sqrt coefficient of the bias schedule
  std::optional<double> lambda;      // loss-difference premise constant, diagnostics only
  std::optional<double> w11;         // initial weight of expert 1 (multiplicative)
  std::optional<double> C;           // (A,B)-Prod variance bound
};

inline constexpr double kDefaultProdEta = 0.1;

namespace detail {

class LazyCombiner final : public Combiner {
 public:
  LazyCombiner(std::size_t d, double scale) : state_(LazyState::initial(d, scale)) {}
  SimplexPoint current() const override { return state_.current_point(); }
  void observe(const StepLosses& losses) override { state_ = lazy_step(state_, losses).state; }
  StepDiagnostics diagnostics() const override {
    StepDiagnostics dg;
    dg.step_size = state_.step_size(state_.step);
    return dg;
  }
  std::size_t dimension() const override { return state_.dimension(); }

 private:
  LazyState state_;
};

class GreedyCombiner final : public Combiner {
 public:
  GreedyCombiner(std::size_t d, double scale) : state_(GreedyState::initial(d, scale)) {}
  SimplexPoint current() const override { return state_.point; }
  void observe(const StepLosses& losses) override { state_ = greedy_step(state_, losses).state; }
  StepDiagnostics diagnostics() const override {
    StepDiagnostics dg;
    dg.step_size = state_.step_size_scale / std::sqrt(static_cast<double>(state_.step));
    return dg;
  }
  std::size_t dimension() const override { return state_.point.dimension(); }

 private:
  GreedyState state_;
};

inline StepDiagnostics biased_diagnostics(const BiasedState& s) {
  StepDiagnostics dg;
  dg.bias = s.A;
  dg.driver = s.B;
  dg.bias_increment = s.bias_increment();
  dg.driver_increment = s.driver_increment();
  dg.step_size = 1.0 / std::sqrt(static_cast<double>(s.step));
  return dg;
}

class BiasedCombiner final : public Combiner {
 public:
  BiasedCombiner(BiasSchedule schedule, std::optional<double> lambda)
      : state_(BiasedState::initial(schedule, lambda)) {}
  SimplexPoint current() const override { return state_.current_point(); }
  void observe(const StepLosses& losses) override { state_ = biased_step(state_, losses).state; }
  StepDiagnostics diagnostics() const override { return biased_diagnostics(state_); }
  std::size_t dimension() const override { return 2; }
  const BiasedState& state() const { return state_; }

 private:
  BiasedState state_;
};

class CascadeCombiner final : public Combiner {
 public:
  CascadeCombiner(std::size_t d, BiasSchedule schedule) : state_(CascadeState::initial(d, schedule)) {}
  SimplexPoint current() const override { return state_.current_point(); }
  void observe(const StepLosses& losses) override { state_ = cascade_step(state_, losses).state; }
  /// Stage-1 internals.
  StepDiagnostics diagnostics() const override { return biased_diagnostics(state_.stages.front()); }
  std::size_t dimension() const override { return state_.dimension(); }

 private:
  CascadeState state_;
};

class HedgeCombiner final : public Combiner {
 public:
  explicit HedgeCombiner(double eta) : state_(MultiplicativeState::hedge(eta)) {}
  SimplexPoint current() const override { return state_.current_point(); }
  void observe(const StepLosses& losses) override { state_ = hedge_step(state_, losses).state; }
  StepDiagnostics diagnostics() const override {
    StepDiagnostics dg;
    dg.driver = state_.cum_loss_diff;
    dg.step_size = state_.eta / std::sqrt(static_cast<double>(state_.step));
    return dg;
  }
  std::size_t dimension() const override { return 2; }

 private:
  MultiplicativeState state_;
};

/// Prod / Second-Order Hedge driven either by negated losses (u_k = -b_k) or
/// by (A,B)-Prod rewards (u_1 = b_2 - b_1, u_2 = 0).
class RewardCombiner final : public Combiner {
 public:
  RewardCombiner(MultiplicativeState state, bool ab_rewards) : state_(std::move(state)), ab_(ab_rewards) {}
  SimplexPoint current() const override { return state_.current_point(); }
  void observe(const StepLosses& losses) override {
    losses.validate();
    if (losses.dimension() != state_.dimension()) throw ConfigError("reward combiner: dimension mismatch");
    if (ab_) {
      const auto u = ab_prod_rewards(losses);
      rewards_.assign(u.begin(), u.end());
    } else {
      rewards_.resize(losses.dimension());
      for (std::size_t k = 0; k < rewards_.size(); ++k) rewards_[k] = -losses.expert_losses[k];
    }
    state_ = state_.variant == MultiplicativeVariant::Prod ? prod_step(state_, rewards_).state
                                                           : second_order_hedge_step(state_, rewards_).state;
  }
  StepDiagnostics diagnostics() const override {
    StepDiagnostics dg;
    dg.rewards = rewards_;
    dg.step_size = state_.eta;
    return dg;
  }
  std::size_t dimension() const override { return state_.dimension(); }

 private:
  MultiplicativeState state_;
  bool ab_ = false;
  std::vector<double> rewards_;
};

/// Presents experts to an inner combiner with `favoured` moved to the front.
class ReorderedCombiner final : public Combiner {
 public:
  ReorderedCombiner(std::unique_ptr<Combiner> inner, std::size_t favoured) : inner_(std::move(inner)) {
    const std::size_t d = inner_->dimension();
    order_.push_back(favoured);
    for (std::size_t k = 0; k < d; ++k) {
      if (k != favoured) order_.push_back(k);
    }
  }
  SimplexPoint current() const override {
    const SimplexPoint inner = inner_->current();
    std::vector<double> x(order_.size());
    for (std::size_t j = 0; j < order_.size(); ++j) x[order_[j]] = inner[j];
    return SimplexPoint(std::move(x));
  }
  void observe(const StepLosses& losses) override {
    StepLosses permuted{std::vector<double>(order_.size()), losses.comparator_loss};
    for (std::size_t j = 0; j < order_.size(); ++j) permuted.expert_losses[j] = losses.expert_losses.at(order_[j]);
    inner_->observe(permuted);
  }
  StepDiagnostics diagnostics() const override { return inner_->diagnostics(); }
  std::size_t dimension() const override { return inner_->dimension(); }

 private:
  std::unique_ptr<Combiner> inner_;
  std::vector<std::size_t> order_;
};

}  // namespace detail

/// Initial weights the multiplicative combiners start from.
inline std::vector<double> initial_weights_for(Algorithm a, const CombinerParams& p, std::size_t d) {
  if (a == Algorithm::ABProd) {
    if (!p.C) throw ConfigError("ab_prod: C is required");
    const double w11 = p.w11.value_or(ab_prod_config(*p.C).w11);
    return {w11, 1.0 - w11};
  }
  if (p.w11) {
    if (d != 2) throw ConfigError("w11 applies to two-expert runs only");
    return {*p.w11, 1.0 - *p.w11};
  }
  return std::vector<double>(d, 1.0 / static_cast<double>(d));
}

inline double multiplicative_eta_for(Algorithm a, const CombinerParams& p) {
  if (a == Algorithm::ABProd) {
    if (!p.C) throw ConfigError("ab_prod: C is required");
    return ab_prod_config(*p.C).eta;
  }
  return p.eta.value_or(kDefaultProdEta);
}

/// Build a combiner for d experts; `favoured` (0-based) is presented as expert 1.
inline std::unique_ptr<Combiner> make_combiner(Algorithm a, std::size_t d, const CombinerParams& p,
                                               std::size_t favoured = 0) {
  if (favoured >= d) throw ConfigError("favoured expert index out of range");
  auto need_two = [&] {
    if (d != 2) {
      throw ConfigError(std::string(to_string(a)) + " combines exactly 2 experts, got " + std::to_string(d));
    }
  };
  std::unique_ptr<Combiner> c;
  switch (a) {
    case Algorithm::Lazy:
      c = std::make_unique<detail::LazyCombiner>(d, p.eta.value_or(1.0));
      break;
    case Algorithm::GreedyReference:
      c = std::make_unique<detail::GreedyCombiner>(d, p.eta.value_or(1.0));
      break;
    case Algorithm::BiasedT1:
      need_two();
      c = std::make_unique<detail::BiasedCombiner>(BiasSchedule::theorem1(p.beta, p.bias_sqrt.value_or(0.5)),
                                                   p.lambda);
      break;
    case Algorithm::BiasedT2:
      need_two();
      c = std::make_unique<detail::BiasedCombiner>(BiasSchedule::theorem2(p.beta, p.bias_sqrt.value_or(1.0)),
                                                   p.lambda);
      break;
    case Algorithm::Cascade:
      c = std::make_unique<detail::CascadeCombiner>(d, BiasSchedule::theorem1(p.beta, p.bias_sqrt.value_or(0.5)));
      break;
    case Algorithm::Hedge:
      need_two();
      c = std::make_unique<detail::HedgeCombiner>(p.eta.value_or(1.0));
      break;
    case Algorithm::Prod:
      c = std::make_unique<detail::RewardCombiner>(
          MultiplicativeState::prod(initial_weights_for(a, p, d), multiplicative_eta_for(a, p)), false);
      break;
    case Algorithm::SecondOrderHedge:
      c = std::make_unique<detail::RewardCombiner>(
          MultiplicativeState::second_order_hedge(initial_weights_for(a, p, d), multiplicative_eta_for(a, p)),
          false);
      break;
    case Algorithm::ABProd:
      need_two();
      c = std::make_unique<detail::RewardCombiner>(
          MultiplicativeState::prod(initial_weights_for(a, p, d), multiplicative_eta_for(a, p)), true);
      break;
  }
  if (favoured != 0) c = std::make_unique<detail::ReorderedCombiner>(std::move(c), favoured);
  return c;
}

}  // namespace effreg
