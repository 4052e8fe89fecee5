#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "effreg/errors.hpp"
#include "effreg/step_losses.hpp"

namespace effreg {

/// A deterministic loss stream. `generator` returns losses in the scenario's
/// original units; combiners consume `normalized(step)` (divided by loss_bound).
struct Scenario {
  std::string name;
  std::size_t dimension = 2;
  std::size_t horizon = 0;
  double loss_bound = 1.0;
  std::optional<double> lambda;  // |b_2 - b_1| <= lambda / (2 sqrt(i)) on normalized losses
  std::optional<std::uint64_t> seed;
  std::function<StepLosses(std::size_t)> generator;

  StepLosses at(std::size_t step) const {
    if (step < 1) throw ConfigError("Scenario " + name + ": steps start at 1");
    return generator(step);
  }

  StepLosses normalized(std::size_t step) const {
    StepLosses s = at(step);
    if (loss_bound != 1.0) {
      for (double& b : s.expert_losses) b /= loss_bound;
      s.comparator_loss /= loss_bound;
    }
    return s;
  }
};

inline double alternating(std::size_t step) { return step % 2 == 0 ? 1.0 : -1.0; }  // (-1)^i

/// l_1 = (-1)^i, l_2 = 1/(2 sqrt(i)); y* = e_1.
inline StepLosses example1(std::size_t step) {
  const double l1 = alternating(step);
  return {{l1, 1.0 / (2.0 * std::sqrt(static_cast<double>(step)))}, l1};
}

/// l_1 = (-1)^{i+1}, l_2 = (-1)^i; y* = e_2.
inline StepLosses example2(std::size_t step) {
  const double l2 = alternating(step);
  return {{-l2, l2}, l2};
}

/// l_1 = 1/i, l_2 = (-1)^i; y* = e_2.
inline StepLosses example4(std::size_t step) {
  const double l2 = alternating(step);
  return {{1.0 / static_cast<double>(step), l2}, l2};
}

/// Unflipped: l_1 = 1/sqrt(i), l_2 = (-1)^{i+1}, y* = e_2.
/// Flipped: the two streams exchanged, y* = e_1.
inline StepLosses prod_example(std::size_t step, bool flipped) {
  const double decaying = 1.0 / std::sqrt(static_cast<double>(step));
  const double alt = -alternating(step);
  if (flipped) return {{alt, decaying}, alt};
  return {{decaying, alt}, alt};
}

/// Projected subgradient learner on a closed interval, used as an expert.
struct LearnerExpert {
  enum class Rule { InverseSqrt, Inverse };

  double position = 1.0;
  Rule rule = Rule::InverseSqrt;
  double rate = 0.1;
  double lower = -1.0;
  double upper = 1.0;

  static LearnerExpert inverse_sqrt(double rate, double start = 1.0) {
    return LearnerExpert{start, Rule::InverseSqrt, rate, -1.0, 1.0};
  }
  static LearnerExpert inverse(double rate, double start = 1.0) {
    return LearnerExpert{start, Rule::Inverse, rate, -1.0, 1.0};
  }

  double step_size(std::size_t step) const {
    const double i = static_cast<double>(step);
    return rule == Rule::InverseSqrt ? rate / std::sqrt(i) : rate / i;
  }

  void update(std::size_t step, double gradient) {
    position = std::clamp(position - step_size(step) * gradient, lower, upper);
  }
};

/// One round of the quadratic-cost example: each learner proposes z_k, the
/// linearized loss l = f'(z) = 2z is applied to its own proposal (b_k = 2 z_k^2,
/// the subgradient bound on f(z_k) - f(0)), then each learner takes a gradient
/// step. The comparator z* = 0 has zero loss.
inline StepLosses example5(std::size_t step, std::vector<LearnerExpert>& learners) {
  StepLosses out;
  out.comparator_loss = 0.0;
  for (auto& learner : learners) {
    const double z = learner.position;
    const double gradient = 2.0 * z;
    out.expert_losses.push_back(gradient * z);
    learner.update(step, gradient);
  }
  return out;
}

namespace detail {

/// Deterministic uniform draw in [-1, 1) from the top 53 bits of mt19937_64.
inline double symmetric_unit(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

inline Scenario from_table(std::string name, std::vector<StepLosses> rows, double loss_bound) {
  Scenario s;
  s.name = std::move(name);
  s.dimension = rows.empty() ? 0 : rows.front().dimension();
  s.horizon = rows.size();
  s.loss_bound = loss_bound;
  auto table = std::make_shared<const std::vector<StepLosses>>(std::move(rows));
  const std::string label = s.name;
  s.generator = [table, label](std::size_t step) {
    if (step > table->size()) throw ConfigError("Scenario " + label + ": step beyond horizon");
    return (*table)[step - 1];
  };
  return s;
}

/// Smallest lambda with |b_2 - b_1| <= lambda / (2 sqrt(i)) on normalized losses.
inline double measure_lambda(const Scenario& s) {
  double lambda = 0.0;
  for (std::size_t i = 1; i <= s.horizon; ++i) {
    const StepLosses b = s.normalized(i);
    lambda = std::max(lambda, 2.0 * std::sqrt(static_cast<double>(i)) * std::abs(b.difference()));
  }
  return lambda;
}

}  // namespace detail

inline Scenario analytic_scenario(std::string name, std::size_t horizon, StepLosses (*fn)(std::size_t)) {
  Scenario s;
  s.name = std::move(name);
  s.dimension = 2;
  s.horizon = horizon;
  s.generator = fn;
  return s;
}

inline Scenario make_prod_example(bool flipped, std::size_t horizon) {
  Scenario s;
  s.name = flipped ? "prod_example_flipped" : "prod_example";
  s.horizon = horizon;
  s.generator = [flipped](std::size_t step) { return prod_example(step, flipped); };
  return s;
}

/// Two learner-experts on f(z) = z^2, domain [-1, 1], both starting at z = 1.
/// Losses 2 z^2 are bounded by L = 2; lambda is measured from the stream.
inline Scenario make_example5(LearnerExpert first, LearnerExpert second, std::size_t horizon,
                              std::string name = "example5") {
  std::vector<LearnerExpert> learners{first, second};
  std::vector<StepLosses> rows;
  rows.reserve(horizon);
  for (std::size_t i = 1; i <= horizon; ++i) rows.push_back(example5(i, learners));
  Scenario s = detail::from_table(std::move(name), std::move(rows), 2.0);
  s.lambda = detail::measure_lambda(s);
  return s;
}

struct RandomAdversaryOptions {
  double drift = 0.0;             // added to every expert but the first, then clipped to [-1, 1]
  std::optional<double> lambda;   // shrink losses so that |b_2 - b_1| <= lambda / (2 sqrt(i))
};

/// I.i.d. uniform losses in [-1, 1]; the comparator is the best fixed expert
/// in hindsight, so min_k R_{k,n} = 0 at the horizon.
inline Scenario random_adversary(std::uint64_t seed, std::size_t n, std::size_t d,
                                 RandomAdversaryOptions options = {}) {
  if (d < 2) throw ConfigError("random_adversary: dimension must be >= 2");
  std::mt19937_64 rng(seed);
  std::vector<StepLosses> rows(n);
  std::vector<double> totals(d, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    auto& row = rows[i - 1];
    row.expert_losses.resize(d);
    const double shrink =
        options.lambda ? std::min(1.0, *options.lambda / (4.0 * std::sqrt(static_cast<double>(i)))) : 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      double b = detail::symmetric_unit(rng);
      if (k > 0) b = std::clamp(b + options.drift, -1.0, 1.0);
      row.expert_losses[k] = b * shrink;
      totals[k] += row.expert_losses[k];
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(totals.begin(), totals.end()) - totals.begin());
  for (auto& row : rows) row.comparator_loss = row.expert_losses[best];
  Scenario s = detail::from_table("random", std::move(rows), 1.0);
  s.dimension = d;
  s.seed = seed;
  s.lambda = options.lambda;
  return s;
}

}  // namespace effreg
