#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "effreg/errors.hpp"
#include "effreg/ledger.hpp"

namespace effreg {

enum class BoundKind {
  LazyGapSettling,     // lazy update plays e_{k*} once the 1/alpha_n gap holds
  LazyGapRegret,       // R_n <= R_{k*,n} + max{1, n0}
  Equilibrium,         // biased update emits exact vertices in the equilibrium regions
  StrongConvexity,     // per-step movement of the biased update
  Ftl,                 // sum b_i (x_{2,i} - w) <= 3 sqrt(n) + 2 sum |a_i|
  Theorem1WorstCase,   // R_n <= min R_k + 9/2 sqrt(n) + 3 beta ln n
  Theorem2WorstCase,   // R_n <= min R_k + 1 + beta ln n + lambda sqrt(n)
  Theorem1Efficiency,  // distinct / similar experts: R_n <= ... + M(n0)
  Theorem2Efficiency,
  BiasIncrementSum,    // sum |a_i| <= sqrt(n)/2 + beta ln n
  HedgeGap,
  RewardBound,         // Prod / Second-Order Hedge: sum u_i . x_i >= max U_k
  Decomposition,       // R_n = min R_k + R-tilde_n
};

struct BoundKindName {
  BoundKind kind;
  std::string_view name;
};

inline constexpr BoundKindName kBoundNames[] = {
    {BoundKind::LazyGapSettling, "lazy_gap_settling"},
    {BoundKind::LazyGapRegret, "lazy_gap_regret"},
    {BoundKind::Equilibrium, "equilibrium"},
    {BoundKind::StrongConvexity, "strong_convexity"},
    {BoundKind::Ftl, "ftl"},
    {BoundKind::Theorem1WorstCase, "theorem1_worst_case"},
    {BoundKind::Theorem2WorstCase, "theorem2_worst_case"},
    {BoundKind::Theorem1Efficiency, "theorem1_efficiency"},
    {BoundKind::Theorem2Efficiency, "theorem2_efficiency"},
    {BoundKind::BiasIncrementSum, "bias_increment_sum"},
    {BoundKind::HedgeGap, "hedge_gap"},
    {BoundKind::RewardBound, "reward_bound"},
    {BoundKind::Decomposition, "decomposition"},
};

inline std::string_view to_string(BoundKind kind) {
  for (const auto& e : kBoundNames) {
    if (e.kind == kind) return e.name;
  }
  return "unknown";
}

inline BoundKind parse_bound_kind(std::string_view name) {
  for (const auto& e : kBoundNames) {
    if (e.name == name) return e.kind;
  }
  throw ConfigError("unknown bound '" + std::string(name) + "'");
}

/// Constants a bound may need. Unset fields take the documented defaults.
struct BoundConstants {
  double beta = 1.0;
  std::optional<double> lambda;
  std::optional<std::size_t> n0;
  double step_size_scale = 1.0;   // lazy: alpha_n = scale / sqrt(n), when diagnostics lack it
  std::optional<double> L;        // Hedge Gap loss-difference bound
  double gamma_scale = 1.0;       // Hedge Gap: gamma_i = gamma_scale / i^gamma_power
  double gamma_power = 2.0;
  double eta = 0.0;               // reward bound
  std::vector<double> initial_weights;
  std::size_t ftl_grid_points = 11;
  std::optional<double> tolerance;
};

/// Result of evaluating one inequality along a trajectory. Slack is
/// rhs - lhs (>= 0 means the bound holds); predicate checks use +1 / -1.
/// Steps where the premise does not hold have applicable = false and NaN slack.
struct BoundReport {
  std::string bound_name;
  std::vector<double> per_step_slack;
  std::vector<bool> applicability_mask;
  std::optional<std::size_t> violated_at;  // 1-based step
  std::map<std::string, double> constants_used;
  double tolerance = 0.0;

  std::size_t applicable_steps() const {
    return static_cast<std::size_t>(std::count(applicability_mask.begin(), applicability_mask.end(), true));
  }
  bool vacuous() const { return applicable_steps() == 0; }
  bool holds() const { return !violated_at.has_value(); }
  bool passed() const { return holds() && !vacuous(); }

  std::string status() const {
    if (violated_at) return "fail";
    return vacuous() ? "vacuous" : "pass";
  }

  double min_slack() const {
    double m = kNaN;
    for (std::size_t i = 0; i < per_step_slack.size(); ++i) {
      if (applicability_mask[i] && !(per_step_slack[i] >= m)) m = per_step_slack[i];
    }
    return m;
  }
};

namespace detail {

inline BoundReport make_report(BoundKind kind, std::size_t n, double tolerance) {
  BoundReport r;
  r.bound_name = std::string(to_string(kind));
  r.per_step_slack.assign(n, kNaN);
  r.applicability_mask.assign(n, false);
  r.tolerance = tolerance;
  return r;
}

inline void set_slack(BoundReport& r, std::size_t step, double slack) {
  r.applicability_mask[step - 1] = true;
  r.per_step_slack[step - 1] = slack;
  if (!r.violated_at && !(slack >= -r.tolerance)) r.violated_at = step;
}

/// First step n0 from which `premise(n)` holds for every n in [n0, N], or
/// nullopt when it fails at N.
inline std::optional<std::size_t> settle_start(std::size_t N, const std::function<bool(std::size_t)>& premise) {
  std::optional<std::size_t> start;
  for (std::size_t n = N; n >= 1; --n) {
    if (!premise(n)) break;
    start = n;
  }
  return start;
}

inline void require_history(const RegretLedger& ledger, const char* who) {
  if (!ledger.keeps_history()) throw ConfigError(std::string(who) + ": ledger history is required");
  if (ledger.steps() == 0) throw ConfigError(std::string(who) + ": empty ledger");
}

inline void require_two(const RegretLedger& ledger, const char* who) {
  if (ledger.dimension() != 2) throw ConfigError(std::string(who) + ": needs a two-expert trajectory");
}

inline void require_diag(double v, const char* what) {
  if (std::isnan(v)) throw ConfigError(std::string("bound needs combiner diagnostic '") + what + "'");
}

inline double theorem1_M(double n0, double beta) { return 4.5 * std::sqrt(n0) + 3.0 * beta * std::log(n0); }
inline double theorem1_M_as_printed(double n0, double beta) { return 3.0 * std::sqrt(n0) + 3.0 * beta * std::log(n0); }
inline double theorem2_M(double n0, double beta, double lambda) {
  return 1.0 + beta * std::log(n0) + lambda * std::sqrt(n0);
}

}  // namespace detail

/// Hedge gap bound for a recorded two-expert Hedge trajectory. The premise
/// R_{1,i} - R_{2,i} >= log(L/gamma_i - 1) / alpha_i must hold on every round
/// from n0 to the horizon; the mirrored orientation is checked as well.
inline BoundReport hedge_gap_check(const RegretLedger& ledger, double L, const std::function<double(std::size_t)>& gamma,
                                   std::optional<std::size_t> n0 = std::nullopt, double tolerance = 1e-9) {
  detail::require_history(ledger, "hedge_gap_check");
  detail::require_two(ledger, "hedge_gap_check");
  if (!(L > 0.0)) throw ConfigError("hedge_gap_check: L must be > 0");
  const auto& h = ledger.history();
  const std::size_t N = h.size();
  BoundReport report = detail::make_report(BoundKind::HedgeGap, N, tolerance);
  report.constants_used["L"] = L;
  report.constants_used["gamma_1"] = gamma(1);

  std::vector<double> gamma_sum(N + 1, 0.0);  // prefix sums of gamma_i
  for (std::size_t i = 1; i <= N; ++i) gamma_sum[i] = gamma_sum[i - 1] + gamma(i);

  // Slack per orientation; a round is applicable when either orientation's
  // premise chain covers it, and then every applicable orientation must hold.
  std::vector<double> combined(N + 1, kNaN);
  for (int orientation = 0; orientation < 2; ++orientation) {
    const std::size_t good = orientation == 0 ? 1 : 0;  // expert assumed better
    const std::size_t bad = 1 - good;
    auto premise_arg = [&](std::size_t i) { return L / gamma(i) - 1.0; };
    auto premise = [&](std::size_t i) {
      const double arg = premise_arg(i);
      if (!(arg > 0.0)) return true;  // each round's term is already below gamma_i
      const double alpha = h[i - 1].diagnostics.step_size;
      detail::require_diag(alpha, "step_size");
      const auto& r = h[i - 1].regrets.expert;
      return r[bad] - r[good] >= std::log(arg) / alpha;
    };
    std::optional<std::size_t> start = n0;
    if (start) {
      for (std::size_t i = std::max<std::size_t>(1, *start); i <= N && start; ++i) {
        if (!premise(i)) start.reset();
      }
    } else {
      start = detail::settle_start(N, premise);
    }
    if (!start) continue;
    const std::size_t first = std::max<std::size_t>(1, *start);
    report.constants_used[orientation == 0 ? "n0" : "n0_reversed"] = static_cast<double>(first);
    const double head = L * static_cast<double>(first);
    for (std::size_t n = first; n <= N; ++n) {
      if (!(premise_arg(n) > 0.0)) continue;  // gamma_n >= L: round inapplicable
      const auto& s = h[n - 1].regrets;
      const double slack = s.expert[good] + (gamma_sum[n] - gamma_sum[first - 1]) + head - s.R;
      combined[n] = std::isnan(combined[n]) ? slack : std::min(combined[n], slack);
    }
  }
  for (std::size_t n = 1; n <= N; ++n) {
    if (!std::isnan(combined[n])) detail::set_slack(report, n, combined[n]);
  }
  return report;
}

/// Evaluate a named inequality at every step of a recorded trajectory.
/// All quantities are in ledger (rescaled) units.
inline BoundReport check_bound(const RegretLedger& ledger, BoundKind kind, const BoundConstants& c = {}) {
  detail::require_history(ledger, "check_bound");
  const auto& h = ledger.history();
  const std::size_t N = h.size();
  const auto tol = [&](double dflt) { return c.tolerance.value_or(dflt); };
  auto root = [](std::size_t n) { return std::sqrt(static_cast<double>(n)); };
  auto ln = [](std::size_t n) { return std::log(static_cast<double>(n)); };

  switch (kind) {
    case BoundKind::LazyGapSettling:
    case BoundKind::LazyGapRegret: {
      BoundReport r = detail::make_report(kind, N, tol(kind == BoundKind::LazyGapRegret ? 1e-9 : 0.0));
      const std::size_t d = ledger.dimension();
      auto alpha = [&](std::size_t n) {
        const double a = h[n - 1].diagnostics.step_size;
        return std::isnan(a) ? c.step_size_scale / root(n) : a;
      };
      auto gap = [&](std::size_t n) {
        const auto& s = h[n - 1].regrets;
        double g = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < d; ++k) {
          if (k != s.best) g = std::min(g, s.expert[k] - s.expert[s.best]);
        }
        return g;
      };
      auto premise = [&](std::size_t n) { return gap(n) >= 1.0 / alpha(n); };
      auto start = detail::settle_start(N, premise);
      r.constants_used["step_size_scale"] = c.step_size_scale;
      if (!start) return r;
      const std::size_t n0 = *start;
      const std::size_t best = h[N - 1].regrets.best;
      r.constants_used["n0"] = static_cast<double>(n0);
      for (std::size_t n = n0; n <= N; ++n) {
        if (kind == BoundKind::LazyGapSettling) {
          if (n == N) break;  // x_{N+1} is never played
          detail::set_slack(r, n, h[n].action.is_vertex(best) ? 1.0 : -1.0);
        } else {
          const auto& s = h[n - 1].regrets;
          const double head = static_cast<double>(std::max<std::size_t>(1, n0));
          detail::set_slack(r, n, s.expert[best] + head - s.R);
        }
      }
      return r;
    }

    case BoundKind::Equilibrium: {
      detail::require_two(ledger, "equilibrium");
      BoundReport r = detail::make_report(kind, N, 0.0);
      for (std::size_t n = 1; n < N; ++n) {
        const auto& dg = h[n - 1].diagnostics;
        detail::require_diag(dg.bias, "bias");
        detail::require_diag(dg.driver, "driver");
        const double A = dg.bias, B = dg.driver, half = root(n) / 2.0;
        const double margin = 1e-12 * (root(n) + std::abs(A) + std::abs(B));
        const bool favour = B >= A + half + margin || std::abs(B) <= -(A + half) - margin;
        const bool other = B <= A - half - margin;
        if (!favour && !other) continue;
        const bool ok = favour ? h[n].action.is_vertex(0) : h[n].action.is_vertex(1);
        detail::set_slack(r, n, ok ? 1.0 : -1.0);
      }
      return r;
    }

    case BoundKind::StrongConvexity: {
      detail::require_two(ledger, "strong_convexity");
      BoundReport r = detail::make_report(kind, N, tol(1e-9));
      for (std::size_t i = 1; i < N; ++i) {
        const auto& dg = h[i - 1].diagnostics;
        detail::require_diag(dg.bias_increment, "bias_increment");
        detail::require_diag(dg.driver_increment, "driver_increment");
        if (std::abs(dg.driver_increment) > 1.0) continue;  // premise |b_i| <= 1
        const double moved = std::abs(h[i].action[0] - h[i - 1].action[0]);
        const double bound = (1.0 + std::abs(dg.bias_increment)) / root(i) + 1.0 / (4.0 * static_cast<double>(i));
        detail::set_slack(r, i, bound - moved);
      }
      return r;
    }

    case BoundKind::Ftl: {
      detail::require_two(ledger, "ftl");
      BoundReport r = detail::make_report(kind, N, tol(1e-6));
      const std::size_t G = std::max<std::size_t>(2, c.ftl_grid_points);
      std::vector<double> sums(G, 0.0);
      double abs_a = 0.0;
      r.constants_used["grid_points"] = static_cast<double>(G);
      for (std::size_t n = 1; n <= N; ++n) {
        const auto& dg = h[n - 1].diagnostics;
        detail::require_diag(dg.bias_increment, "bias_increment");
        detail::require_diag(dg.driver_increment, "driver_increment");
        abs_a += std::abs(dg.bias_increment);
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < G; ++g) {
          const double w = static_cast<double>(g) / static_cast<double>(G - 1);
          sums[g] += dg.driver_increment * (h[n - 1].action[1] - w);
          worst = std::max(worst, sums[g]);
        }
        detail::set_slack(r, n, 3.0 * root(n) + 2.0 * abs_a - worst);
      }
      return r;
    }

    case BoundKind::Theorem1WorstCase: {
      detail::require_two(ledger, "theorem1_worst_case");
      BoundReport r = detail::make_report(kind, N, tol(1e-9));
      r.constants_used["beta"] = c.beta;
      for (std::size_t n = 1; n <= N; ++n) {
        const auto& s = h[n - 1].regrets;
        detail::set_slack(r, n, s.best_expert_regret() + 4.5 * root(n) + 3.0 * c.beta * ln(n) - s.R);
      }
      return r;
    }

    case BoundKind::Theorem2WorstCase: {
      detail::require_two(ledger, "theorem2_worst_case");
      if (!c.lambda) throw ConfigError("theorem2_worst_case: lambda is required");
      const double lambda = *c.lambda;
      BoundReport r = detail::make_report(kind, N, tol(1e-9));
      r.constants_used["beta"] = c.beta;
      r.constants_used["lambda"] = lambda;
      for (std::size_t n = 1; n <= N; ++n) {
        // Premise |b_{2,i} - b_{1,i}| <= lambda / (2 sqrt(i)) for every i <= n.
        if (std::abs(h[n - 1].losses.difference()) > lambda / (2.0 * root(n)) * (1.0 + 1e-12)) {
          r.constants_used["premise_broken_at"] = static_cast<double>(n);
          break;
        }
        const auto& s = h[n - 1].regrets;
        detail::set_slack(r, n, s.best_expert_regret() + 1.0 + c.beta * ln(n) + lambda * root(n) - s.R);
      }
      return r;
    }

    case BoundKind::Theorem1Efficiency:
    case BoundKind::Theorem2Efficiency: {
      detail::require_two(ledger, "efficiency bound");
      const bool first = kind == BoundKind::Theorem1Efficiency;
      if (!first && !c.lambda) throw ConfigError("theorem2_efficiency: lambda is required");
      BoundReport r = detail::make_report(kind, N, tol(1e-9));
      r.constants_used["beta"] = c.beta;
      auto diff = [&](std::size_t n) {
        const auto& s = h[n - 1].regrets;
        return s.expert[1] - s.expert[0];
      };
      auto distinct = [&](std::size_t n) {
        const double D = diff(n);
        const double far = first ? root(n) + c.beta * ln(n) : 1.0 + c.beta * ln(n);
        return D >= 0.0 || D <= -far;
      };
      auto similar = [&](std::size_t n) { return std::abs(diff(n)) <= c.beta * ln(n); };
      auto premise = [&](std::size_t n) { return distinct(n) || similar(n); };
      std::optional<std::size_t> start = c.n0;
      if (start) {
        for (std::size_t n = std::max<std::size_t>(1, *start); n <= N && start; ++n) {
          if (!premise(n)) start.reset();
        }
      } else {
        start = detail::settle_start(N, premise);
      }
      if (!start) return r;
      const double n0 = static_cast<double>(std::max<std::size_t>(1, *start));
      double M;
      if (first) {
        M = detail::theorem1_M(n0, c.beta);
        r.constants_used["M_as_printed"] = detail::theorem1_M_as_printed(n0, c.beta);
      } else {
        r.constants_used["lambda"] = *c.lambda;
        M = detail::theorem2_M(n0, c.beta, *c.lambda);
      }
      r.constants_used["n0"] = n0;
      r.constants_used["M"] = M;
      for (std::size_t n = *start; n <= N; ++n) {
        const auto& s = h[n - 1].regrets;
        const double base = distinct(n) ? s.best_expert_regret() : s.expert[0];
        detail::set_slack(r, n, base + M - s.R);
      }
      return r;
    }

    case BoundKind::BiasIncrementSum: {
      BoundReport r = detail::make_report(kind, N, tol(1e-9));
      r.constants_used["beta"] = c.beta;
      double total = 0.0;
      for (std::size_t n = 1; n <= N; ++n) {
        const double a = h[n - 1].diagnostics.bias_increment;
        detail::require_diag(a, "bias_increment");
        total += std::abs(a);
        const double bound = root(n) / 2.0 + c.beta * ln(n);
        detail::set_slack(r, n, bound - total + 1e-12 * bound);
      }
      return r;
    }

    case BoundKind::HedgeGap: {
      double L = 0.0;
      if (c.L) {
        L = *c.L;
      } else {
        for (const auto& rec : h) L = std::max(L, std::abs(rec.losses.difference()));
      }
      const double gs = c.gamma_scale, gp = c.gamma_power;
      auto report = hedge_gap_check(
          ledger, L, [gs, gp](std::size_t i) { return gs / std::pow(static_cast<double>(i), gp); }, c.n0,
          tol(1e-9));
      report.constants_used["gamma_scale"] = gs;
      report.constants_used["gamma_power"] = gp;
      return report;
    }

    case BoundKind::RewardBound: {
      if (!(c.eta > 0.0)) throw ConfigError("reward_bound: eta is required");
      const std::size_t d = ledger.dimension();
      if (c.initial_weights.size() != d) throw ConfigError("reward_bound: initial weights are required");
      BoundReport r = detail::make_report(kind, N, tol(1e-9));
      r.constants_used["eta"] = c.eta;
      double W1 = 0.0;
      for (double w : c.initial_weights) W1 += w;
      std::vector<double> U(d);
      for (std::size_t k = 0; k < d; ++k) U[k] = std::log(c.initial_weights[k] / W1) / c.eta;
      double mixed = 0.0;
      for (std::size_t n = 1; n <= N; ++n) {
        const auto& u = h[n - 1].diagnostics.rewards;
        if (u.size() != d) throw ConfigError("reward_bound: bound needs combiner diagnostic 'rewards'");
        mixed += h[n - 1].action.dot(u);
        for (std::size_t k = 0; k < d; ++k) U[k] += u[k] - c.eta * u[k] * u[k];
        detail::set_slack(r, n, mixed - *std::max_element(U.begin(), U.end()));
      }
      return r;
    }

    case BoundKind::Decomposition: {
      BoundReport r = detail::make_report(kind, N, tol(0.0));
      for (std::size_t n = 1; n <= N; ++n) {
        const auto& s = h[n - 1].regrets;
        const double residual = std::abs(s.R - (s.best_expert_regret() + s.Rtilde));
        detail::set_slack(r, n, 1e-9 * static_cast<double>(n) - residual);
      }
      return r;
    }
  }
  throw ConfigError("check_bound: unhandled bound");
}

inline BoundReport check_bound(const RegretLedger& ledger, std::string_view name, const BoundConstants& c = {}) {
  return check_bound(ledger, parse_bound_kind(name), c);
}

}  // namespace effreg
