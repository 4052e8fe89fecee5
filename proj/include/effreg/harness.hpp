#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "effreg/bounds.hpp"
#include "effreg/combiner.hpp"
#include "effreg/errors.hpp"
#include "effreg/ledger.hpp"
#include "effreg/scenarios.hpp"

namespace effreg {

inline constexpr std::size_t kDefaultHorizon = 10000;

/// One run: scenario x combiner x horizon plus output options.
struct RunConfig {
  std::string scenario = "example1";    // registry name or path to a stream file
  Algorithm algorithm = Algorithm::Lazy;
  std::optional<std::size_t> steps;     // defaults to the scenario's horizon
  double beta = 1.0;
  std::optional<double> eta;            // step-size scale or multiplicative eta
  std::optional<double> bias_sqrt;      // sqrt coefficient of the bias schedule
  std::optional<std::uint64_t> seed;    // random scenario only
  std::size_t dimension = 2;            // random scenario only
  std::optional<double> drift;          // random scenario only
  std::optional<double> lambda;         // random scenario shrink / loss-difference premise
  std::optional<double> w11;            // initial weight of expert 1
  std::optional<double> C;              // ab_prod variance bound
  std::size_t favored_expert = 1;       // 1-based
  std::optional<std::string> output;    // CSV path
  bool emit_svg = false;
  bool log_log = false;
};

// ---------------------------------------------------------------- parsing

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline double parse_real(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError("'" + std::string(key) + "': expected a real number, got '" + std::string(text) + "'");
  }
  return v;
}

inline std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("'" + std::string(key) + "': expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("'" + std::string(key) + "': expected a boolean, got '" + std::string(text) + "'");
}

/// Split "key = value"; returns nullopt for blank and comment lines.
inline std::optional<std::pair<std::string, std::string>> split_assignment(std::string_view line, std::size_t lineno) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  line = trim(line);
  if (line.empty()) return std::nullopt;
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
  }
  return std::pair{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1)))};
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Keys accepted in config documents, in documentation order.
inline constexpr std::string_view kRunConfigKeys[] = {
    "scenario", "algorithm", "steps", "beta", "eta", "bias_sqrt", "seed", "dimension", "drift",
    "lambda",   "w11",       "C",     "favored", "output", "svg", "log_log",
};

/// Apply one key/value pair; unknown keys and malformed values throw ConfigError.
inline void set_config_value(RunConfig& c, std::string_view key, std::string_view value) {
  using detail::parse_real;
  using detail::parse_unsigned;
  value = detail::trim(value);
  if (key == "scenario") {
    if (value.empty()) throw ConfigError("'scenario' must not be empty");
    c.scenario = std::string(value);
  } else if (key == "algorithm") {
    c.algorithm = parse_algorithm(value);
  } else if (key == "steps") {
    const auto n = parse_unsigned(key, value);
    if (n < 1) throw ConfigError("'steps' must be >= 1");
    c.steps = static_cast<std::size_t>(n);
  } else if (key == "beta") {
    c.beta = parse_real(key, value);
  } else if (key == "eta") {
    c.eta = parse_real(key, value);
  } else if (key == "bias_sqrt") {
    c.bias_sqrt = parse_real(key, value);
  } else if (key == "seed") {
    c.seed = parse_unsigned(key, value);
  } else if (key == "dimension") {
    c.dimension = static_cast<std::size_t>(parse_unsigned(key, value));
  } else if (key == "drift") {
    c.drift = parse_real(key, value);
  } else if (key == "lambda") {
    c.lambda = parse_real(key, value);
  } else if (key == "w11") {
    c.w11 = parse_real(key, value);
  } else if (key == "C") {
    c.C = parse_real(key, value);
  } else if (key == "favored") {
    const auto k = parse_unsigned(key, value);
    if (k < 1) throw ConfigError("'favored' is 1-based");
    c.favored_expert = static_cast<std::size_t>(k);
  } else if (key == "output") {
    c.output = std::string(value);
  } else if (key == "svg") {
    c.emit_svg = detail::parse_bool(key, value);
  } else if (key == "log_log") {
    c.log_log = detail::parse_bool(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

/// Parse a flat `key = value` document ('#' starts a comment) on top of `base`.
inline RunConfig parse_config(std::string_view text, RunConfig base = {}) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto kv = detail::split_assignment(line, lineno)) {
      try {
        set_config_value(base, kv->first, kv->second);
      } catch (const ConfigError& e) {
        throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  return base;
}

inline RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {}) {
  return parse_config(detail::read_file(path), std::move(base));
}

// ---------------------------------------------------------------- scenarios

struct ScenarioInfo {
  std::string_view name;
  std::string_view description;
};

inline constexpr ScenarioInfo kScenarioCatalog[] = {
    {"example1", "l1 = (-1)^i, l2 = 1/(2 sqrt i); comparator expert 1"},
    {"example2", "l1 = (-1)^(i+1), l2 = (-1)^i; comparator expert 2"},
    {"example4", "l1 = 1/i, l2 = (-1)^i; comparator expert 2"},
    {"example5", "learners on z^2 with steps 0.01/sqrt(i) and 0.1/i; L = 2"},
    {"example5_fig10", "learners on z^2 with steps 0.1/i and 1/i; L = 2"},
    {"prod_example", "l1 = 1/sqrt(i), l2 = (-1)^(i+1); comparator expert 2"},
    {"prod_example_flipped", "prod_example with the experts exchanged; comparator expert 1"},
    {"random", "i.i.d. uniform losses in [-1, 1] (seed, dimension, drift, lambda); best expert in hindsight"},
};

/// Load a loss stream from a CSV file with header `b_1,..,b_d,comparator`.
/// Lines starting with '#' are comments, except `#@ loss_bound = L` and
/// `#@ lambda = x` metadata.
inline Scenario load_stream_file(const std::filesystem::path& path) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  std::size_t lineno = 0;
  double loss_bound = 1.0;
  std::optional<double> lambda;
  std::optional<std::size_t> d;
  std::vector<StepLosses> rows;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = detail::trim(line);
    if (t.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    if (t.starts_with("#@")) {
      auto kv = detail::split_assignment(t.substr(2), lineno);
      if (!kv) continue;
      if (kv->first == "loss_bound") {
        loss_bound = detail::parse_real(kv->first, kv->second);
        if (!(loss_bound > 0.0)) throw ConfigError(where + "loss_bound must be > 0");
      } else if (kv->first == "lambda") {
        lambda = detail::parse_real(kv->first, kv->second);
      } else {
        throw ConfigError(where + "unknown metadata key '" + kv->first + "'");
      }
      continue;
    }
    if (t.front() == '#') continue;
    std::vector<std::string_view> fields;
    for (std::size_t pos = 0;;) {
      const auto comma = t.find(',', pos);
      fields.push_back(detail::trim(t.substr(pos, comma == std::string_view::npos ? t.npos : comma - pos)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (!d) {
      if (fields.size() < 3 || fields.back() != "comparator") {
        throw ConfigError(where + "expected header 'b_1,...,b_d,comparator'");
      }
      d = fields.size() - 1;
      continue;
    }
    if (fields.size() != *d + 1) throw ConfigError(where + "expected " + std::to_string(*d + 1) + " fields");
    StepLosses row;
    for (std::size_t k = 0; k < *d; ++k) row.expert_losses.push_back(detail::parse_real("loss", fields[k]));
    row.comparator_loss = detail::parse_real("comparator", fields[*d]);
    for (double b : row.expert_losses) {
      if (std::abs(b) > loss_bound) throw ConfigError(where + "loss exceeds the declared loss_bound");
    }
    rows.push_back(std::move(row));
  }
  if (!d || rows.empty()) throw ConfigError("stream file '" + path.string() + "' has no data rows");
  Scenario s = detail::from_table(path.stem().string(), std::move(rows), loss_bound);
  s.lambda = lambda;
  return s;
}

/// Resolve the config's scenario (registry name, else file path) at the requested horizon.
inline Scenario resolve_scenario(const RunConfig& c) {
  const std::size_t n = c.steps.value_or(kDefaultHorizon);
  const std::string& name = c.scenario;
  if (name == "example1") return analytic_scenario(name, n, &example1);
  if (name == "example2") return analytic_scenario(name, n, &example2);
  if (name == "example4") return analytic_scenario(name, n, &example4);
  if (name == "example5") {
    return make_example5(LearnerExpert::inverse_sqrt(0.01), LearnerExpert::inverse(0.1), n, name);
  }
  if (name == "example5_fig10") {
    return make_example5(LearnerExpert::inverse(0.1), LearnerExpert::inverse(1.0), n, name);
  }
  if (name == "prod_example") return make_prod_example(false, n);
  if (name == "prod_example_flipped") return make_prod_example(true, n);
  if (name == "random") {
    RandomAdversaryOptions opts;
    opts.drift = c.drift.value_or(0.0);
    opts.lambda = c.lambda;
    return random_adversary(c.seed.value_or(1), n, c.dimension, opts);
  }
  if (std::filesystem::is_regular_file(name)) {
    Scenario s = load_stream_file(name);
    if (c.steps) {
      if (*c.steps > s.horizon) {
        throw ConfigError("stream '" + name + "' has " + std::to_string(s.horizon) + " rows, fewer than steps");
      }
      s.horizon = *c.steps;
    }
    return s;
  }
  throw ConfigError("unknown scenario '" + name + "' (not a registry name or readable file)");
}

// ---------------------------------------------------------------- run

struct RunRecord {
  RunConfig config;
  std::string scenario_name;
  double loss_scale = 1.0;
  std::optional<double> lambda;         // premise constant in normalized units
  std::optional<double> eta;            // multiplicative eta or step-size scale used
  std::vector<double> initial_weights;  // multiplicative combiners
  RegretLedger ledger{2};

  std::size_t rows() const { return ledger.steps(); }
  std::size_t dimension() const { return ledger.dimension(); }

  /// Final regrets in the scenario's original units.
  RegretSnapshot final_regrets() const { return ledger.regrets_original_units(); }

  /// R_n for n = 1..steps in original units.
  std::vector<double> regret_series() const {
    std::vector<double> out;
    out.reserve(rows());
    for (const auto& r : ledger.history()) out.push_back(r.regrets.R * loss_scale);
    return out;
  }

  /// First step from which the played action stays on one vertex to the end.
  std::optional<std::size_t> settled_from() const {
    const auto& h = ledger.history();
    if (h.empty() || !h.back().action.is_vertex()) return std::nullopt;
    std::size_t first = h.size();
    while (first > 1 && h[first - 2].action == h.back().action) --first;
    return first;
  }
};

namespace detail {

inline CombinerParams combiner_params(const RunConfig& c, const Scenario& s) {
  CombinerParams p;
  p.beta = c.beta;
  p.eta = c.eta;
  p.bias_sqrt = c.bias_sqrt;
  p.lambda = s.lambda;
  p.w11 = c.w11;
  p.C = c.C;
  if (c.algorithm == Algorithm::ABProd && !p.C) {
    // Pre-pass: C = n max_i (b_2 - b_1)^2 on normalized losses.
    double peak = 0.0;
    for (std::size_t i = 1; i <= s.horizon; ++i) {
      const double u = s.normalized(i).difference();
      peak = std::max(peak, u * u);
    }
    p.C = std::max(static_cast<double>(s.horizon) * peak, std::exp(1.0));
  }
  return p;
}

}  // namespace detail

void write_csv(const RunRecord& record, std::ostream& out);
void write_svg(const RunRecord& record, std::ostream& out);

inline std::filesystem::path svg_path_for(const RunConfig& c) {
  std::filesystem::path p = c.output.value_or("run.csv");
  p.replace_extension(".svg");
  return p;
}

/// Compute a run without touching the filesystem.
inline RunRecord simulate(const RunConfig& config) {
  const Scenario scenario = resolve_scenario(config);
  if (scenario.horizon < 1) throw ConfigError("scenario has no steps");
  const std::size_t d = scenario.dimension;
  if (config.favored_expert < 1 || config.favored_expert > d) {
    throw ConfigError("favored expert " + std::to_string(config.favored_expert) + " outside 1.." + std::to_string(d));
  }
  const CombinerParams params = detail::combiner_params(config, scenario);
  auto combiner = make_combiner(config.algorithm, d, params, config.favored_expert - 1);

  RunRecord rec;
  rec.config = config;
  rec.scenario_name = scenario.name;
  rec.loss_scale = scenario.loss_bound;
  rec.lambda = scenario.lambda;
  switch (config.algorithm) {
    case Algorithm::Prod:
    case Algorithm::SecondOrderHedge:
    case Algorithm::ABProd:
      rec.eta = multiplicative_eta_for(config.algorithm, params);
      rec.initial_weights = initial_weights_for(config.algorithm, params, d);
      break;
    case Algorithm::Lazy:
    case Algorithm::GreedyReference:
    case Algorithm::Hedge:
      rec.eta = params.eta.value_or(1.0);
      break;
    default:
      break;
  }
  rec.ledger = RegretLedger(d, scenario.loss_bound, true);

  for (std::size_t i = 1; i <= scenario.horizon; ++i) {
    // The action is fixed before the round's losses are generated.
    const SimplexPoint action = combiner->current();
    if (!action.is_valid()) throw InvariantViolation(i, "action left the simplex");
    const StepLosses losses = scenario.normalized(i);
    combiner->observe(losses);
    rec.ledger.record(losses, action, combiner->diagnostics());
    if (rec.ledger.decomposition_residual() > 1e-9 * static_cast<double>(i)) {
      throw InvariantViolation(i, "regret decomposition identity broken");
    }
  }
  return rec;
}

/// simulate() plus the configured CSV / SVG outputs.
inline RunRecord run(const RunConfig& config) {
  RunRecord rec = simulate(config);
  if (config.output) {
    std::ofstream out(*config.output, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + *config.output + "'");
    write_csv(rec, out);
  }
  if (config.emit_svg) {
    const auto path = svg_path_for(config);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    write_svg(rec, out);
  }
  return rec;
}

// ---------------------------------------------------------------- CSV

/// Shortest form that keeps 17 significant digits.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline void write_csv(const RunRecord& record, std::ostream& out) {
  const std::size_t d = record.dimension();
  const double L = record.loss_scale;
  out << "step";
  for (std::size_t k = 1; k <= d; ++k) out << ",b_" << k;
  out << ",comparator";
  for (std::size_t k = 1; k <= d; ++k) out << ",x_" << k;
  out << ",combined_loss,R";
  for (std::size_t k = 1; k <= d; ++k) out << ",R_" << k;
  out << ",Rtilde\n";
  std::string line;
  for (const auto& r : record.ledger.history()) {
    line = std::to_string(r.step);
    auto put = [&](double v) {
      line += ',';
      line += format_number(v);
    };
    for (double b : r.losses.expert_losses) put(b * L);
    put(r.losses.comparator_loss * L);
    for (double x : r.action.weights()) put(x);
    put(r.combined_loss * L);
    put(r.regrets.R * L);
    for (double e : r.regrets.expert) put(e * L);
    put(r.regrets.Rtilde * L);
    line += '\n';
    out << line;
  }
}

// ---------------------------------------------------------------- SVG

namespace detail {

struct Series {
  std::string label;
  std::vector<double> y;
};

inline constexpr std::string_view kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

/// Steps to plot: every step up to 2000 rows, otherwise an even (or log-even) subsample.
inline std::vector<std::size_t> sample_steps(std::size_t n, bool log_x) {
  constexpr std::size_t kMax = 2000;
  std::vector<std::size_t> s;
  if (n <= kMax) {
    for (std::size_t i = 1; i <= n; ++i) s.push_back(i);
    return s;
  }
  for (std::size_t j = 0; j < kMax; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(kMax - 1);
    const double v = log_x ? std::pow(static_cast<double>(n), t) : 1.0 + t * static_cast<double>(n - 1);
    const auto i = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(v)), 1, n);
    if (s.empty() || s.back() != i) s.push_back(i);
  }
  return s;
}

inline void svg_panel(std::ostream& out, double top, const std::string& title, const std::vector<Series>& series,
                      const std::vector<std::size_t>& steps, bool log_log) {
  constexpr double W = 800, H = 300, left = 70, right = 150, pad = 30;
  auto fx = [&](std::size_t i) { return log_log ? std::log10(static_cast<double>(i)) : static_cast<double>(i); };
  auto fy = [&](double v) { return log_log ? (v > 0.0 ? std::log10(v) : kNaN) : v; };
  double xmin = fx(steps.front()), xmax = fx(steps.back());
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const auto& s : series) {
    for (std::size_t i : steps) {
      const double v = fy(s.y[i - 1]);
      if (std::isfinite(v)) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    }
  }
  if (!std::isfinite(ymin)) ymin = 0.0, ymax = 1.0;
  if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  const double pw = W - left - right, ph = H - 2 * pad;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + pad + (ymax - y) / (ymax - ymin) * ph; };

  out << "<text x=\"" << left << "\" y=\"" << top + 18 << "\" font-size=\"14\">" << title
      << (log_log ? " (log10-log10)" : "") << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top + pad << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
  const auto label = [&](double x, double y, const std::string& text, const char* anchor) {
    out << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"11\" text-anchor=\"" << anchor << "\">" << text
        << "</text>\n";
  };
  label(left - 5, top + pad + 4, format_number(ymax).substr(0, 10), "end");
  label(left - 5, top + pad + ph, format_number(ymin).substr(0, 10), "end");
  label(left, top + pad + ph + 14, format_number(xmin).substr(0, 8), "start");
  label(left + pw, top + pad + ph + 14, format_number(xmax).substr(0, 8), "end");
  if (!log_log && ymin < 0.0 && ymax > 0.0) {
    out << "<line x1=\"" << left << "\" y1=\"" << py(0.0) << "\" x2=\"" << left + pw << "\" y2=\"" << py(0.0)
        << "\" stroke=\"#ccc\"/>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto colour = kPalette[k % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i : steps) {
      const double v = fy(series[k].y[i - 1]);
      if (std::isfinite(v)) out << px(fx(i)) << ',' << py(v) << ' ';
    }
    out << "\"/>\n";
    const double ly = top + pad + 14 + 16 * static_cast<double>(k);
    out << "<text x=\"" << left + pw + 10 << "\" y=\"" << ly << "\" font-size=\"12\" fill=\"" << colour << "\">"
        << series[k].label << "</text>\n";
  }
}

}  // namespace detail

/// Two stacked panels: regrets against step and action coordinates against step.
inline void write_svg(const RunRecord& record, std::ostream& out) {
  const auto& h = record.ledger.history();
  if (h.empty()) throw ConfigError("write_svg: empty run");
  const std::size_t d = record.dimension();
  const double L = record.loss_scale;
  std::vector<detail::Series> regrets{{"R", {}}}, actions;
  for (std::size_t k = 1; k <= d; ++k) regrets.push_back({"R_" + std::to_string(k), {}});
  for (std::size_t k = 1; k <= d; ++k) actions.push_back({"x_" + std::to_string(k), {}});
  for (const auto& r : h) {
    regrets[0].y.push_back(r.regrets.R * L);
    for (std::size_t k = 0; k < d; ++k) {
      regrets[k + 1].y.push_back(r.regrets.expert[k] * L);
      actions[k].y.push_back(r.action[k]);
    }
  }
  const bool log_log = record.config.log_log;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"620\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::string tag = record.scenario_name + " / " + std::string(to_string(record.config.algorithm));
  detail::svg_panel(out, 0, "regret: " + tag, regrets, detail::sample_steps(h.size(), log_log), log_log);
  detail::svg_panel(out, 310, "action: " + tag, actions, detail::sample_steps(h.size(), false), false);
  out << "</svg>\n";
}

// ---------------------------------------------------------------- parallel map

/// Evaluate fn(0..count-1) on up to hardware_concurrency workers.
template <class Result, class Fn>
std::vector<Result> parallel_map(std::size_t count, Fn fn, std::size_t threads = 0) {
  std::vector<Result> results(count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) results[i] = fn(i);
  };
  std::vector<std::future<void>> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.push_back(std::async(std::launch::async, worker));
  worker();
  for (auto& f : pool) f.get();
  return results;
}

// ---------------------------------------------------------------- verify

/// A (scenario, algorithm, bound) triple, optionally repeated over seeds.
struct VerifyCheck {
  std::string label;
  RunConfig run;
  BoundKind bound = BoundKind::Decomposition;
  std::size_t seeds = 1;                // runs with seed = first_seed .. first_seed + seeds - 1
  std::optional<std::size_t> n0;
  std::optional<double> L;
  std::optional<double> gamma_scale;
  std::optional<double> gamma_power;
  std::optional<double> tolerance;
  std::optional<double> lambda;         // overrides the scenario's declared lambda
};

struct VerifyResult {
  std::string label;
  std::string bound;
  std::string status = "vacuous";       // pass | fail | vacuous | error
  std::size_t runs = 0;
  std::size_t vacuous_runs = 0;
  std::optional<std::uint64_t> failing_seed;
  std::optional<std::size_t> violated_at;
  double min_slack = kNaN;
  std::string message;
};

/// Bound constants derived from a finished run.
inline BoundConstants constants_for(const RunRecord& rec, const VerifyCheck& check) {
  BoundConstants c;
  c.beta = rec.config.beta;
  c.lambda = check.lambda ? check.lambda : rec.lambda;
  if (rec.eta) {
    c.step_size_scale = *rec.eta;
    c.eta = *rec.eta;
  }
  c.initial_weights = rec.initial_weights;
  c.n0 = check.n0;
  c.L = check.L;
  if (check.gamma_scale) c.gamma_scale = *check.gamma_scale;
  if (check.gamma_power) c.gamma_power = *check.gamma_power;
  c.tolerance = check.tolerance;
  return c;
}

inline bool bound_reads_expert_order(BoundKind k) {
  switch (k) {
    case BoundKind::Equilibrium:
    case BoundKind::StrongConvexity:
    case BoundKind::Ftl:
    case BoundKind::Theorem1Efficiency:
    case BoundKind::Theorem2Efficiency:
      return true;
    default:
      return false;
  }
}

inline VerifyResult run_check(const VerifyCheck& check, std::size_t threads = 0) {
  VerifyResult out;
  out.label = check.label;
  out.bound = std::string(to_string(check.bound));
  if (check.seeds < 1) throw ConfigError(check.label + ": seeds must be >= 1");
  if (check.run.favored_expert != 1 && bound_reads_expert_order(check.bound)) {
    throw ConfigError(check.label + ": " + out.bound + " assumes the favoured expert is expert 1");
  }
  const std::uint64_t first_seed = check.run.seed.value_or(1);
  struct One {
    std::string status;
    std::optional<std::size_t> violated_at;
    double min_slack = kNaN;
    std::string error;
  };
  auto evaluate = [&](std::size_t j) {
    One one;
    RunConfig cfg = check.run;
    cfg.output.reset();
    cfg.emit_svg = false;
    if (check.seeds > 1 || check.run.seed) cfg.seed = first_seed + j;
    try {
      const RunRecord rec = simulate(cfg);
      const BoundReport rep = check_bound(rec.ledger, check.bound, constants_for(rec, check));
      one.status = rep.status();
      one.violated_at = rep.violated_at;
      one.min_slack = rep.min_slack();
    } catch (const InvariantViolation& e) {
      one.status = "fail";
      one.violated_at = e.step();
      one.error = e.what();
    } catch (const std::exception& e) {
      one.status = "error";
      one.error = e.what();
    }
    return one;
  };
  const auto all = parallel_map<One>(check.seeds, evaluate, threads);
  bool any_pass = false;
  for (std::size_t j = 0; j < all.size(); ++j) {
    const One& one = all[j];
    ++out.runs;
    if (one.status == "error") {
      out.status = "error";
      out.message = one.error;
      out.failing_seed = first_seed + j;
      return out;
    }
    if (one.status == "fail" && !out.failing_seed) {
      out.failing_seed = first_seed + j;
      out.violated_at = one.violated_at;
      out.message = one.error;
    }
    if (one.status == "vacuous") ++out.vacuous_runs;
    if (one.status == "pass") any_pass = true;
    if (!std::isnan(one.min_slack) && !(one.min_slack >= out.min_slack)) out.min_slack = one.min_slack;
  }
  out.status = out.failing_seed ? "fail" : (any_pass ? "pass" : "vacuous");
  return out;
}

inline std::vector<VerifyResult> verify(const std::vector<VerifyCheck>& checks, std::size_t threads = 0) {
  std::vector<VerifyResult> results;
  results.reserve(checks.size());
  for (const auto& c : checks) results.push_back(run_check(c, threads));
  return results;
}

/// 0 when nothing failed (vacuous results do not fail), 2 otherwise.
inline int verify_exit_code(const std::vector<VerifyResult>& results) {
  for (const auto& r : results) {
    if (r.status == "fail" || r.status == "error") return 2;
  }
  return 0;
}

inline void print_verify(const std::vector<VerifyResult>& results, std::ostream& out) {
  for (const auto& r : results) {
    out << r.status << "  " << r.label << "  [" << r.bound << "]  runs=" << r.runs;
    if (r.vacuous_runs) out << " vacuous_runs=" << r.vacuous_runs;
    if (!std::isnan(r.min_slack)) out << " min_slack=" << format_number(r.min_slack);
    if (r.failing_seed && r.runs > 1) out << " seed=" << *r.failing_seed;
    if (r.violated_at) out << " first_violation_step=" << *r.violated_at;
    if (!r.message.empty()) out << "  (" << r.message << ")";
    out << '\n';
  }
}

/// Catalog document: sections `[label]`, each a flat key/value block with the
/// run keys plus bound, seeds, n0, L, gamma_scale, gamma_power, tolerance,
/// bound_lambda.
inline std::vector<VerifyCheck> parse_verify_catalog(std::string_view text) {
  std::vector<VerifyCheck> checks;
  std::vector<bool> has_bound;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = detail::trim(line);
    if (t.starts_with('[')) {
      if (!t.ends_with(']') || t.size() < 3) throw ConfigError("line " + std::to_string(lineno) + ": bad section");
      checks.push_back(VerifyCheck{});
      checks.back().label = std::string(t.substr(1, t.size() - 2));
      has_bound.push_back(false);
      continue;
    }
    auto kv = detail::split_assignment(line, lineno);
    if (!kv) continue;
    if (checks.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside a [section]");
    VerifyCheck& c = checks.back();
    const auto& [key, value] = *kv;
    try {
      if (key == "bound") {
        c.bound = parse_bound_kind(value);
        has_bound.back() = true;
      } else if (key == "seeds") {
        c.seeds = static_cast<std::size_t>(detail::parse_unsigned(key, value));
      } else if (key == "n0") {
        c.n0 = static_cast<std::size_t>(detail::parse_unsigned(key, value));
      } else if (key == "L") {
        c.L = detail::parse_real(key, value);
      } else if (key == "gamma_scale") {
        c.gamma_scale = detail::parse_real(key, value);
      } else if (key == "gamma_power") {
        c.gamma_power = detail::parse_real(key, value);
      } else if (key == "tolerance") {
        c.tolerance = detail::parse_real(key, value);
      } else if (key == "bound_lambda") {
        c.lambda = detail::parse_real(key, value);
      } else {
        set_config_value(c.run, key, value);
      }
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  for (std::size_t j = 0; j < checks.size(); ++j) {
    if (!has_bound[j]) throw ConfigError("section [" + checks[j].label + "] has no 'bound'");
  }
  return checks;
}

inline VerifyCheck make_check(std::string label, std::string scenario, Algorithm a, BoundKind bound,
                              std::size_t steps, std::size_t seeds = 1) {
  VerifyCheck c;
  c.label = std::move(label);
  c.run.scenario = std::move(scenario);
  c.run.algorithm = a;
  c.run.steps = steps;
  c.bound = bound;
  c.seeds = seeds;
  return c;
}

/// The built-in bound catalog.
inline std::vector<VerifyCheck> default_verify_catalog() {
  using A = Algorithm;
  using B = BoundKind;
  std::vector<VerifyCheck> v;
  v.push_back(make_check("example2 biased_t1 strong convexity", "example2", A::BiasedT1, B::StrongConvexity, 10000));
  v.push_back(make_check("example2 biased_t1 equilibrium", "example2", A::BiasedT1, B::Equilibrium, 10000));
  v.push_back(make_check("example2 biased_t1 ftl", "example2", A::BiasedT1, B::Ftl, 10000));
  v.push_back(make_check("example2 biased_t1 efficiency", "example2", A::BiasedT1, B::Theorem1Efficiency, 10000));
  v.push_back(make_check("example2 biased_t1 bias increments", "example2", A::BiasedT1, B::BiasIncrementSum, 10000));
  v.push_back(make_check("random biased_t1 worst case", "random", A::BiasedT1, B::Theorem1WorstCase, 2000, 100));
  v.push_back(make_check("random biased_t1 strong convexity", "random", A::BiasedT1, B::StrongConvexity, 2000, 100));
  {
    auto c = make_check("random biased_t2 worst case", "random", A::BiasedT2, B::Theorem2WorstCase, 2000, 100);
    c.run.lambda = 1.0;
    v.push_back(c);
  }
  {
    auto c = make_check("example1 lazy settling", "example1", A::Lazy, B::LazyGapSettling, 10000);
    c.run.eta = 2.0;
    v.push_back(c);
    c.label = "example1 lazy gap regret";
    c.bound = B::LazyGapRegret;
    v.push_back(c);
  }
  v.push_back(make_check("example1 hedge gap", "example1", A::Hedge, B::HedgeGap, 10000));
  v.push_back(make_check("example5 biased_t2 worst case", "example5", A::BiasedT2, B::Theorem2WorstCase, 10000));
  v.push_back(make_check("example5 biased_t2 efficiency", "example5", A::BiasedT2, B::Theorem2Efficiency, 10000));
  v.push_back(make_check("prod_example ab_prod rewards", "prod_example", A::ABProd, B::RewardBound, 10000));
  v.push_back(make_check("random prod rewards", "random", A::Prod, B::RewardBound, 2000, 20));
  v.push_back(make_check("random second_order_hedge rewards", "random", A::SecondOrderHedge, B::RewardBound, 2000, 20));
  v.push_back(make_check("random cascade decomposition", "random", A::Cascade, B::Decomposition, 2000, 20));
  v.back().run.dimension = 4;
  return v;
}

// ---------------------------------------------------------------- sweep

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

/// Parse "key=v1,v2,..." axis specifications.
inline std::vector<GridAxis> parse_grid(const std::vector<std::string>& axes) {
  std::vector<GridAxis> grid;
  for (const auto& text : axes) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("grid axis '" + text + "': expected key=v1,v2,...");
    GridAxis axis{std::string(detail::trim(std::string_view(text).substr(0, eq))), {}};
    std::string_view rest = std::string_view(text).substr(eq + 1);
    for (std::size_t pos = 0;;) {
      const auto comma = rest.find(',', pos);
      const auto v = detail::trim(rest.substr(pos, comma == std::string_view::npos ? rest.npos : comma - pos));
      if (v.empty()) throw ConfigError("grid axis '" + text + "': empty value");
      axis.values.emplace_back(v);
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    for (const auto& g : grid) {
      if (g.key == axis.key) throw ConfigError("grid axis '" + axis.key + "' given twice");
    }
    RunConfig probe;
    for (const auto& v : axis.values) set_config_value(probe, axis.key, v);  // validates key and values
    grid.push_back(std::move(axis));
  }
  return grid;
}

struct SweepRow {
  std::vector<std::pair<std::string, std::string>> params;
  bool ok = false;
  std::string error;
  std::size_t steps = 0;
  RegretSnapshot final_regrets;          // original units
  double exponent = kNaN;                // growth exponent of R_n, NaN when undefined
  std::optional<std::size_t> settled_from;
};

/// One run per point of the cartesian product of `grid` applied over `base`.
inline std::vector<SweepRow> sweep(const RunConfig& base, const std::vector<GridAxis>& grid, std::size_t threads = 0) {
  std::size_t points = 1;
  for (const auto& axis : grid) {
    if (axis.values.empty()) throw ConfigError("grid axis '" + axis.key + "' has no values");
    points *= axis.values.size();
  }
  auto evaluate = [&](std::size_t index) {
    SweepRow row;
    RunConfig cfg = base;
    cfg.output.reset();
    cfg.emit_svg = false;
    std::size_t rest = index;
    for (auto axis = grid.rbegin(); axis != grid.rend(); ++axis) {
      const auto& value = axis->values[rest % axis->values.size()];
      rest /= axis->values.size();
      row.params.emplace_back(axis->key, value);
    }
    std::reverse(row.params.begin(), row.params.end());
    try {
      for (const auto& [k, v] : row.params) set_config_value(cfg, k, v);
      const RunRecord rec = simulate(cfg);
      row.steps = rec.rows();
      row.final_regrets = rec.final_regrets();
      row.settled_from = rec.settled_from();
      try {
        row.exponent = growth_exponent(rec.regret_series());
      } catch (const std::exception&) {
        row.exponent = kNaN;
      }
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    return row;
  };
  return parallel_map<SweepRow>(points, evaluate, threads);
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  std::size_t d = 0;
  for (const auto& r : rows) d = std::max(d, r.final_regrets.expert.size());
  if (!rows.empty()) {
    for (const auto& [k, v] : rows.front().params) out << k << ',';
  }
  out << "status,steps,R";
  for (std::size_t k = 1; k <= d; ++k) out << ",R_" << k;
  out << ",Rtilde,exponent,settled_from,error\n";
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.params) out << v << ',';
    out << (r.ok ? "ok" : "failed") << ',' << r.steps << ',';
    if (r.ok) {
      out << format_number(r.final_regrets.R);
      for (double e : r.final_regrets.expert) out << ',' << format_number(e);
      out << ',' << format_number(r.final_regrets.Rtilde);
    } else {
      out << std::string(d + 1, ',');
    }
    out << ',' << format_number(r.exponent) << ',';
    if (r.settled_from) out << *r.settled_from;
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << ',' << err << '\n';
  }
}

}  // namespace effreg
