#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "effreg/harness.hpp"

using namespace effreg;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path p = fs::temp_directory_path() / ("effreg_test_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

std::string csv_of(const RunRecord& r) {
  std::ostringstream out;
  write_csv(r, out);
  return out.str();
}

RunConfig cfg(std::string scenario, Algorithm a, std::size_t steps) {
  RunConfig c;
  c.scenario = std::move(scenario);
  c.algorithm = a;
  c.steps = steps;
  return c;
}

void write_stream(const fs::path& p, const std::vector<StepLosses>& rows, const std::string& meta = "") {
  std::ofstream out(p);
  out << "# test stream\n" << meta << "b_1,b_2,comparator\n";
  for (const auto& r : rows) {
    out << format_number(r.expert_losses[0]) << ',' << format_number(r.expert_losses[1]) << ','
        << format_number(r.comparator_loss) << '\n';
  }
}

}  // namespace

TEST(Config, ParsesDocumentedKeys) {
  const RunConfig c = parse_config(R"(# comment
scenario = example2
algorithm = biased_t1   # trailing comment
steps = 500
beta = 2
eta = 0.5
bias_sqrt = 1
seed = 9
dimension = 3
favored = 2
w11 = 0.25
C = 100
svg = true
)");
  EXPECT_EQ(c.scenario, "example2");
  EXPECT_EQ(c.algorithm, Algorithm::BiasedT1);
  EXPECT_EQ(c.steps, 500u);
  EXPECT_EQ(c.beta, 2.0);
  EXPECT_EQ(c.eta, 0.5);
  EXPECT_EQ(c.bias_sqrt, 1.0);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.dimension, 3u);
  EXPECT_EQ(c.favored_expert, 2u);
  EXPECT_EQ(c.w11, 0.25);
  EXPECT_EQ(c.C, 100.0);
  EXPECT_TRUE(c.emit_svg);
}

TEST(Config, RejectsUnknownAndMalformed) {
  EXPECT_THROW(parse_config("stepsize = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("steps = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("steps = ten\n"), ConfigError);
  EXPECT_THROW(parse_config("beta = 1x\n"), ConfigError);
  EXPECT_THROW(parse_config("algorithm = sgd\n"), ConfigError);
  EXPECT_THROW(parse_config("just words\n"), ConfigError);
  EXPECT_THROW(parse_config("svg = maybe\n"), ConfigError);
}

TEST(Config, SampleConfigsParse) {
  std::size_t seen = 0;
  for (const auto& entry : fs::directory_iterator(EFFREG_CONFIG_DIR)) {
    if (entry.path().extension() == ".cfg") {
      EXPECT_NO_THROW(load_config_file(entry.path())) << entry.path();
      ++seen;
    } else if (entry.path().extension() == ".catalog") {
      EXPECT_NO_THROW(parse_verify_catalog(detail::read_file(entry.path()))) << entry.path();
      ++seen;
    }
  }
  EXPECT_GT(seen, 0u);
}

TEST(Run, UnknownScenarioAndBadFavoured) {
  EXPECT_THROW(simulate(cfg("no_such_scenario", Algorithm::Lazy, 10)), ConfigError);
  RunConfig c = cfg("example1", Algorithm::Lazy, 10);
  c.favored_expert = 3;
  EXPECT_THROW(simulate(c), ConfigError);
}

TEST(Run, RowsAndSpecExamples) {
  RunConfig c = cfg("example1", Algorithm::Lazy, 10000);
  c.eta = 2.0;
  const RunRecord lazy = simulate(c);
  EXPECT_EQ(lazy.rows(), 10000u);
  EXPECT_LE(lazy.final_regrets().R, 1.0);

  const RunRecord hedge = simulate(cfg("example1", Algorithm::Hedge, 10000));
  EXPECT_GE(growth_exponent(hedge.regret_series()), 0.45);

  const RunRecord biased = simulate(cfg("example2", Algorithm::BiasedT1, 10000));
  EXPECT_EQ(biased.settled_from(), 9u);
  EXPECT_TRUE(biased.ledger.history().back().action.is_vertex(0));
}

TEST(Run, CsvSchemaAndUnits) {
  const RunRecord r = simulate(cfg("example5", Algorithm::BiasedT2, 20));
  const std::string csv = csv_of(r);
  std::istringstream in(csv);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "step,b_1,b_2,comparator,x_1,x_2,combined_loss,R,R_1,R_2,Rtilde");
  // Step 1: both learners start at z = 1, so b = (2, 2) in original units.
  EXPECT_EQ(first.substr(0, 8), "1,2,2,0,");
  std::size_t lines = 1;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 20u);
}

TEST(Run, NumberFormatRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) {
    const std::string s = format_number(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
}

TEST(Run, CsvIsBitwiseReproducible) {
  RunConfig c = cfg("random", Algorithm::Cascade, 300);
  c.dimension = 3;
  c.seed = 77;
  EXPECT_EQ(csv_of(simulate(c)), csv_of(simulate(c)));
  c.seed = 78;
  const std::string other = csv_of(simulate(c));
  c.seed = 77;
  EXPECT_NE(csv_of(simulate(c)), other);
}

TEST(Run, WritesCsvAndSvg) {
  const fs::path dir = temp_dir();
  RunConfig c = cfg("example2", Algorithm::BiasedT1, 3000);
  c.output = (dir / "ex2.csv").string();
  c.emit_svg = true;
  run(c);
  ASSERT_TRUE(fs::exists(dir / "ex2.csv"));
  ASSERT_TRUE(fs::exists(dir / "ex2.svg"));
  const std::string svg = detail::read_file(dir / "ex2.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("polyline"), std::string::npos);
  c.log_log = true;
  EXPECT_NO_THROW(run(c));
  fs::remove_all(dir);
}

TEST(Run, StreamFileScenario) {
  const fs::path dir = temp_dir();
  std::vector<StepLosses> rows;
  for (std::size_t i = 1; i <= 200; ++i) {
    StepLosses b = example2(i);
    for (double& v : b.expert_losses) v *= 3.0;
    b.comparator_loss *= 3.0;
    rows.push_back(b);
  }
  write_stream(dir / "scaled.csv", rows, "#@ loss_bound = 3\n");
  RunConfig c = cfg((dir / "scaled.csv").string(), Algorithm::BiasedT1, 200);
  const RunRecord from_file = simulate(c);
  const RunRecord analytic = simulate(cfg("example2", Algorithm::BiasedT1, 200));
  EXPECT_EQ(from_file.loss_scale, 3.0);
  EXPECT_EQ(from_file.final_regrets().R, 3.0 * analytic.final_regrets().R);
  c.steps = 201;
  EXPECT_THROW(simulate(c), ConfigError);

  write_stream(dir / "over.csv", rows);  // losses of 3 exceed the default bound 1
  EXPECT_THROW(simulate(cfg((dir / "over.csv").string(), Algorithm::Lazy, 10)), ConfigError);
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "x,y\n1,2\n";
  }
  EXPECT_THROW(simulate(cfg((dir / "bad.csv").string(), Algorithm::Lazy, 1)), ConfigError);
  fs::remove_all(dir);
}

TEST(Run, ActionsUseOnlyEarlierLosses) {
  // Changing the losses of round k must leave the actions of rounds 1..k unchanged.
  const fs::path dir = temp_dir();
  const Scenario base = random_adversary(5, 400, 2);
  std::vector<StepLosses> rows;
  for (std::size_t i = 1; i <= base.horizon; ++i) rows.push_back(base.at(i));
  for (const auto& e : kAlgorithmNames) {
    RunConfig c = cfg((dir / "a.csv").string(), e.algorithm, 400);
    c.C = 400.0;
    write_stream(dir / "a.csv", rows);
    const RunRecord ref = simulate(c);
    for (std::size_t k : {1u, 57u, 250u}) {
      std::vector<StepLosses> changed = rows;
      changed[k - 1].expert_losses = {-changed[k - 1].expert_losses[1], 0.9};
      write_stream(dir / "b.csv", changed);
      c.scenario = (dir / "b.csv").string();
      const RunRecord alt = simulate(c);
      c.scenario = (dir / "a.csv").string();
      for (std::size_t i = 1; i <= k; ++i) {
        ASSERT_EQ(alt.ledger.history()[i - 1].action, ref.ledger.history()[i - 1].action)
            << e.name << " k=" << k << " i=" << i;
      }
    }
  }
  fs::remove_all(dir);
}

TEST(Sweep, SingletonGridMatchesRun) {
  RunConfig base = cfg("example1", Algorithm::Hedge, 5000);
  const auto rows = sweep(base, parse_grid({"eta=2"}));
  ASSERT_EQ(rows.size(), 1u);
  base.eta = 2.0;
  const RunRecord r = simulate(base);
  EXPECT_TRUE(rows[0].ok);
  EXPECT_EQ(rows[0].final_regrets.R, r.final_regrets().R);
  EXPECT_EQ(rows[0].final_regrets.expert, r.final_regrets().expert);
  EXPECT_EQ(rows[0].final_regrets.Rtilde, r.final_regrets().Rtilde);
  EXPECT_EQ(rows[0].exponent, growth_exponent(r.regret_series()));
}

TEST(Sweep, HedgeStepSizes) {
  const auto rows = sweep(cfg("example1", Algorithm::Hedge, 100000), parse_grid({"eta=2,5"}));
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.ok);
    EXPECT_NEAR(r.exponent, 0.5, 0.08);
  }
}

TEST(Sweep, BiasedBetaSettlesSoonerAsBetaGrows) {
  const auto rows = sweep(cfg("example2", Algorithm::BiasedT1, 10000), parse_grid({"beta=0.5,1,2"}));
  ASSERT_EQ(rows.size(), 3u);
  std::size_t previous = SIZE_MAX;
  for (const auto& r : rows) {
    ASSERT_TRUE(r.settled_from.has_value());
    EXPECT_EQ(r.final_regrets.expert[0], 0.0);  // settled on expert 1 (both experts tie)
    EXPECT_LT(*r.settled_from, previous);
    previous = *r.settled_from;
  }
}

TEST(Sweep, CartesianProductAndFailedRows) {
  const auto rows = sweep(cfg("example2", Algorithm::BiasedT1, 200), parse_grid({"beta=1,2", "algorithm=lazy,hedge,cascade"}));
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[1].params[0].second, "1");
  EXPECT_EQ(rows[1].params[1].second, "hedge");
  const auto bad = sweep(cfg("example2", Algorithm::ABProd, 200), parse_grid({"C=100,0.5"}));
  EXPECT_TRUE(bad[0].ok);
  EXPECT_FALSE(bad[1].ok);
  EXPECT_FALSE(bad[1].error.empty());
  std::ostringstream out;
  write_sweep_csv(bad, out);
  EXPECT_NE(out.str().find("failed"), std::string::npos);
  EXPECT_THROW(parse_grid({"eta"}), ConfigError);
  EXPECT_THROW(parse_grid({"nonsense=1"}), ConfigError);
  EXPECT_THROW(parse_grid({"eta=1", "eta=2"}), ConfigError);
}

TEST(Verify, CatalogParsingAndExitCodes) {
  const auto checks = parse_verify_catalog(R"(
[good]
scenario = example2
algorithm = biased_t1
steps = 2000
bound = theorem1_worst_case

[vacuous]
scenario = example1
algorithm = hedge
steps = 2000
bound = hedge_gap

[seeded]
scenario = random
algorithm = biased_t1
steps = 500
seeds = 5
bound = ftl
)");
  ASSERT_EQ(checks.size(), 3u);
  const auto results = verify(checks);
  EXPECT_EQ(results[0].status, "pass");
  EXPECT_EQ(results[1].status, "vacuous");
  EXPECT_EQ(results[2].status, "pass");
  EXPECT_EQ(results[2].runs, 5u);
  EXPECT_EQ(verify_exit_code(results), 0);

  auto failing = checks;
  failing[0].tolerance = -1.0;  // demands slack >= 1 on the decomposition residual below
  failing[0].bound = BoundKind::Decomposition;
  const auto bad = verify(failing);
  EXPECT_EQ(bad[0].status, "fail");
  EXPECT_EQ(bad[0].violated_at, 1u);
  EXPECT_EQ(verify_exit_code(bad), 2);
  std::ostringstream out;
  print_verify(bad, out);
  EXPECT_NE(out.str().find("first_violation_step=1"), std::string::npos);

  EXPECT_THROW(parse_verify_catalog("[x]\nscenario = example1\n"), ConfigError);
  EXPECT_THROW(parse_verify_catalog("bound = ftl\n"), ConfigError);
  EXPECT_THROW(parse_verify_catalog("[x]\nbound = ftl\nunknown = 1\n"), ConfigError);
}

TEST(Verify, BuiltInCatalogPasses) {
  const auto results = verify(default_verify_catalog());
  for (const auto& r : results) EXPECT_NE(r.status, "fail") << r.label << " " << r.message;
  EXPECT_EQ(verify_exit_code(results), 0);
}
