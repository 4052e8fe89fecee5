#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "effreg/scenarios.hpp"

using namespace effreg;

TEST(Scenarios, Example1) {
  const StepLosses s1 = example1(1), s2 = example1(2);
  EXPECT_EQ(s1.expert_losses, (std::vector<double>{-1.0, 0.5}));
  EXPECT_EQ(s1.comparator_loss, -1.0);
  EXPECT_EQ(s2.expert_losses[0], 1.0);
  EXPECT_NEAR(s2.expert_losses[1], 0.35355339059327, 1e-13);
  double gap = 0.0;
  for (std::size_t n = 1; n <= 100000; ++n) {
    gap += example1(n).difference();
    ASSERT_GE(gap, 0.5 * std::sqrt(static_cast<double>(n)) - 1e-12) << n;
  }
}

TEST(Scenarios, Example2) {
  EXPECT_EQ(example2(1).expert_losses, (std::vector<double>{1.0, -1.0}));
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 1; i <= 1000; ++i) {
    const StepLosses b = example2(i);
    s1 += b.expert_losses[0];
    s2 += b.expert_losses[1];
    ASSERT_LE(std::abs(s1), 1.0);
    ASSERT_LE(std::abs(s2), 1.0);
    ASSERT_EQ(b.difference(), 2.0 * alternating(i));
    ASSERT_EQ(b.comparator_loss, b.expert_losses[1]);
  }
}

TEST(Scenarios, Example4) {
  EXPECT_EQ(example4(1).expert_losses, (std::vector<double>{1.0, -1.0}));
  double r1 = 0.0;
  for (std::size_t i = 1; i <= 4; ++i) r1 += example4(i).expert_losses[0] - example4(i).comparator_loss;
  EXPECT_NEAR(r1, 2.08333333333333, 1e-13);
  for (std::size_t i = 5; i <= 100000; ++i) r1 += example4(i).expert_losses[0] - example4(i).comparator_loss;
  // Harmonic sum: R_{1,n} = ln n + Euler-Mascheroni + O(1/n), so the ratio is 1.0501 at n = 1e5.
  EXPECT_NEAR(r1, std::log(1e5) + 0.5772156649015329, 1e-5);
  EXPECT_NEAR(r1 / std::log(1e5), 1.0, 0.051);
}

TEST(Scenarios, ProdExample) {
  EXPECT_EQ(prod_example(1, false).expert_losses, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(prod_example(1, false).comparator_loss, 1.0);
  const StepLosses f2 = prod_example(2, true);
  EXPECT_EQ(f2.expert_losses[0], -1.0);
  EXPECT_NEAR(f2.expert_losses[1], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(f2.comparator_loss, -1.0);
  double partial = 0.0;
  for (std::size_t i = 1; i <= 1000; ++i) {
    partial += prod_example(i, true).expert_losses[0];
    ASSERT_TRUE(partial == 0.0 || partial == 1.0) << i;
  }
}

TEST(Scenarios, LearnerExpert) {
  LearnerExpert e{1.0, LearnerExpert::Rule::Inverse, 0.1};
  e.update(1, 2.0 * e.position);
  EXPECT_DOUBLE_EQ(e.position, 0.8);
  LearnerExpert zero = LearnerExpert::inverse_sqrt(0.1, 0.0);
  std::vector<LearnerExpert> ls{zero, zero};
  for (std::size_t i = 1; i <= 100; ++i) {
    const StepLosses b = example5(i, ls);
    ASSERT_EQ(b.expert_losses, (std::vector<double>{0.0, 0.0}));
  }
  EXPECT_EQ(ls[0].position, 0.0);
  LearnerExpert big = LearnerExpert::inverse(5.0);
  big.update(1, 2.0);
  EXPECT_EQ(big.position, -1.0);  // clamped to the domain
}

TEST(Scenarios, Example5RespectsDeclaredBounds) {
  const Scenario s = make_example5(LearnerExpert::inverse_sqrt(0.01), LearnerExpert::inverse(0.1), 10000);
  EXPECT_EQ(s.loss_bound, 2.0);
  ASSERT_TRUE(s.lambda.has_value());
  for (std::size_t i = 1; i <= s.horizon; ++i) {
    const StepLosses b = s.normalized(i);
    ASSERT_LE(b.sup_norm(), 1.0);
    ASSERT_LE(std::abs(b.difference()), *s.lambda / (2.0 * std::sqrt(static_cast<double>(i))) * (1 + 1e-12));
    ASSERT_EQ(b.comparator_loss, 0.0);
  }
}

TEST(Scenarios, RandomAdversary) {
  const Scenario a = random_adversary(42, 500, 3), b = random_adversary(42, 500, 3);
  std::vector<double> totals(3, 0.0);
  double comparator = 0.0;
  for (std::size_t i = 1; i <= 500; ++i) {
    ASSERT_EQ(a.at(i).expert_losses, b.at(i).expert_losses);
    for (std::size_t k = 0; k < 3; ++k) totals[k] += a.at(i).expert_losses[k];
    comparator += a.at(i).comparator_loss;
  }
  EXPECT_EQ(comparator, *std::min_element(totals.begin(), totals.end()));
  EXPECT_THROW(random_adversary(1, 10, 1), ConfigError);
  EXPECT_THROW(a.at(501), ConfigError);
  EXPECT_THROW(a.at(0), ConfigError);
}

TEST(Scenarios, RandomAdversaryBoundOverManySeeds) {
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const Scenario s = random_adversary(seed, 200, 2, {0.1, 1.0});
    for (std::size_t i = 1; i <= s.horizon; ++i) {
      const StepLosses b = s.normalized(i);
      ASSERT_LE(b.sup_norm(), 1.0);
      ASSERT_LE(std::abs(b.difference()), 1.0 / (2.0 * std::sqrt(static_cast<double>(i))));
    }
  }
}
