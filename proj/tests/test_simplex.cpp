#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "effreg/simplex.hpp"

using namespace effreg;

namespace {

double distance(const SimplexPoint& a, const SimplexPoint& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.dimension(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

// Brute-force minimizer of ||x - w|| over the simplex grid with spacing h (d = 3).
std::vector<double> grid_oracle3(const std::vector<double>& w, double h) {
  const long steps = std::lround(1.0 / h);
  std::vector<double> best;
  double best_d = INFINITY;
  for (long a = 0; a <= steps; ++a) {
    for (long b = 0; a + b <= steps; ++b) {
      const double x[3] = {a * h, b * h, 1.0 - a * h - b * h};
      double d = 0.0;
      for (int k = 0; k < 3; ++k) d += (x[k] - w[k]) * (x[k] - w[k]);
      if (d < best_d) best_d = d, best = {x[0], x[1], x[2]};
    }
  }
  return best;
}

}  // namespace

TEST(SimplexPoint, ClampsNegativesAndChecksSum) {
  const SimplexPoint p({1.0 + 1e-12, -1e-12});
  EXPECT_EQ(p[1], 0.0);
  EXPECT_TRUE(p.is_valid());
  EXPECT_THROW(SimplexPoint({0.5, 0.6}), DomainError);
  EXPECT_THROW(SimplexPoint({NAN, 1.0}), DomainError);
  EXPECT_THROW(SimplexPoint(std::vector<double>{}), ConfigError);
}

TEST(SimplexPoint, VerticesAndUniform) {
  EXPECT_TRUE(SimplexPoint::vertex(3, 1).is_vertex(1));
  EXPECT_FALSE(SimplexPoint::vertex(3, 1).is_vertex(0));
  EXPECT_FALSE(SimplexPoint::uniform(3).is_vertex());
  EXPECT_DOUBLE_EQ(SimplexPoint::uniform(4)[2], 0.25);
}

TEST(ProjectSimplex, OnSimplexIsFixed) {
  const SimplexPoint p = project_simplex({0.4, 0.3, 0.3});
  EXPECT_EQ(p[0], 0.4);
  EXPECT_EQ(p[1], 0.3);
  EXPECT_EQ(p[2], 0.3);
}

TEST(ProjectSimplex, Examples) {
  const SimplexPoint sym = project_simplex({1.0, 1.0, 1.0});
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(sym[k], 1.0 / 3.0, 1e-15);
  EXPECT_EQ(project_simplex({2.0, 0.5}), SimplexPoint::vertex(2, 0));
  EXPECT_EQ(project_simplex({2.0, 0.0, 0.0}), SimplexPoint::vertex(3, 0));
  const SimplexPoint mid = project_simplex({0.7, 0.5});
  EXPECT_NEAR(mid[0], 0.6, 1e-15);
  EXPECT_NEAR(mid[1], 0.4, 1e-15);
}

TEST(ProjectSimplex, RejectsBadInput) {
  EXPECT_THROW(project_simplex({1.0}), ConfigError);
  EXPECT_THROW(project_simplex({1.0, INFINITY}), DomainError);
  EXPECT_THROW(project_simplex({NAN, 0.0, 0.0}), DomainError);
}

TEST(ProjectInterval, Clamp) {
  EXPECT_EQ(project_interval(0.37), 0.37);
  EXPECT_EQ(project_interval(-1.0), 0.0);
  EXPECT_EQ(project_interval(1.49012907173427), 1.0);
  EXPECT_THROW(project_interval(NAN), DomainError);
}

TEST(GapZero, Examples) {
  EXPECT_EQ(gap_zero_coordinates(std::vector<double>{2.0, 0.5}), (std::vector<std::size_t>{1}));
  EXPECT_TRUE(gap_zero_coordinates(std::vector<double>{0.1, 0.2}).empty());
  EXPECT_EQ(gap_zero_coordinates(std::vector<double>{3.0, 1.5, 0.0}), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(gap_zero_coordinates(std::vector<double>{1.0, 0.0}), (std::vector<std::size_t>{1}));  // tie counts
  const SimplexPoint p = project_simplex({3.0, 1.5, 0.0});
  EXPECT_EQ(p, SimplexPoint::vertex(3, 0));
}

TEST(ProjectSimplex, Idempotent) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> w(2 + t % 4);
    for (double& x : w) x = u(rng);
    const SimplexPoint p = project_simplex(w);
    const SimplexPoint q = project_simplex(p.weights());
    EXPECT_EQ(p, q);
  }
}

TEST(ProjectSimplex, NonExpansive) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (std::size_t d : {2u, 3u, 5u}) {
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> a(d), b(d);
      double ab = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        a[k] = u(rng);
        b[k] = u(rng);
        ab += (a[k] - b[k]) * (a[k] - b[k]);
      }
      EXPECT_LE(distance(project_simplex(a), project_simplex(b)), std::sqrt(ab) + 1e-12);
    }
  }
}

TEST(ProjectSimplex, GapCoordinatesAreExactlyZero) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::size_t zeroed = 0;
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> w(2 + t % 4);
    for (double& x : w) x = u(rng);
    const SimplexPoint p = project_simplex(w);
    for (std::size_t l : gap_zero_coordinates(w)) {
      EXPECT_EQ(p[l], 0.0);
      ++zeroed;
    }
  }
  EXPECT_GT(zeroed, 100u);
}

TEST(ProjectSimplex, MatchesGridOracle) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 40; ++t) {
    const std::vector<double> w{u(rng), u(rng), u(rng)};
    const auto g = grid_oracle3(w, 1e-3);
    const SimplexPoint p = project_simplex(w);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(p[k], g[k], 2e-3);
  }
}

TEST(ProjectSimplex, TwoDimensionalMatchesInterval) {
  // P((a, b)) has first coordinate clamp((a - b + 1) / 2).
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int t = 0; t < 1000; ++t) {
    const double v = u(rng), c = u(rng);
    const SimplexPoint p = project_simplex({v, 1.0 - v + c});
    EXPECT_NEAR(p[0], project_interval((2.0 * v - c) / 2.0), 1e-12);
  }
}
