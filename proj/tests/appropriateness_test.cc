#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "orchestra/appropriateness.h"
#include "orchestra/error.h"
#include "orchestra/scenario.h"

namespace orchestra {
namespace {

TrueScenario Make(const std::vector<std::vector<double>>& rows, std::vector<double> p = {}) {
  if (p.empty()) p.assign(rows.front().size(), 1.0 / rows.front().size());
  return TrueScenario(Grid<double>::FromRows(rows), p);
}

// Independent evaluation straight from the definitions.
struct Oracle {
  static double CMax(const std::vector<std::vector<double>>& c, const std::vector<double>& p) {
    double s = 0;
    for (std::size_t m = 0; m < p.size(); ++m) {
      double best = 0;
      for (const auto& row : c) best = std::max(best, row[m]);
      s += p[m] * best;
    }
    return s;
  }
  static double CRand(const std::vector<std::vector<double>>& c, const std::vector<double>& p) {
    double s = 0;
    for (const auto& row : c) {
      for (std::size_t m = 0; m < p.size(); ++m) s += p[m] * row[m];
    }
    return s / static_cast<double>(c.size());
  }
};

TEST(LongRunning, Examples) {
  auto s = Make({{0.650, 0.852, 0.877}});
  EXPECT_NEAR(LongRunningCorrectness(s, 0), 0.793, 1e-12);
  EXPECT_DOUBLE_EQ(LongRunningCorrectness(Make({{0.4}}), 0), 0.4);
  EXPECT_DOUBLE_EQ(LongRunningCorrectness(Make({{1, 1, 1}}), 0), 1.0);
}

TEST(CMax, VaryingMatrix) {
  auto c = BuiltinScenario(Profile::kVarying);
  EXPECT_NEAR(CMax(c.Truth()), (0.650 + 0.852 + 0.877) / 3, 1e-12);
  auto single = Make({{0.2, 0.6}});
  EXPECT_DOUBLE_EQ(CMax(single), LongRunningCorrectness(single, 0));
}

TEST(CRand, ModesAgreeAndMatchOracle) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int t = 0; t < 300; ++t) {
    std::size_t k = 1 + t % 5, m = 1 + t % 4;
    std::vector<std::vector<double>> c(k, std::vector<double>(m));
    for (auto& row : c) for (auto& x : row) x = u(rng);
    std::vector<double> p(m);
    for (auto& x : p) x = u(rng);
    double sum = 0;
    for (double x : p) sum += x;
    for (auto& x : p) x /= sum;
    auto s = Make(c, p);
    const double closed = CRand(s, crand::PerStepClosedForm{});
    const double fixed = CRand(s, crand::FixedAgentExpectation{});
    EXPECT_NEAR(closed, Oracle::CRand(c, p), 1e-12);
    EXPECT_NEAR(fixed, closed, 1e-12);
    EXPECT_NEAR(CMax(s), Oracle::CMax(c, p), 1e-12);
    EXPECT_GE(Appropriateness(s), 1.0 - 1e-12);
  }
}

TEST(CRand, MonteCarloWithinBinomialError) {
  for (Profile p : kAllProfiles) {
    auto truth = BuiltinScenario(p).Truth();
    const double closed = CRand(truth);
    const double mc = CRand(truth, crand::MonteCarlo{50, 3, 1000});
    const double sigma = std::sqrt(closed * (1 - closed) / (50.0 * 1000.0));
    EXPECT_NEAR(mc, closed, 3 * sigma) << ToString(p);
  }
}

TEST(CRand, TheoremConstruction) {
  auto s = Theorem1Construct(0.5, 0.25);
  EXPECT_NEAR(CRand(s), 0.625, 1e-15);
  EXPECT_DOUBLE_EQ(CMax(s), 1.0);
}

TEST(Appropriateness, IdenticalAgentsIsOne) {
  EXPECT_NEAR(Appropriateness(Make({{0.3, 0.7}, {0.3, 0.7}, {0.3, 0.7}})), 1.0, 1e-15);
}

TEST(Appropriateness, InvariantProfileBand) {
  double a = Appropriateness(BuiltinScenario(Profile::kInvariant).Truth());
  EXPECT_GE(a, 1.0);
  EXPECT_LE(a, 1.05);
}

TEST(Dissimilarity, Examples) {
  auto s = Make({{1.0}, {0.5}});
  EXPECT_DOUBLE_EQ(Dissimilarity(s, 0, 0), 1.0);
  EXPECT_NEAR(Dissimilarity(s, 0, 1), 2.0, 1e-12);
  auto t = Theorem1Construct(0.3, 0.2);
  EXPECT_NEAR(Dissimilarity(t, 0, 1), 1.0 / 0.7, 1e-12);
}

TEST(Dissimilarity, SymmetricAndAtLeastOne) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::vector<double>> c(3, std::vector<double>(3));
    for (auto& row : c) for (auto& x : row) x = u(rng);
    auto s = Make(c);
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) {
        EXPECT_DOUBLE_EQ(Dissimilarity(s, a, b), Dissimilarity(s, b, a));
        EXPECT_GE(Dissimilarity(s, a, b), 1.0);
        double expect = 1.0;
        for (std::size_t m = 0; m < 3; ++m) {
          expect = std::max(expect, std::exp(std::abs(std::log(c[a][m] / c[b][m]))));
        }
        EXPECT_NEAR(Dissimilarity(s, a, b), expect, 1e-12);
      }
    }
  }
}

TEST(TrueScenario, Validation) {
  EXPECT_THROW(Make({{0.0, 0.5}}), ConfigError);
  EXPECT_THROW(Make({{1.2}}), ConfigError);
  EXPECT_THROW(Make({{0.5, 0.5}}, {0.6, 0.6}), ConfigError);
}

TEST(TrueScenario, FromEstimatesFloors) {
  Grid<CorrectnessPosterior> g(1, 1, CorrectnessPosterior(5, 1));
  BeliefState b(RegionPosterior::Uniform(1), g);
  auto s = TrueScenario::FromEstimates(b, PointEstimator::kMap);
  EXPECT_DOUBLE_EQ(s.capabilities(0, 0), kEstimateFloor);
}

TEST(Theorem1, Construction) {
  auto s = Theorem1Construct(0.5, 0.25);
  EXPECT_EQ(s.agent_count(), 4u);
  auto t = Theorem1Construct(0.1, 0.5);
  ASSERT_EQ(t.agent_count(), 2u);
  EXPECT_DOUBLE_EQ(t.capabilities(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(t.capabilities(1, 0), 0.9);
  EXPECT_THROW(Theorem1Construct(0.5, 1.0), ConfigError);
  EXPECT_THROW(Theorem1Construct(0.0, 0.5), ConfigError);
}

TEST(Theorem1, VerifyReport) {
  auto r = Theorem1Verify(0.5, 0.25, 10000, 1);
  EXPECT_EQ(r.agents, 4u);
  EXPECT_NEAR(r.empirical_prob_bound_holds, 0.75, 1e-12);
  EXPECT_NEAR(r.exact_prob_bound_holds, 0.75, 1e-15);
  EXPECT_NEAR(r.min_dissimilarity, 2.0, 1e-12);
  auto iid = Theorem1Verify(0.5, 0.25, 10000, 1, DrawSampling::kIid);
  EXPECT_NEAR(iid.empirical_prob_bound_holds, 0.75, 0.02);

  auto q = Theorem1Verify(0.2, 0.01, 100, 1);
  EXPECT_NEAR(q.ratio_fixed_agent, 1.0 / 0.802, 1e-9);
  EXPECT_NEAR(q.limit, 1.25, 1e-15);
}

TEST(Theorem1, LimitErrorShrinksWithDelta) {
  for (double eps : {0.2, 0.5, 0.8}) {
    double prev = 1e9;
    for (double delta : {0.1, 0.01, 0.001}) {
      auto r = Theorem1Verify(eps, delta, 1000, 2);
      EXPECT_LT(r.fixed_agent_ratio_limit_error, prev);
      prev = r.fixed_agent_ratio_limit_error;
    }
  }
}

TEST(Theorem1, SmallEpsilonRatioNearOne) {
  auto r = Theorem1Verify(1e-6, 0.1, 100, 1);
  EXPECT_NEAR(r.ratio_fixed_agent, 1.0, 1e-5);
}

}  // namespace
}  // namespace orchestra
