#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "orchestra/error.h"
#include "orchestra/rogers.h"

namespace orchestra::rogers {
namespace {

Config Small(Variant v, std::uint64_t seed = 1) {
  Config c;
  c.population = 200;
  c.steps = 300;
  c.variant = v;
  c.seed = seed;
  return c;
}

TEST(Survival, Endpoints) {
  Config c;
  EXPECT_DOUBLE_EQ(SurvivalProbability(1.0, false, c), 0.93);
  EXPECT_DOUBLE_EQ(SurvivalProbability(0.0, false, c), 0.85);
  EXPECT_NEAR(SurvivalProbability(1.0, true, c), 0.88, 1e-15);
  EXPECT_NEAR(SurvivalProbability(0.5, false, c), 0.89, 1e-15);
}

TEST(Neighborhood, RingWindow) {
  EXPECT_TRUE(InNeighborhood(0, 995, 1000, 5));
  EXPECT_TRUE(InNeighborhood(0, 5, 1000, 5));
  EXPECT_FALSE(InNeighborhood(0, 6, 1000, 5));
  EXPECT_FALSE(InNeighborhood(0, 994, 1000, 5));
  EXPECT_FALSE(InNeighborhood(3, 3, 1000, 5));
}

TEST(Learning, IndividualClampAndCopy) {
  Config c;
  Rng rng(1);
  HumanAgent a;
  a.penalty = 1.5;
  int hits = 0;
  for (int i = 0; i < 20000; ++i) {
    hits += ApplyLearning(a, {Strategy::Kind::kIndividual, 0}, {}, {}, c, rng).adaptation == 1.0;
  }
  EXPECT_NEAR(hits / 20000.0, 0.99, 0.005);

  std::vector<HumanAgent> prev(3);
  prev[2].adaptation = 0.8;
  auto copied = ApplyLearning(a, {Strategy::Kind::kSocialHuman, 2}, prev, {}, c, rng);
  EXPECT_DOUBLE_EQ(copied.adaptation, 0.8);
  AiSystems ais{};
  ais[1].adaptation = 0.37;
  EXPECT_DOUBLE_EQ(ApplyLearning(a, {Strategy::Kind::kSocialAi, 1}, prev, ais, c, rng).adaptation,
                   0.37);
}

TEST(Learning, PenaltyClamped) {
  Config c;
  c.penalty_stddev = 5.0;
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    double p = DrawPenalty(c, rng);
    EXPECT_GE(p, 0.5);
    EXPECT_LE(p, 1.5);
  }
}

TEST(AiUpdate, GroupsAndEmptyRule) {
  std::vector<HumanAgent> pop(4);
  std::vector<Strategy> st(4, Strategy{Strategy::Kind::kIndividual, 0});
  pop[0].adaptation = 0.2;
  pop[1].adaptation = 1.0;
  pop[2].adaptation = 0.6;
  pop[3].adaptation = 0.6;
  AiSystems prev{};
  prev[0].adaptation = 0.42;
  auto ais = UpdateAiSystems(prev, pop, st);
  EXPECT_DOUBLE_EQ(ais[0].adaptation, 0.42);
  EXPECT_DOUBLE_EQ(ais[1].adaptation, 0.6);
  EXPECT_DOUBLE_EQ(ais[2].adaptation, 0.6);
  st[0] = {Strategy::Kind::kSocialHuman, 1};
  st[1] = {Strategy::Kind::kSocialAi, 2};
  ais = UpdateAiSystems(prev, pop, st);
  EXPECT_DOUBLE_EQ(ais[0].adaptation, 0.6);
  EXPECT_DOUBLE_EQ(ais[1].adaptation, 0.6);
  EXPECT_DOUBLE_EQ(ais[2].adaptation, 0.6);
}

TEST(Choice, OrchestratedValues) {
  Config c;
  c.variant = Variant::kOrchestrated;
  std::vector<HumanAgent> prev(20);
  AiSystems ais{};
  World w;
  Rng rng(3);
  // Everything at zero: individual learning is worth 0.61.
  EXPECT_EQ(ChooseStrategy(10, prev, ais, w, c, nullptr, rng).kind, Strategy::Kind::kIndividual);
  prev[12].adaptation = 1.0;
  auto s = ChooseStrategy(10, prev, ais, w, c, nullptr, rng);
  EXPECT_EQ(s.kind, Strategy::Kind::kSocialHuman);
  EXPECT_EQ(s.source, 12u);
  // An unavailable AI is never chosen even if it is best.
  ais[1].adaptation = 1.0;
  prev[12].adaptation = 0.0;
  w.unavailable_ai = 1;
  EXPECT_NE(ChooseStrategy(10, prev, ais, w, c, nullptr, rng).kind, Strategy::Kind::kSocialAi);
  w.unavailable_ai = 0;
  s = ChooseStrategy(10, prev, ais, w, c, nullptr, rng);
  EXPECT_EQ(s.kind, Strategy::Kind::kSocialAi);
  EXPECT_EQ(s.source, 1u);
}

TEST(Choice, BaselineMixAndBiasCoin) {
  Config c;
  std::vector<HumanAgent> prev(50);
  AiSystems ais{};
  World w;
  w.unavailable_ai = 2;
  Rng rng(4);
  int counts[3] = {0, 0, 0};
  const int n = 30000;
  for (int i = 0; i < n; ++i) {
    auto s = ChooseStrategy(25, prev, ais, w, c, nullptr, rng);
    counts[static_cast<int>(s.kind)]++;
    if (s.kind == Strategy::Kind::kSocialAi) EXPECT_NE(s.source, 2u);
    if (s.kind == Strategy::Kind::kSocialHuman) EXPECT_TRUE(InNeighborhood(25, s.source, 50, 5));
  }
  EXPECT_NEAR(counts[0] / double(n), 1.0 / 3, 0.015);
  // bias 1: the social branch splits evenly.
  EXPECT_NEAR(counts[1] / double(n), 1.0 / 3, 0.015);
  EXPECT_NEAR(counts[2] / double(n), 1.0 / 3, 0.015);
}

TEST(World, ChangeRate) {
  Rng rng(9);
  World w;
  int changes = 0;
  for (int i = 0; i < 400000; ++i) changes += StepWorld(w, 1e-4, rng);
  EXPECT_EQ(w.epoch, static_cast<std::uint64_t>(changes));
  EXPECT_NEAR(changes, 40, 20);
  World still;
  EXPECT_FALSE(StepWorld(still, 0.0, rng));
  EXPECT_EQ(still.epoch, 0u);
}

TEST(World, ChangeResetsAdaptation) {
  Config c = Small(Variant::kOrchestrated);
  c.world_change_prob = 1.0;
  Simulation sim(c);
  for (int i = 0; i < 5; ++i) sim.Step();
  // Every step resets before learning, so AIs only ever see this step's values.
  EXPECT_EQ(sim.world().epoch, 5u);
}

TEST(Replenish, ExtinctionThrows) {
  Config c;
  c.survival_adapted = 0.0;
  c.survival_unadapted = 0.0;
  std::vector<HumanAgent> pop(20);
  std::vector<Strategy> st(20);
  Rng rng(1);
  EXPECT_THROW(SurviveAndReplenish(pop, st, c, rng), ExtinctionError);
}

TEST(Replenish, NewbornsAndBias) {
  Config c;
  c.mutation_rate = 1.0;
  std::vector<HumanAgent> pop(100);
  for (auto& a : pop) a.adaptation = 1.0;
  std::vector<Strategy> st(100);
  Rng rng(2);
  auto deaths = SurviveAndReplenish(pop, st, c, rng);
  EXPECT_EQ(pop.size(), 100u);
  std::size_t zeros = 0;
  for (const auto& a : pop) {
    zeros += a.adaptation == 0.0;
    EXPECT_GE(a.ai_bias, 0.0);
  }
  EXPECT_EQ(zeros, deaths);
}

class RogersProperties : public ::testing::TestWithParam<Variant> {};

TEST_P(RogersProperties, LoggedStepsRespectInvariants) {
  Config c = Small(GetParam(), 3);
  c.world_change_prob = 0.01;
  Simulation sim(c);
  for (std::size_t t = 0; t < c.steps; ++t) {
    sim.Step();
    ASSERT_EQ(sim.population().size(), c.population);
    const auto strategies = sim.strategies();
    for (std::size_t i = 0; i < strategies.size(); ++i) {
      const auto& s = strategies[i];
      if (s.kind == Strategy::Kind::kSocialHuman) {
        ASSERT_TRUE(InNeighborhood(i, s.source, c.population, c.neighborhood_radius));
      }
      if (s.kind == Strategy::Kind::kSocialAi) {
        ASSERT_NE(s.source, sim.world().unavailable_ai);
      }
    }
    for (const auto& a : sim.population()) {
      ASSERT_GE(a.adaptation, 0.0);
      ASSERT_LE(a.adaptation, 1.0);
      ASSERT_GE(a.ai_bias, 0.0);
    }
    for (const auto& ai : sim.ai_systems()) {
      ASSERT_GE(ai.adaptation, 0.0);
      ASSERT_LE(ai.adaptation, 1.0);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Variants, RogersProperties,
                         ::testing::Values(Variant::kBaseline, Variant::kOrchestrated));

TEST(Rogers, OrchestratedLearnedMeanNonDecreasingWithoutWorldChange) {
  for (std::uint64_t seed : {1, 2, 3}) {
    Config c = Small(Variant::kOrchestrated, seed);
    c.world_change_prob = 0.0;
    auto r = rogers::Run(c);
    for (std::size_t t = 2; t < r.series.size(); ++t) {
      ASSERT_GE(r.series[t].mean_adaptation_learned + 1e-12,
                r.series[t - 1].mean_adaptation_learned)
          << "seed " << seed << " step " << t;
    }
  }
}

TEST(Rogers, DeterministicAndCsv) {
  Config c = Small(Variant::kBaseline, 5);
  auto a = rogers::Run(c);
  auto b = rogers::Run(c);
  std::ostringstream sa, sb;
  WriteSeriesCsv(sa, a.series);
  WriteSeriesCsv(sb, b.series);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().substr(0, sa.str().find('\n')),
            "step,mean_adaptation,frac_individual,frac_social_human,frac_social_ai,epoch");
  double tail = 0;
  std::size_t n = c.steps / 10;
  for (std::size_t t = c.steps - n; t < c.steps; ++t) tail += a.series[t].mean_adaptation;
  EXPECT_NEAR(a.equilibrium, tail / n, 1e-12);
}

TEST(Rogers, PosteriorTrackerRuns) {
  Config c = Small(Variant::kOrchestrated, 2);
  c.tracker = Tracker::kPosterior;
  auto r = rogers::Run(c);
  EXPECT_GT(r.equilibrium, 0.5);
}

TEST(Rogers, ConfigValidation) {
  Config c;
  c.population = 5;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = Config{};
  c.world_change_prob = 2.0;
  EXPECT_THROW(c.Validate(), ConfigError);
  EXPECT_THROW(ParseVariant("hybrid"), ConfigError);
}

}  // namespace
}  // namespace orchestra::rogers
