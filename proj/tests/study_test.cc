#include <memory>
#include <set>

#include <gtest/gtest.h>

#include "orchestra/error.h"
#include "orchestra/study.h"
#include "orchestra/study_sim.h"

namespace orchestra::study {
namespace {

struct ManualClock {
  std::shared_ptr<double> now = std::make_shared<double>(0.0);
  Clock clock() const {
    auto n = now;
    return [n] { return *n; };
  }
  void Advance(double s) { *now += s; }
};

std::shared_ptr<const QuestionBank> Bank(std::size_t per_region = 20) {
  return std::make_shared<const QuestionBank>(SyntheticBank(DefaultRegions(), per_region, 7));
}

// Makes answers for a chosen question wrong or right on demand.
std::size_t Wrong(const Question& q) { return (q.answer_index + 1) % q.choices.size(); }

TEST(Scoring, Table) {
  ScoringTable s;
  EXPECT_EQ(s.Delta(Actor::kSelf, true), 10);
  EXPECT_EQ(s.Delta(Actor::kSelf, false), 0);
  EXPECT_EQ(s.Delta(Actor::kHumanAgent, true), 3);
  EXPECT_EQ(s.Delta(Actor::kHumanAgent, false), -7);
  EXPECT_EQ(s.Delta(Actor::kAiAgent, true), 7);
  EXPECT_EQ(s.Delta(Actor::kAiAgent, false), -3);
  // base +-10 shifted by the agent's point cost
  EXPECT_EQ(s.human_correct - s.human_incorrect, 10);
  EXPECT_EQ(s.self_correct - s.human_correct, 7);
  EXPECT_EQ(s.self_correct - s.ai_correct, 3);
}

TEST(Bank, ParsesJsonl) {
  auto bank = QuestionBank::FromJsonl(
      R"({"id": "a", "region": "College Mathematics", "prompt": "p", "choices": ["x", "y"], "answer_index": 1, "recorded": {"human": 0}}
{"id": 7, "region": 0, "prompt": "q", "choices": ["x", "y", "z"], "answer_index": 2}
)");
  ASSERT_EQ(bank.size(), 2u);
  EXPECT_EQ(bank.at(0).region, 2u);
  EXPECT_EQ(bank.at(0).recorded_human, 0u);
  EXPECT_FALSE(bank.at(0).recorded_ai);
  EXPECT_EQ(bank.at(1).id, "7");
}

TEST(Bank, RejectsInvalidRecords) {
  EXPECT_THROW(QuestionBank::FromJsonl(
                   R"({"id":"a","region":0,"choices":["x","y"],"answer_index":2})"),
               BankError);
  EXPECT_THROW(QuestionBank::FromJsonl(R"({"id":"a","region":0,"choices":["x"],"answer_index":0})"),
               BankError);
  EXPECT_THROW(QuestionBank::FromJsonl(
                   R"({"id":"a","region":"Art","choices":["x","y"],"answer_index":0})"),
               BankError);
  EXPECT_THROW(QuestionBank::FromJsonl(
                   R"({"id":"a","region":0,"choices":["x","y"],"answer_index":0,"recorded":{"ai":5}})"),
               BankError);
  EXPECT_THROW(QuestionBank::FromJsonl("{oops"), BankError);
}

TEST(Bank, SampleBankShipsThirtyQuestions) {
  auto bank = QuestionBank::LoadFile(ORCHESTRA_DATA_DIR "/sample_bank.jsonl");
  EXPECT_EQ(bank.size(), 30u);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(bank.IndicesForRegion(r).size(), 10u);
}

TEST(Create, LockInPriors) {
  ManualClock mc;
  Session s("s", StudyConfig::Defaults(Variant::kOrchestration, true), 1, Bank(), mc.clock());
  auto est = PointEstimator::kPosteriorMean;
  EXPECT_DOUBLE_EQ(s.posterior(Actor::kSelf, 0).Estimate(est), 0.8);
  EXPECT_DOUBLE_EQ(s.posterior(Actor::kSelf, 1).Estimate(est), 0.6);
  EXPECT_DOUBLE_EQ(s.posterior(Actor::kSelf, 2).Estimate(est), 0.4);
  EXPECT_NEAR(s.posterior(Actor::kAiAgent, 0).Estimate(est), 0.62, 1e-12);
  EXPECT_NEAR(s.posterior(Actor::kHumanAgent, 0).Estimate(est), 0.795, 1e-12);
  EXPECT_DOUBLE_EQ(s.posterior(Actor::kSelf, 0).alpha_correct(), 4.0);
}

TEST(Create, NoLockInPriors) {
  ManualClock mc;
  Session s("s", StudyConfig::Defaults(Variant::kOrchestration, false), 1, Bank(), mc.clock());
  auto est = PointEstimator::kPosteriorMean;
  EXPECT_NEAR(s.posterior(Actor::kHumanAgent, 0).Estimate(est), 40.0 / 50, 1e-12);
  EXPECT_NEAR(s.posterior(Actor::kAiAgent, 0).Estimate(est), 31.0 / 50, 1e-12);
  EXPECT_NEAR(s.posterior(Actor::kSelf, 0).Estimate(est), 4.0 / 5, 1e-12);
  EXPECT_NEAR(s.posterior(Actor::kHumanAgent, 2).Estimate(est), 22.0 / 50, 1e-12);
  EXPECT_NEAR(s.posterior(Actor::kAiAgent, 2).Estimate(est), 26.0 / 50, 1e-12);
  EXPECT_NEAR(s.posterior(Actor::kSelf, 2).Estimate(est), 2.0 / 5, 1e-12);
  // agent prior strength ten times the user's
  const auto& h = s.posterior(Actor::kHumanAgent, 0);
  const auto& u = s.posterior(Actor::kSelf, 0);
  EXPECT_DOUBLE_EQ(h.alpha_correct() + h.alpha_incorrect(),
                   10 * (u.alpha_correct() + u.alpha_incorrect()));
}

TEST(Create, SeededOrderBalancedAndReproducible) {
  ManualClock mc;
  auto bank = Bank(30);
  auto cfg = StudyConfig::Defaults(Variant::kBaseline, true);
  Session a("a", cfg, 42, bank, mc.clock());
  Session b("b", cfg, 42, bank, mc.clock());
  Session c("c", cfg, 43, bank, mc.clock());
  EXPECT_TRUE(std::equal(a.order().begin(), a.order().end(), b.order().begin(), b.order().end()));
  EXPECT_FALSE(std::equal(a.order().begin(), a.order().end(), c.order().begin(), c.order().end()));
  ASSERT_EQ(a.order().size(), 60u);
  std::vector<int> per(3, 0);
  std::set<std::size_t> unique(a.order().begin(), a.order().end());
  EXPECT_EQ(unique.size(), 60u);
  for (auto i : a.order()) per[bank->at(i).region]++;
  EXPECT_EQ(per, (std::vector<int>{20, 20, 20}));
}

TEST(Create, InsufficientBank) {
  ManualClock mc;
  EXPECT_THROW(Session("s", StudyConfig::Defaults(Variant::kBaseline, true), 1, Bank(19),
                       mc.clock()),
               BankError);
}

// Advances the session until the current question is in `region`, answering
// correctly by self.
void SkipTo(Session& s, ManualClock& mc, std::size_t region) {
  while (s.current_question().region != region) {
    mc.Advance(10);
    auto q = s.GetQuestion();
    if (std::find(q.allowed_actions.begin(), q.allowed_actions.end(), Action::kSelf) !=
        q.allowed_actions.end()) {
      s.AnswerSelf(q.question_id, s.current_question().answer_index, 10);
    } else {
      s.Outsource(q.question_id, Actor::kAiAgent);
    }
  }
}

TEST(GetQuestion, FreshLockInSuggestsSelfOnElementary) {
  ManualClock mc;
  Session s("s", StudyConfig::Defaults(Variant::kOrchestration, true), 3, Bank(), mc.clock());
  SkipTo(s, mc, 0);
  auto v = s.GetQuestion();
  ASSERT_TRUE(v.suggestion);
  EXPECT_EQ(*v.suggestion, Actor::kSelf);
  EXPECT_EQ(*v.suggestion_text, "You should attempt this problem by yourself.");
  EXPECT_EQ(v.region_name, "Elementary Mathematics");
  EXPECT_EQ(v.total, 60u);
}

TEST(GetQuestion, SuggestionIsUtilityArgmax) {
  ManualClock mc;
  auto cfg = StudyConfig::Defaults(Variant::kOrchestration, true);
  Session s("s", cfg, 3, Bank(), mc.clock());
  auto u = s.Utilities();
  // Independent evaluation at the posterior means with uniform region weights.
  std::array<std::array<double, 3>, 3> c = {{{0.8, 0.6, 0.4}, {0.795, 0.545, 0.435},
                                             {0.62, 0.44, 0.51}}};
  const std::size_t r = s.current_question().region;
  for (std::size_t a = 0; a < 3; ++a) {
    double onward = (c[a][0] + c[a][1] + c[a][2]) / 3.0;
    EXPECT_NEAR(*u[a], c[a][r] * onward / cfg.suggestion_costs[a], 1e-12);
  }
}

TEST(GetQuestion, BaselineHasNoSuggestion) {
  ManualClock mc;
  Session s("s", StudyConfig::Defaults(Variant::kBaseline, true), 3, Bank(), mc.clock());
  auto v = s.GetQuestion();
  EXPECT_FALSE(v.suggestion);
  EXPECT_FALSE(v.suggestion_text);
  EXPECT_EQ(v.allowed_actions.size(), 3u);
}

TEST(Answer, ScoresAndUpdatesSelfPosterior) {
  ManualClock mc;
  Session s("s", StudyConfig::Defaults(Variant::kOrchestration, true), 5, Bank(), mc.clock());
  SkipTo(s, mc, 0);
  const auto before = s.posterior(Actor::kSelf, 0);
  mc.Advance(10);
  const auto& q = s.current_question();
  auto r = s.AnswerSelf(q.id, q.answer_index, 10.0);
  EXPECT_TRUE(r.correct);
  EXPECT_EQ(r.score_delta, 10);
  EXPECT_EQ(s.posterior(Actor::kSelf, 0).n_correct(), before.n_correct() + 1);
  // Posterior mean follows the study arithmetic (4 + k + 1) / (5 + n + 1).
  const auto& p = s.posterior(Actor::kSelf, 0);
  EXPECT_NEAR(p.Estimate(PointEstimator::kPosteriorMean),
              (4.0 + p.n_correct()) / (5.0 + p.n_correct() + p.n_incorrect()), 1e-15);
}

TEST(Answer, TooFastStaleAndRange) {
  ManualClock mc;
  Session s("s", StudyConfig::Defaults(Variant::kOrchestration, true), 5, Bank(), mc.clock());
  const auto& q = s.current_question();
  mc.Advance(4);
  EXPECT_THROW(s.AnswerSelf(q.id, 0, 4.0), TooFast);
  EXPECT_THROW(s.AnswerSelf(q.id, 0, 12.0), TooFast);  // server clock says 4 s
  mc.Advance(6);
  EXPECT_THROW(s.AnswerSelf(q.id, 0, 9.9), TooFast);   // client says < 10 s
  EXPECT_THROW(s.AnswerSelf("nope", 0, 10.0), StaleQuestion);
  EXPECT_THROW(s.AnswerSelf(q.id, 99, 10.0), IndexError);
  EXPECT_NO_THROW(s.AnswerSelf(q.id, 0, 10.0));
  EXPECT_TRUE(s.events().size() == 1);
}

TEST(Constrained, WrongSelfAnswerForcesOutsourcing) {
  ManualClock mc;
  Session s("s", StudyConfig::Defaults(Variant::kConstrained, true), 8, Bank(), mc.clock());
  SkipTo(s, mc, 1);
  mc.Advance(10);
  auto r = s.AnswerSelf(s.current_question().id, Wrong(s.current_question()), 10);
  EXPECT_FALSE(r.correct);
  EXPECT_EQ(r.score_delta, 0);
  EXPECT_TRUE(s.forced_outsource(1));
  SkipTo(s, mc, 1);
  auto v = s.GetQuestion();
  EXPECT_TRUE(v.forced_outsource);
  EXPECT_EQ(v.allowed_actions,
            (std::vector<Action>{Action::kOutsourceHuman, Action::kOutsourceAi}));
  ASSERT_TRUE(v.suggestion);
  EXPECT_NE(*v.suggestion, Actor::kSelf);
  EXPECT_EQ(v.suggestion_text->rfind("You were wrong by yourself on High School Mathematics "
                                     "last time. You should outsource this problem to",
                                     0),
            0u);
  mc.Advance(10);
  EXPECT_THROW(s.AnswerSelf(v.question_id, 0, 10), ForcedOutsource);
  s.Outsource(v.question_id, Actor::kHumanAgent);
  EXPECT_FALSE(s.forced_outsource(1));
}

TEST(Constrained, CorrectSelfAnswerClearsNothingElse) {
  ManualClock mc;
  Session s("s", StudyConfig::Defaults(Variant::kOrchestration, true), 8, Bank(), mc.clock());
  mc.Advance(10);
  s.AnswerSelf(s.current_question().id, Wrong(s.current_question()), 10);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_FALSE(s.forced_outsource(r));
}

TEST(Outsource, LockInFinalizesAndKeepsAgentsFixed) {
  ManualClock mc;
  auto cfg = StudyConfig::Defaults(Variant::kOrchestration, true);
  cfg.ai_agent = {AgentModel::Kind::kSimulated, {1.0, 1.0, 1.0}};
  cfg.human_agent = {AgentModel::Kind::kSimulated, {0.0, 0.0, 0.0}};
  Session s("s", cfg, 8, Bank(), mc.clock());
  auto ai_before = s.posterior(Actor::kAiAgent, s.current_question().region);
  auto r = s.Outsource(s.current_question().id, Actor::kAiAgent);
  EXPECT_EQ(r.correct, true);
  EXPECT_EQ(r.score_delta, 7);
  EXPECT_FALSE(r.override_allowed);
  EXPECT_EQ(s.cursor(), 1u);
  EXPECT_EQ(s.posterior(Actor::kAiAgent, s.bank().at(s.order()[0]).region), ai_before);
  auto h = s.Outsource(s.current_question().id, Actor::kHumanAgent);
  EXPECT_EQ(h.correct, false);
  EXPECT_EQ(h.score_delta, -7);
  EXPECT_EQ(s.score(), 0);
  EXPECT_THROW(s.Outsource(s.current_question().id, Actor::kSelf), ProtocolError);
}

TEST(Outsource, NoLockInWithholdsUntilFinalize) {
  ManualClock mc;
  auto cfg = StudyConfig::Defaults(Variant::kOrchestration, false);
  cfg.ai_agent = {AgentModel::Kind::kSimulated, {0.0, 0.0, 0.0}};
  Session s("s", cfg, 8, Bank(), mc.clock());
  const auto q = s.current_question();
  EXPECT_THROW(s.FinalizeOverride(q.id, 0), ProtocolError);
  auto r = s.Outsource(q.id, Actor::kAiAgent);
  EXPECT_FALSE(r.correct);
  EXPECT_FALSE(r.score_delta);
  EXPECT_TRUE(r.override_allowed);
  EXPECT_NE(r.agent_choice, q.answer_index);
  EXPECT_EQ(s.cursor(), 0u);
  EXPECT_EQ(*s.GetQuestion().pending_agent, Actor::kAiAgent);
  mc.Advance(10);
  EXPECT_THROW(s.AnswerSelf(q.id, 0, 10), ProtocolError);
  EXPECT_THROW(s.Outsource(q.id, Actor::kHumanAgent), ProtocolError);

  const auto self_before = s.posterior(Actor::kSelf, q.region);
  const auto ai_before = s.posterior(Actor::kAiAgent, q.region);
  // Override the wrong agent answer with the right one: scored as an AI
  // outsource that turned out correct.
  auto f = s.FinalizeOverride(q.id, q.answer_index);
  EXPECT_TRUE(f.correct);
  EXPECT_EQ(f.score_delta, 7);
  EXPECT_EQ(s.posterior(Actor::kAiAgent, q.region), ai_before.Observe(false));
  EXPECT_EQ(s.posterior(Actor::kSelf, q.region), self_before);
  EXPECT_EQ(s.cursor(), 1u);
}

TEST(Outsource, AcceptMatchesLockInDelta) {
  ManualClock mc;
  auto cfg = StudyConfig::Defaults(Variant::kOrchestration, false);
  cfg.human_agent = {AgentModel::Kind::kSimulated, {1.0, 1.0, 1.0}};
  Session s("s", cfg, 8, Bank(), mc.clock());
  auto r = s.Outsource(s.current_question().id, Actor::kHumanAgent);
  auto f = s.FinalizeOverride(s.current_question().id, r.agent_choice);
  EXPECT_TRUE(f.correct);
  EXPECT_EQ(f.score_delta, 3);
}

TEST(Outsource, SelfUpdateOnOverrideFlag) {
  ManualClock mc;
  auto cfg = StudyConfig::Defaults(Variant::kOrchestration, false);
  cfg.update_self_on_override = true;
  cfg.ai_agent = {AgentModel::Kind::kSimulated, {0.0, 0.0, 0.0}};
  Session s("s", cfg, 8, Bank(), mc.clock());
  const auto q = s.current_question();
  const auto self_before = s.posterior(Actor::kSelf, q.region);
  s.Outsource(q.id, Actor::kAiAgent);
  s.FinalizeOverride(q.id, q.answer_index);
  EXPECT_EQ(s.posterior(Actor::kSelf, q.region), self_before.Observe(true));
}

TEST(Agents, RecordedAnswersAndDeterministicDraws) {
  Question q{"x", 0, "p", {"a", "b", "c", "d"}, 2, 1, std::nullopt};
  ModelResponder human(Actor::kHumanAgent, {AgentModel::Kind::kRecorded, {0.5, 0.5, 0.5}});
  EXPECT_EQ(human.Answer(q, 1), 1u);
  ModelResponder ai(Actor::kAiAgent, {AgentModel::Kind::kRecorded, {0.5, 0.5, 0.5}});
  int correct = 0;
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    auto a = ai.Answer(q, seed);
    EXPECT_EQ(a, ai.Answer(q, seed));
    EXPECT_LT(a, 4u);
    correct += a == 2;
  }
  EXPECT_NEAR(correct / 4000.0, 0.5, 0.03);
  ModelResponder sim(Actor::kHumanAgent, {AgentModel::Kind::kSimulated, {0.0, 0.0, 0.0}});
  EXPECT_NE(sim.Answer(q, 3), 2u);
}

TEST(Session, FinishedRaisesSessionDone) {
  ManualClock mc;
  auto cfg = StudyConfig::Defaults(Variant::kBaseline, true);
  cfg.questions_per_region = 1;
  Session s("s", cfg, 1, Bank(), mc.clock());
  for (int i = 0; i < 3; ++i) s.Outsource(s.current_question().id, Actor::kAiAgent);
  EXPECT_TRUE(s.finished());
  EXPECT_THROW(s.GetQuestion(), SessionDone);
  EXPECT_THROW(s.AnswerSelf("x", 0, 10), SessionDone);
  auto sum = s.Summary();
  EXPECT_EQ(sum.served, 3u);
  for (const auto& r : sum.regions) EXPECT_DOUBLE_EQ(r.actor_rate[2], 1.0);
}

TEST(Summary, AccuracyArithmeticAndRates) {
  ManualClock mc;
  auto cfg = StudyConfig::Defaults(Variant::kBaseline, true);
  cfg.regions = {"Elementary Mathematics"};
  cfg.human_agent.accuracy = {0.5};
  cfg.ai_agent.accuracy = {0.5};
  cfg.self_prior.resize(1);
  cfg.human_prior.resize(1);
  cfg.ai_prior.resize(1);
  auto bank = std::make_shared<const QuestionBank>(SyntheticBank(cfg.regions, 20, 1));
  Session s("s", cfg, 1, bank, mc.clock());
  for (int i = 0; i < 20; ++i) {
    mc.Advance(10);
    const auto& q = s.current_question();
    s.AnswerSelf(q.id, i < 13 ? q.answer_index : Wrong(q), 10);
  }
  auto sum = s.Summary();
  EXPECT_DOUBLE_EQ(sum.regions[0].accuracy, 0.65);
  EXPECT_DOUBLE_EQ(sum.regions[0].actor_rate[0], 1.0);
  EXPECT_DOUBLE_EQ(sum.regions[0].actor_rate[1], 0.0);
  EXPECT_DOUBLE_EQ(sum.regions[0].actor_rate[2], 0.0);
  EXPECT_EQ(sum.score, 130);
  EXPECT_EQ(Session::FoldScore(sum.events, cfg.scoring), 130);
}

TEST(Replay, EventLogRoundTrip) {
  StudySimConfig sc;
  sc.variant = Variant::kConstrained;
  sc.lock_in = false;
  sc.n_users = 1;
  sc.seed = 4;
  auto users = SimulateStudy(sc);
  const auto& events = users[0].summary.events;
  std::vector<Event> parsed;
  for (const auto& e : events) parsed.push_back(EventFromJson(EventToJson(e)));
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(EventToJson(parsed[i]), EventToJson(events[i]));
  }
  auto cfg = StudyConfig::Defaults(sc.variant, sc.lock_in);
  cfg.human_agent.kind = AgentModel::Kind::kSimulated;
  cfg.ai_agent.kind = AgentModel::Kind::kSimulated;
  auto bank = std::make_shared<const QuestionBank>(SyntheticBank(cfg.regions, 20, sc.seed));
  ManualClock mc;
  auto replayed = Session::Replay("user-0", cfg, DeriveSeed(sc.seed, "study_sim.session", 0),
                                  bank, parsed, mc.clock());
  EXPECT_EQ(replayed.score(), users[0].summary.score);
  EXPECT_TRUE(replayed.finished());
  EXPECT_EQ(Session::FoldScore(parsed, cfg.scoring), users[0].summary.score);

  parsed[0].question_id = "bogus";
  EXPECT_THROW(Session::Replay("x", cfg, DeriveSeed(sc.seed, "study_sim.session", 0), bank,
                               parsed, mc.clock()),
               ProtocolError);
}

TEST(Config, JsonRoundTripAndOverrides) {
  auto cfg = StudyConfig::Defaults(Variant::kConstrained, false);
  cfg.min_answer_delay_seconds = 3;
  auto back = StudyConfigFromJson(StudyConfigToJson(cfg));
  EXPECT_EQ(StudyConfigToJson(back), StudyConfigToJson(cfg));
  auto partial = StudyConfigFromJson(R"({"variant": "baseline", "questions_per_region": 2})");
  EXPECT_EQ(partial.variant, Variant::kBaseline);
  EXPECT_TRUE(partial.lock_in);
  EXPECT_EQ(partial.questions_per_region, 2u);
  EXPECT_THROW(StudyConfigFromJson(R"({"variant": "other"})"), ConfigError);
  EXPECT_THROW(StudyConfigFromJson(R"({"human_agent": {"accuracy": [2, 0, 0]}})"), ConfigError);
  EXPECT_THROW(StudyConfigFromJson("[1]"), ConfigError);
}

class StudyInvariants
    : public ::testing::TestWithParam<std::tuple<Variant, bool, std::uint64_t>> {};

TEST_P(StudyInvariants, HoldOnEverySimulatedLog) {
  auto [variant, lock_in, seed] = GetParam();
  StudySimConfig sc;
  sc.variant = variant;
  sc.lock_in = lock_in;
  sc.seed = seed;
  sc.n_users = 10;
  for (const auto& u : SimulateStudy(sc)) {
    EXPECT_TRUE(u.invariants.score_integrity);
    EXPECT_TRUE(u.invariants.region_balance);
    EXPECT_TRUE(u.invariants.constrained_safety);
    EXPECT_TRUE(u.invariants.lock_in_fixity);
    EXPECT_TRUE(ConstrainedSafe(u.summary.events) || variant != Variant::kConstrained);
    for (const auto& r : u.summary.regions) {
      EXPECT_EQ(r.served, 20u);
      EXPECT_NEAR(r.actor_rate[0] + r.actor_rate[1] + r.actor_rate[2], 1.0, 1e-12);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(
    AllVariants, StudyInvariants,
    ::testing::Combine(::testing::Values(Variant::kBaseline, Variant::kOrchestration,
                                         Variant::kConstrained),
                       ::testing::Bool(), ::testing::Values(1u, 2u, 3u)));

TEST(StudySim, ScriptedUsersDeterministic) {
  StudySimConfig sc;
  sc.variant = Variant::kConstrained;
  sc.seed = 9;
  auto a = SimulateStudy(sc);
  auto b = SimulateStudy(sc);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].summary.score, b[i].summary.score);
    EXPECT_EQ(a[i].summary.correct, b[i].summary.correct);
  }
}

TEST(ConstrainedSafe, DetectsViolation) {
  Event wrong;
  wrong.actor = Actor::kSelf;
  wrong.region = 1;
  wrong.correct = false;
  wrong.score_delta = 0;
  Event again = wrong;
  again.correct = true;
  again.score_delta = 10;
  Event other = again;
  other.region = 0;
  std::vector<Event> bad = {wrong, other, again};
  EXPECT_FALSE(ConstrainedSafe(bad));
  Event out = wrong;
  out.actor = Actor::kAiAgent;
  out.correct = true;
  out.score_delta = 7;
  std::vector<Event> good = {wrong, out, again};
  EXPECT_TRUE(ConstrainedSafe(good));
}

}  // namespace
}  // namespace orchestra::study
