#include "orchestra/study_sim.h"

#include <algorithm>
#include <random>

#include <fmt/format.h>

#include "orchestra/error.h"

namespace orchestra::study {
namespace {

double DrawBeta(Rng& rng, double mean, double sd) {
  if (sd <= 0.0) return mean;
  const double kappa = mean * (1.0 - mean) / (sd * sd) - 1.0;
  if (!(kappa > 0.0)) throw ConfigError("skill sd too large for its mean");
  std::gamma_distribution<double> ga(mean * kappa, 1.0);
  std::gamma_distribution<double> gb((1.0 - mean) * kappa, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

Actor ActorFor(Action a) {
  switch (a) {
    case Action::kSelf: return Actor::kSelf;
    case Action::kOutsourceHuman: return Actor::kHumanAgent;
    case Action::kOutsourceAi: return Actor::kAiAgent;
  }
  return Actor::kSelf;
}

Action ActionFor(Actor a) {
  switch (a) {
    case Actor::kSelf: return Action::kSelf;
    case Actor::kHumanAgent: return Action::kOutsourceHuman;
    case Actor::kAiAgent: return Action::kOutsourceAi;
  }
  return Action::kSelf;
}

}  // namespace

QuestionBank SyntheticBank(const std::vector<std::string>& regions,
                           std::size_t per_region, std::uint64_t seed) {
  Rng rng = MakeRng(seed, "study.bank");
  std::vector<Question> qs;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    for (std::size_t i = 0; i < per_region; ++i) {
      Question q;
      q.id = fmt::format("r{}-q{:03}", r, i);
      q.region = r;
      q.prompt = fmt::format("{} question {}", regions[r], i + 1);
      q.choices = {"A", "B", "C", "D"};
      q.answer_index = UniformIndex(rng, q.choices.size());
      qs.push_back(std::move(q));
    }
  }
  return QuestionBank(std::move(qs), regions);
}

bool ConstrainedSafe(std::span<const Event> events) {
  // last_self_wrong[r]: the most recent scored event in r was a wrong SELF answer.
  std::vector<bool> last_self_wrong;
  for (const Event& e : events) {
    if (!e.score_delta) continue;
    if (e.region >= last_self_wrong.size()) last_self_wrong.resize(e.region + 1, false);
    if (e.actor == Actor::kSelf && last_self_wrong[e.region]) return false;
    last_self_wrong[e.region] = e.actor == Actor::kSelf && e.correct && !*e.correct;
  }
  return true;
}

InvariantReport CheckInvariants(const Session& session) {
  InvariantReport rep;
  const auto& cfg = session.config();
  auto events = session.events();
  rep.score_integrity = Session::FoldScore(events, cfg.scoring) == session.score();
  int stored = 0;
  for (const Event& e : events) stored += e.score_delta.value_or(0);
  rep.score_integrity = rep.score_integrity && stored == session.score();

  if (session.finished()) {
    auto summary = session.Summary();
    for (const auto& r : summary.regions) {
      rep.region_balance = rep.region_balance && r.served == cfg.questions_per_region;
    }
  }
  std::vector<std::size_t> per_region(cfg.region_count(), 0);
  for (std::size_t idx : session.order()) {
    ++per_region[session.bank().at(idx).region];
  }
  for (std::size_t n : per_region) {
    rep.region_balance = rep.region_balance && n == cfg.questions_per_region;
  }

  if (cfg.variant == Variant::kConstrained) rep.constrained_safety = ConstrainedSafe(events);

  if (cfg.lock_in) {
    for (std::size_t r = 0; r < cfg.region_count(); ++r) {
      auto init_h = CorrectnessPosterior::FromRate(cfg.human_prior[r].rate,
                                                   cfg.human_prior[r].strength);
      auto init_a = CorrectnessPosterior::FromRate(cfg.ai_prior[r].rate, cfg.ai_prior[r].strength);
      rep.lock_in_fixity = rep.lock_in_fixity &&
                           session.posterior(Actor::kHumanAgent, r) == init_h &&
                           session.posterior(Actor::kAiAgent, r) == init_a;
    }
  }
  return rep;
}

std::vector<UserResult> SimulateStudy(const StudySimConfig& sc,
                                      std::shared_ptr<const QuestionBank> bank) {
  StudyConfig cfg = StudyConfig::Defaults(sc.variant, sc.lock_in);
  cfg.questions_per_region = sc.questions_per_region;
  cfg.human_agent.kind = AgentModel::Kind::kSimulated;
  cfg.ai_agent.kind = AgentModel::Kind::kSimulated;
  const auto& pol = sc.policy;
  if (pol.skill_mean.size() != cfg.region_count() || pol.skill_sd.size() != cfg.region_count()) {
    throw ConfigError("scripted-user skill must have one entry per region");
  }
  if (!(pol.follow_prob >= 0.0 && pol.follow_prob <= 1.0)) {
    throw ConfigError("follow probability must lie in [0, 1]");
  }
  if (!bank) {
    bank = std::make_shared<const QuestionBank>(
        SyntheticBank(cfg.regions, cfg.questions_per_region, sc.seed));
  }

  std::vector<UserResult> out;
  for (std::size_t u = 0; u < sc.n_users; ++u) {
    UserResult res;
    res.user = u;
    Rng skill_rng = MakeRng(sc.seed, "study_sim.skill", u);
    for (std::size_t r = 0; r < cfg.region_count(); ++r) {
      res.skill.push_back(DrawBeta(skill_rng, pol.skill_mean[r], pol.skill_sd[r]));
    }

    double now = 0.0;
    Clock clock = [&now] { return now; };
    Session s(fmt::format("user-{}", u), cfg, DeriveSeed(sc.seed, "study_sim.session", u),
              bank, clock);
    while (!s.finished()) {
      now += cfg.min_answer_delay_seconds;
      QuestionView v = s.GetQuestion();
      Rng rng = MakeRng(sc.seed, fmt::format("study_sim.user.{}", v.question_id), u);
      const double follow = Uniform01(rng);
      const std::size_t pick = UniformIndex(rng, v.allowed_actions.size());
      const double skill_draw = Uniform01(rng);
      const std::size_t wrong_draw = UniformIndex(rng, v.choices.size() - 1);

      Action action = v.allowed_actions[pick];
      if (v.suggestion && follow < pol.follow_prob) {
        Action suggested = ActionFor(*v.suggestion);
        if (std::find(v.allowed_actions.begin(), v.allowed_actions.end(), suggested) !=
            v.allowed_actions.end()) {
          action = suggested;
        }
      }
      if (action == Action::kSelf) {
        const Question& q = s.current_question();
        std::size_t choice = q.answer_index;
        if (!(skill_draw < res.skill[q.region])) {
          choice = wrong_draw >= q.answer_index ? wrong_draw + 1 : wrong_draw;
        }
        s.AnswerSelf(v.question_id, choice, cfg.min_answer_delay_seconds);
      } else {
        OutsourceResult o = s.Outsource(v.question_id, ActorFor(action));
        if (o.override_allowed) s.FinalizeOverride(v.question_id, o.agent_choice);
      }
    }
    res.summary = s.Summary();
    res.invariants = CheckInvariants(s);
    out.push_back(std::move(res));
  }
  return out;
}

double MeanAccuracy(const std::vector<UserResult>& users) {
  if (users.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& u : users) sum += u.summary.accuracy;
  return sum / static_cast<double>(users.size());
}

void WriteStudyCsvHeader(std::ostream& out) {
  out << "variant,lock_in,user,region,served,correct,accuracy,self_rate,human_rate,ai_rate,"
         "score\n";
}

void WriteStudyCsv(std::ostream& out, const StudySimConfig& sc,
                   const std::vector<UserResult>& users,
                   const std::vector<std::string>& regions) {
  for (const auto& u : users) {
    const auto& s = u.summary;
    auto row = [&](std::string_view region, std::size_t served, std::size_t correct,
                   double acc, double self, double human, double ai) {
      out << fmt::format("{},{},{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{}\n",
                         ToString(sc.variant), sc.lock_in ? 1 : 0, u.user, region, served,
                         correct, acc, self, human, ai, s.score);
    };
    std::array<double, kActors> overall{};
    for (std::size_t m = 0; m < s.regions.size(); ++m) {
      const auto& r = s.regions[m];
      row(m < regions.size() ? regions[m] : fmt::format("{}", m), r.served, r.correct,
          r.accuracy, r.actor_rate[0], r.actor_rate[1], r.actor_rate[2]);
      for (std::size_t a = 0; a < kActors; ++a) {
        overall[a] += r.actor_rate[a] * static_cast<double>(r.served);
      }
    }
    const double n = s.served > 0 ? static_cast<double>(s.served) : 1.0;
    row("overall", s.served, s.correct, s.accuracy, overall[0] / n, overall[1] / n,
        overall[2] / n);
  }
}

}  // namespace orchestra::study
