#include "orchestra/study.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "orchestra/error.h"

namespace orchestra::study {
namespace {

using nlohmann::json;

constexpr std::array<Actor, kActors> kAllActors = {Actor::kSelf, Actor::kHumanAgent,
                                                   Actor::kAiAgent};

std::size_t Idx(Actor a) { return static_cast<std::size_t>(a); }

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<RatePrior> Priors(std::initializer_list<double> rates, double strength) {
  std::vector<RatePrior> out;
  for (double r : rates) out.push_back({r, strength});
  return out;
}

json PriorsToJson(const std::vector<RatePrior>& priors) {
  json arr = json::array();
  for (const auto& p : priors) arr.push_back({{"rate", p.rate}, {"strength", p.strength}});
  return arr;
}

std::vector<RatePrior> PriorsFromJson(const json& j) {
  std::vector<RatePrior> out;
  for (const auto& e : j) {
    out.push_back({e.at("rate").get<double>(), e.at("strength").get<double>()});
  }
  return out;
}

json ModelToJson(const AgentModel& m) {
  return {{"kind", m.kind == AgentModel::Kind::kRecorded ? "recorded" : "simulated"},
          {"accuracy", m.accuracy}};
}

AgentModel ModelFromJson(const json& j, AgentModel base) {
  if (j.contains("kind")) {
    std::string kind = Lower(j.at("kind").get<std::string>());
    if (kind == "recorded") {
      base.kind = AgentModel::Kind::kRecorded;
    } else if (kind == "simulated") {
      base.kind = AgentModel::Kind::kSimulated;
    } else {
      throw ConfigError("agent model kind must be 'recorded' or 'simulated'");
    }
  }
  if (j.contains("accuracy")) base.accuracy = j.at("accuracy").get<std::vector<double>>();
  return base;
}

std::string_view EventTypeName(Event::Type t) {
  switch (t) {
    case Event::Type::kAnswer: return "answer";
    case Event::Type::kOutsource: return "outsource";
    case Event::Type::kFinalize: return "finalize";
  }
  return "answer";
}

}  // namespace

std::string_view ToString(Variant v) {
  switch (v) {
    case Variant::kBaseline: return "baseline";
    case Variant::kOrchestration: return "orchestration";
    case Variant::kConstrained: return "constrained";
  }
  return "baseline";
}

Variant ParseVariant(std::string_view name) {
  std::string n = Lower(name);
  if (n == "baseline") return Variant::kBaseline;
  if (n == "orchestration" || n == "orchestrated") return Variant::kOrchestration;
  if (n == "constrained") return Variant::kConstrained;
  throw ConfigError("unknown study variant '" + std::string(name) + "'");
}

std::string_view ToString(Actor a) {
  switch (a) {
    case Actor::kSelf: return "self";
    case Actor::kHumanAgent: return "human_agent";
    case Actor::kAiAgent: return "ai_agent";
  }
  return "self";
}

Actor ParseActor(std::string_view name) {
  std::string n = Lower(name);
  if (n == "self") return Actor::kSelf;
  if (n == "human_agent" || n == "human") return Actor::kHumanAgent;
  if (n == "ai_agent" || n == "ai") return Actor::kAiAgent;
  throw ConfigError("unknown actor '" + std::string(name) + "'");
}

std::string_view ToString(Action a) {
  switch (a) {
    case Action::kSelf: return "self";
    case Action::kOutsourceHuman: return "outsource_human";
    case Action::kOutsourceAi: return "outsource_ai";
  }
  return "self";
}

// ---------------------------------------------------------------- bank

QuestionBank::QuestionBank(std::vector<Question> questions,
                           std::vector<std::string> regions)
    : questions_(std::move(questions)), regions_(std::move(regions)) {
  for (const auto& q : questions_) {
    if (q.region >= regions_.size()) {
      throw BankError(fmt::format("question '{}': region {} out of range", q.id, q.region));
    }
    if (q.choices.size() < 2) {
      throw BankError(fmt::format("question '{}': needs at least 2 choices", q.id));
    }
    auto valid = [&](std::size_t i) { return i < q.choices.size(); };
    if (!valid(q.answer_index)) {
      throw BankError(fmt::format("question '{}': answer_index out of range", q.id));
    }
    if ((q.recorded_human && !valid(*q.recorded_human)) ||
        (q.recorded_ai && !valid(*q.recorded_ai))) {
      throw BankError(fmt::format("question '{}': recorded answer out of range", q.id));
    }
  }
}

QuestionBank QuestionBank::FromJsonl(std::string_view text,
                                     std::vector<std::string> regions) {
  std::vector<Question> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      Question q;
      q.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                    : j.at("id").dump();
      const json& r = j.at("region");
      if (r.is_number_integer()) {
        q.region = r.get<std::size_t>();
      } else {
        auto name = r.get<std::string>();
        auto it = std::find(regions.begin(), regions.end(), name);
        if (it == regions.end()) throw BankError("unknown region '" + name + "'");
        q.region = static_cast<std::size_t>(it - regions.begin());
      }
      q.prompt = j.value("prompt", std::string());
      q.choices = j.at("choices").get<std::vector<std::string>>();
      q.answer_index = j.at("answer_index").get<std::size_t>();
      if (j.contains("recorded")) {
        const json& rec = j.at("recorded");
        if (rec.contains("human")) q.recorded_human = rec.at("human").get<std::size_t>();
        if (rec.contains("ai")) q.recorded_ai = rec.at("ai").get<std::size_t>();
      }
      out.push_back(std::move(q));
    } catch (const json::exception& e) {
      throw BankError(fmt::format("bank line {}: {}", lineno, e.what()));
    } catch (const BankError& e) {
      throw BankError(fmt::format("bank line {}: {}", lineno, e.what()));
    }
  }
  return QuestionBank(std::move(out), std::move(regions));
}

QuestionBank QuestionBank::LoadFile(const std::string& path,
                                    std::vector<std::string> regions) {
  std::ifstream in(path);
  if (!in) throw BankError("cannot open question bank '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return FromJsonl(ss.str(), std::move(regions));
}

std::vector<std::size_t> QuestionBank::IndicesForRegion(std::size_t region) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < questions_.size(); ++i) {
    if (questions_[i].region == region) out.push_back(i);
  }
  return out;
}

int ScoringTable::Delta(Actor actor, bool correct) const {
  switch (actor) {
    case Actor::kSelf: return correct ? self_correct : self_incorrect;
    case Actor::kHumanAgent: return correct ? human_correct : human_incorrect;
    case Actor::kAiAgent: return correct ? ai_correct : ai_incorrect;
  }
  return 0;
}

// ---------------------------------------------------------------- config

StudyConfig StudyConfig::Defaults(Variant variant, bool lock_in) {
  StudyConfig c;
  c.variant = variant;
  c.lock_in = lock_in;
  c.human_agent = {AgentModel::Kind::kRecorded, {0.795, 0.545, 0.435}};
  c.ai_agent = {AgentModel::Kind::kRecorded, {0.62, 0.44, 0.51}};
  c.self_prior = Priors({0.8, 0.6, 0.4}, 5.0);
  if (lock_in) {
    // Agents are held at their known rates; strength only matters for
    // display since lock-in never updates them.
    c.human_prior = Priors({0.795, 0.545, 0.435}, 200.0);
    c.ai_prior = Priors({0.62, 0.44, 0.51}, 100.0);
  } else {
    c.human_prior = Priors({0.80, 0.54, 0.44}, 50.0);
    c.ai_prior = Priors({0.62, 0.44, 0.52}, 50.0);
  }
  return c;
}

void StudyConfig::Validate() const {
  const std::size_t m = regions.size();
  if (m == 0) throw ConfigError("study needs at least one region");
  if (questions_per_region == 0) throw ConfigError("questions_per_region must be >= 1");
  for (const auto* model : {&human_agent, &ai_agent}) {
    if (model->accuracy.size() != m) {
      throw ConfigError("agent accuracy must have one entry per region");
    }
    for (double a : model->accuracy) {
      if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("agent accuracy must lie in [0, 1]");
    }
  }
  for (const auto* priors : {&self_prior, &human_prior, &ai_prior}) {
    if (priors->size() != m) throw ConfigError("priors must have one entry per region");
    for (const auto& p : *priors) {
      if (!(p.rate > 0.0 && p.rate < 1.0) || !(p.strength > 0.0)) {
        throw ConfigError("prior rate must be in (0, 1) and strength > 0");
      }
      CorrectnessPosterior::FromRate(p.rate, p.strength);  // throws InvalidPrior
    }
  }
  for (double g : suggestion_costs) {
    if (!(g > 0.0)) throw ConfigError("suggestion costs must be > 0");
  }
  if (!(min_answer_delay_seconds >= 0.0)) {
    throw ConfigError("min_answer_delay_seconds must be >= 0");
  }
}

std::string StudyConfigToJson(const StudyConfig& c) {
  json j;
  j["variant"] = ToString(c.variant);
  j["lock_in"] = c.lock_in;
  j["questions_per_region"] = c.questions_per_region;
  j["regions"] = c.regions;
  j["scoring"] = {{"self_correct", c.scoring.self_correct},
                  {"self_incorrect", c.scoring.self_incorrect},
                  {"human_correct", c.scoring.human_correct},
                  {"human_incorrect", c.scoring.human_incorrect},
                  {"ai_correct", c.scoring.ai_correct},
                  {"ai_incorrect", c.scoring.ai_incorrect}};
  j["human_agent"] = ModelToJson(c.human_agent);
  j["ai_agent"] = ModelToJson(c.ai_agent);
  j["self_prior"] = PriorsToJson(c.self_prior);
  j["human_prior"] = PriorsToJson(c.human_prior);
  j["ai_prior"] = PriorsToJson(c.ai_prior);
  j["estimator"] = ToString(c.estimator);
  j["min_answer_delay_seconds"] = c.min_answer_delay_seconds;
  j["suggestion_costs"] = c.suggestion_costs;
  j["update_self_on_override"] = c.update_self_on_override;
  return j.dump();
}

StudyConfig StudyConfigFromJson(std::string_view text) {
  json j;
  try {
    j = text.empty() ? json::object() : json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid study config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("study config must be a JSON object");
  try {
    Variant variant = j.contains("variant")
                          ? ParseVariant(j.at("variant").get<std::string>())
                          : Variant::kOrchestration;
    bool lock_in = j.value("lock_in", true);
    StudyConfig c = StudyConfig::Defaults(variant, lock_in);
    if (j.contains("questions_per_region")) {
      c.questions_per_region = j.at("questions_per_region").get<std::size_t>();
    }
    if (j.contains("regions")) c.regions = j.at("regions").get<std::vector<std::string>>();
    if (j.contains("scoring")) {
      const json& s = j.at("scoring");
      c.scoring.self_correct = s.value("self_correct", c.scoring.self_correct);
      c.scoring.self_incorrect = s.value("self_incorrect", c.scoring.self_incorrect);
      c.scoring.human_correct = s.value("human_correct", c.scoring.human_correct);
      c.scoring.human_incorrect = s.value("human_incorrect", c.scoring.human_incorrect);
      c.scoring.ai_correct = s.value("ai_correct", c.scoring.ai_correct);
      c.scoring.ai_incorrect = s.value("ai_incorrect", c.scoring.ai_incorrect);
    }
    if (j.contains("human_agent")) c.human_agent = ModelFromJson(j.at("human_agent"), c.human_agent);
    if (j.contains("ai_agent")) c.ai_agent = ModelFromJson(j.at("ai_agent"), c.ai_agent);
    if (j.contains("self_prior")) c.self_prior = PriorsFromJson(j.at("self_prior"));
    if (j.contains("human_prior")) c.human_prior = PriorsFromJson(j.at("human_prior"));
    if (j.contains("ai_prior")) c.ai_prior = PriorsFromJson(j.at("ai_prior"));
    if (j.contains("estimator")) {
      c.estimator = ParsePointEstimator(j.at("estimator").get<std::string>());
    }
    c.min_answer_delay_seconds =
        j.value("min_answer_delay_seconds", c.min_answer_delay_seconds);
    if (j.contains("suggestion_costs")) {
      c.suggestion_costs = j.at("suggestion_costs").get<std::array<double, kActors>>();
    }
    c.update_self_on_override = j.value("update_self_on_override", c.update_self_on_override);
    c.Validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid study config: ") + e.what());
  }
}

// ---------------------------------------------------------------- agents

ModelResponder::ModelResponder(Actor actor, AgentModel model)
    : actor_(actor), model_(std::move(model)) {}

std::size_t ModelResponder::Answer(const Question& q, std::uint64_t draw_seed) const {
  if (model_.kind == AgentModel::Kind::kRecorded) {
    const auto& rec = actor_ == Actor::kHumanAgent ? q.recorded_human : q.recorded_ai;
    if (rec) return *rec;
  }
  Rng rng(draw_seed);
  if (Bernoulli(rng, model_.accuracy.at(q.region))) return q.answer_index;
  std::size_t wrong = UniformIndex(rng, q.choices.size() - 1);
  return wrong >= q.answer_index ? wrong + 1 : wrong;
}

std::string SuggestionText(Actor suggestion, bool forced, std::string_view region_name) {
  std::string text;
  if (forced) text = fmt::format("You were wrong by yourself on {} last time. ", region_name);
  switch (suggestion) {
    case Actor::kHumanAgent:
      text += "You should outsource this problem to a human agent.";
      break;
    case Actor::kAiAgent:
      text += "You should outsource this problem to the AI agent.";
      break;
    case Actor::kSelf:
      text += "You should attempt this problem by yourself.";
      break;
  }
  return text;
}

// ---------------------------------------------------------------- events

std::string EventToJson(const Event& e) {
  json j;
  j["type"] = EventTypeName(e.type);
  j["index"] = e.index;
  j["question_id"] = e.question_id;
  j["region"] = e.region;
  j["actor"] = ToString(e.actor);
  j["suggestion"] = e.suggestion ? json(ToString(*e.suggestion)) : json(nullptr);
  j["forced"] = e.forced;
  if (e.agent_choice) j["agent_choice"] = *e.agent_choice;
  if (e.agent_correct) j["agent_correct"] = *e.agent_correct;
  if (e.choice) j["choice"] = *e.choice;
  if (e.correct) j["correct"] = *e.correct;
  if (e.score_delta) j["score_delta"] = *e.score_delta;
  j["elapsed_s"] = e.elapsed_seconds;
  return j.dump();
}

Event EventFromJson(std::string_view line) {
  try {
    json j = json::parse(line);
    Event e;
    std::string type = j.at("type").get<std::string>();
    if (type == "answer") {
      e.type = Event::Type::kAnswer;
    } else if (type == "outsource") {
      e.type = Event::Type::kOutsource;
    } else if (type == "finalize") {
      e.type = Event::Type::kFinalize;
    } else {
      throw ProtocolError("unknown event type '" + type + "'");
    }
    e.index = j.at("index").get<std::size_t>();
    e.question_id = j.at("question_id").get<std::string>();
    e.region = j.at("region").get<std::size_t>();
    e.actor = ParseActor(j.at("actor").get<std::string>());
    if (j.contains("suggestion") && !j.at("suggestion").is_null()) {
      e.suggestion = ParseActor(j.at("suggestion").get<std::string>());
    }
    e.forced = j.value("forced", false);
    if (j.contains("agent_choice")) e.agent_choice = j.at("agent_choice").get<std::size_t>();
    if (j.contains("agent_correct")) e.agent_correct = j.at("agent_correct").get<bool>();
    if (j.contains("choice")) e.choice = j.at("choice").get<std::size_t>();
    if (j.contains("correct")) e.correct = j.at("correct").get<bool>();
    if (j.contains("score_delta")) e.score_delta = j.at("score_delta").get<int>();
    e.elapsed_seconds = j.value("elapsed_s", 0.0);
    return e;
  } catch (const json::exception& ex) {
    throw ProtocolError(std::string("malformed event: ") + ex.what());
  }
}

Clock SteadyClock() {
  return [] {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  };
}

// ---------------------------------------------------------------- session

Session::Session(std::string id, StudyConfig config, std::uint64_t seed,
                 std::shared_ptr<const QuestionBank> bank, Clock clock)
    : id_(std::move(id)),
      config_(std::move(config)),
      seed_(seed),
      bank_(std::move(bank)),
      clock_(clock ? std::move(clock) : SteadyClock()),
      region_posterior_(RegionPosterior::Uniform(std::max<std::size_t>(config_.regions.size(), 1))) {
  config_.Validate();
  if (!bank_) throw BankError("no question bank");
  if (bank_->regions() != config_.regions) {
    throw BankError("bank regions do not match the study regions");
  }
  const std::size_t m = config_.region_count();
  Rng select = MakeRng(seed_, "study.order.select");
  for (std::size_t r = 0; r < m; ++r) {
    auto pool = bank_->IndicesForRegion(r);
    if (pool.size() < config_.questions_per_region) {
      throw BankError(fmt::format("region '{}' has {} questions, need {}",
                                  config_.regions[r], pool.size(),
                                  config_.questions_per_region));
    }
    std::shuffle(pool.begin(), pool.end(), select);
    order_.insert(order_.end(), pool.begin(),
                  pool.begin() + static_cast<std::ptrdiff_t>(config_.questions_per_region));
  }
  Rng shuffle = MakeRng(seed_, "study.order.shuffle");
  std::shuffle(order_.begin(), order_.end(), shuffle);

  posteriors_.resize(m);
  for (std::size_t r = 0; r < m; ++r) {
    posteriors_[r][Idx(Actor::kSelf)] =
        CorrectnessPosterior::FromRate(config_.self_prior[r].rate, config_.self_prior[r].strength);
    posteriors_[r][Idx(Actor::kHumanAgent)] =
        CorrectnessPosterior::FromRate(config_.human_prior[r].rate, config_.human_prior[r].strength);
    posteriors_[r][Idx(Actor::kAiAgent)] =
        CorrectnessPosterior::FromRate(config_.ai_prior[r].rate, config_.ai_prior[r].strength);
  }
  forced_.assign(m, false);
  human_ = std::make_shared<ModelResponder>(Actor::kHumanAgent, config_.human_agent);
  ai_ = std::make_shared<ModelResponder>(Actor::kAiAgent, config_.ai_agent);
  issued_at_ = clock_();
}

Session Session::Replay(std::string id, StudyConfig config, std::uint64_t seed,
                        std::shared_ptr<const QuestionBank> bank,
                        std::span<const Event> events, Clock clock) {
  Session s(std::move(id), std::move(config), seed, std::move(bank), std::move(clock));
  s.replaying_ = true;
  for (const Event& e : events) {
    if (s.finished()) throw ProtocolError("event log continues past the last question");
    if (e.index != s.cursor_ || e.question_id != s.current_question().id) {
      throw ProtocolError(fmt::format("event for question {} does not match replay position {}",
                                      e.question_id, s.cursor_));
    }
    switch (e.type) {
      case Event::Type::kAnswer: {
        if (!e.choice) throw ProtocolError("answer event without a choice");
        auto res = s.AnswerSelf(e.question_id, *e.choice, e.elapsed_seconds);
        if (e.correct && *e.correct != res.correct) {
          throw ProtocolError("replayed answer disagrees with the log");
        }
        break;
      }
      case Event::Type::kOutsource: {
        auto res = s.Outsource(e.question_id, e.actor);
        if (e.agent_choice && *e.agent_choice != res.agent_choice) {
          throw ProtocolError("replayed agent answer disagrees with the log");
        }
        break;
      }
      case Event::Type::kFinalize: {
        if (!e.choice) throw ProtocolError("finalize event without a choice");
        s.FinalizeOverride(e.question_id, *e.choice);
        break;
      }
    }
  }
  s.replaying_ = false;
  s.issued_at_ = s.clock_();
  return s;
}

void Session::SetResponders(std::shared_ptr<const AgentResponder> human,
                            std::shared_ptr<const AgentResponder> ai) {
  if (human) human_ = std::move(human);
  if (ai) ai_ = std::move(ai);
}

const Question& Session::current_question() const {
  if (finished()) throw SessionDone("session " + id_ + " is finished");
  return bank_->at(order_[cursor_]);
}

const CorrectnessPosterior& Session::posterior(Actor actor, std::size_t region) const {
  if (region >= posteriors_.size()) throw IndexError("region out of range");
  return posteriors_[region][Idx(actor)];
}

std::vector<Action> Session::AllowedActions() const {
  const std::size_t r = current_question().region;
  std::vector<Action> out;
  if (!(config_.variant == Variant::kConstrained && forced_[r])) out.push_back(Action::kSelf);
  out.push_back(Action::kOutsourceHuman);
  out.push_back(Action::kOutsourceAi);
  return out;
}

std::array<std::optional<double>, kActors> Session::Utilities() const {
  const std::size_t region = current_question().region;
  const auto w = region_posterior_.Weights(config_.estimator);
  std::array<std::optional<double>, kActors> out;
  bool self_allowed = !(config_.variant == Variant::kConstrained && forced_[region]);
  for (Actor a : kAllActors) {
    if (a == Actor::kSelf && !self_allowed) continue;
    double onward = 0.0;
    for (std::size_t m = 0; m < w.size(); ++m) {
      onward += w[m] * posteriors_[m][Idx(a)].Estimate(config_.estimator);
    }
    double here = posteriors_[region][Idx(a)].Estimate(config_.estimator);
    out[Idx(a)] = here * onward / config_.suggestion_costs[Idx(a)];
  }
  return out;
}

std::optional<Actor> Session::Suggestion() const {
  if (config_.variant == Variant::kBaseline) return std::nullopt;
  auto u = Utilities();
  std::optional<Actor> best;
  double best_u = 0.0;
  for (Actor a : kAllActors) {
    if (!u[Idx(a)]) continue;
    if (!best || *u[Idx(a)] > best_u) {
      best = a;
      best_u = *u[Idx(a)];
    }
  }
  return best;
}

QuestionView Session::GetQuestion() const {
  const Question& q = current_question();
  QuestionView v;
  v.question_id = q.id;
  v.index = cursor_;
  v.total = order_.size();
  v.region = q.region;
  v.region_name = config_.regions[q.region];
  v.prompt = q.prompt;
  v.choices = q.choices;
  v.forced_outsource = config_.variant == Variant::kConstrained && forced_[q.region];
  v.suggestion = Suggestion();
  if (v.suggestion) {
    v.suggestion_text = SuggestionText(*v.suggestion, v.forced_outsource, v.region_name);
  }
  v.allowed_actions = AllowedActions();
  v.score = score_;
  if (pending_) {
    v.pending_agent = pending_->agent;
    v.pending_agent_choice = pending_->agent_choice;
  }
  return v;
}

void Session::CheckCurrent(std::string_view question_id) const {
  const Question& q = current_question();
  if (q.id != question_id) {
    throw StaleQuestion(fmt::format("question '{}' is not current (current is '{}')",
                                    question_id, q.id));
  }
}

std::uint64_t Session::AgentDrawSeed(Actor agent, std::size_t index) const {
  const Question& q = bank_->at(order_[index]);
  return DeriveSeed(seed_, fmt::format("study.agent.{}.{}", ToString(agent), q.id));
}

const AgentResponder& Session::Responder(Actor agent) const {
  return agent == Actor::kHumanAgent ? *human_ : *ai_;
}

void Session::Append(Event e) {
  events_.push_back(e);
  if (on_event && !replaying_) on_event(events_.back());
}

void Session::Advance() {
  region_posterior_.ObserveInPlace(bank_->at(order_[cursor_]).region);
  ++cursor_;
  pending_.reset();
  if (!replaying_) issued_at_ = clock_();
}

AnswerResult Session::AnswerSelf(std::string_view question_id, std::size_t choice,
                                 double elapsed_seconds) {
  CheckCurrent(question_id);
  const Question& q = current_question();
  if (pending_) throw ProtocolError("an outsourced answer is awaiting finalize");
  if (config_.variant == Variant::kConstrained && forced_[q.region]) {
    throw ForcedOutsource(fmt::format("region '{}' requires outsourcing after a wrong answer",
                                      config_.regions[q.region]));
  }
  if (choice >= q.choices.size()) throw IndexError("choice out of range");
  if (!replaying_) {
    const double min = config_.min_answer_delay_seconds;
    const double server_elapsed = clock_() - issued_at_;
    if (elapsed_seconds < min || server_elapsed < min) {
      throw TooFast(fmt::format("answers are accepted after {:g} s (reported {:g} s, server {:g} s)",
                                min, elapsed_seconds, server_elapsed));
    }
  }
  Event e;
  e.type = Event::Type::kAnswer;
  e.index = cursor_;
  e.question_id = q.id;
  e.region = q.region;
  e.actor = Actor::kSelf;
  e.suggestion = Suggestion();
  e.forced = false;
  e.choice = choice;
  e.correct = choice == q.answer_index;
  e.score_delta = config_.scoring.Delta(Actor::kSelf, *e.correct);
  e.elapsed_seconds = elapsed_seconds;

  posteriors_[q.region][Idx(Actor::kSelf)].ObserveInPlace(*e.correct);
  if (config_.variant == Variant::kConstrained) forced_[q.region] = !*e.correct;
  score_ += *e.score_delta;
  AnswerResult res{*e.correct, *e.score_delta, score_, false};
  Append(std::move(e));
  Advance();
  res.finished = finished();
  return res;
}

OutsourceResult Session::Outsource(std::string_view question_id, Actor agent) {
  CheckCurrent(question_id);
  if (agent == Actor::kSelf) throw ProtocolError("cannot outsource to self");
  if (pending_) throw ProtocolError("an outsourced answer is awaiting finalize");
  const Question& q = current_question();
  Event e;
  e.type = Event::Type::kOutsource;
  e.index = cursor_;
  e.question_id = q.id;
  e.region = q.region;
  e.actor = agent;
  e.suggestion = Suggestion();
  e.forced = config_.variant == Variant::kConstrained && forced_[q.region];
  const std::size_t agent_choice = Responder(agent).Answer(q, AgentDrawSeed(agent, cursor_));
  if (agent_choice >= q.choices.size()) throw ProtocolError("agent returned an invalid choice");
  const bool agent_correct = agent_choice == q.answer_index;
  e.agent_choice = agent_choice;
  e.agent_correct = agent_correct;

  OutsourceResult res;
  res.agent_choice = agent_choice;
  if (config_.lock_in) {
    e.choice = agent_choice;
    e.correct = agent_correct;
    e.score_delta = config_.scoring.Delta(agent, agent_correct);
    score_ += *e.score_delta;
    if (config_.variant == Variant::kConstrained) forced_[q.region] = false;
    res.correct = agent_correct;
    res.score_delta = e.score_delta;
    res.new_score = score_;
    Append(std::move(e));
    Advance();
    res.finished = finished();
  } else {
    pending_ = Pending{agent, agent_choice, agent_correct};
    res.override_allowed = true;
    Append(std::move(e));
  }
  return res;
}

AnswerResult Session::FinalizeOverride(std::string_view question_id,
                                       std::size_t final_choice) {
  if (finished()) throw SessionDone("session " + id_ + " is finished");
  CheckCurrent(question_id);
  if (!pending_) throw ProtocolError("no outsourced answer is pending");
  const Question& q = current_question();
  if (final_choice >= q.choices.size()) throw IndexError("choice out of range");
  const Pending p = *pending_;
  Event e;
  e.type = Event::Type::kFinalize;
  e.index = cursor_;
  e.question_id = q.id;
  e.region = q.region;
  e.actor = p.agent;
  e.forced = config_.variant == Variant::kConstrained && forced_[q.region];
  e.agent_choice = p.agent_choice;
  e.agent_correct = p.agent_correct;
  e.choice = final_choice;
  e.correct = final_choice == q.answer_index;
  e.score_delta = config_.scoring.Delta(p.agent, *e.correct);

  posteriors_[q.region][Idx(p.agent)].ObserveInPlace(p.agent_correct);
  if (config_.update_self_on_override && final_choice != p.agent_choice) {
    posteriors_[q.region][Idx(Actor::kSelf)].ObserveInPlace(*e.correct);
  }
  if (config_.variant == Variant::kConstrained) forced_[q.region] = false;
  score_ += *e.score_delta;
  AnswerResult res{*e.correct, *e.score_delta, score_, false};
  Append(std::move(e));
  Advance();
  res.finished = finished();
  return res;
}

int Session::FoldScore(std::span<const Event> events, const ScoringTable& scoring) {
  int score = 0;
  for (const Event& e : events) {
    if (e.score_delta && e.correct) score += scoring.Delta(e.actor, *e.correct);
  }
  return score;
}

SessionSummary Session::Summary() const {
  SessionSummary s;
  s.regions.resize(config_.region_count());
  std::vector<std::array<std::size_t, kActors>> by_actor(config_.region_count());
  for (const Event& e : events_) {
    if (!e.score_delta) continue;  // pending outsource, not yet served
    auto& r = s.regions[e.region];
    ++r.served;
    if (e.correct && *e.correct) ++r.correct;
    ++by_actor[e.region][Idx(e.actor)];
  }
  for (std::size_t m = 0; m < s.regions.size(); ++m) {
    auto& r = s.regions[m];
    s.served += r.served;
    s.correct += r.correct;
    if (r.served > 0) {
      r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.served);
      for (std::size_t a = 0; a < kActors; ++a) {
        r.actor_rate[a] =
            static_cast<double>(by_actor[m][a]) / static_cast<double>(r.served);
      }
    }
  }
  if (s.served > 0) {
    s.accuracy = static_cast<double>(s.correct) / static_cast<double>(s.served);
  }
  s.score = score_;
  s.finished = finished();
  s.events = events_;
  return s;
}

}  // namespace orchestra::study
