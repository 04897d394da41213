#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orchestra/estimator.h"
#include "orchestra/random.h"

namespace orchestra::study {

enum class Variant { kBaseline, kOrchestration, kConstrained };
std::string_view ToString(Variant v);
Variant ParseVariant(std::string_view name);

// Who answers a question: the participant or one of the two agents.
enum class Actor { kSelf = 0, kHumanAgent = 1, kAiAgent = 2 };
inline constexpr std::size_t kActors = 3;
std::string_view ToString(Actor a);
Actor ParseActor(std::string_view name);

struct Question {
  std::string id;
  std::size_t region = 0;
  std::string prompt;
  std::vector<std::string> choices;
  std::size_t answer_index = 0;
  std::optional<std::size_t> recorded_human;
  std::optional<std::size_t> recorded_ai;
};

inline const std::vector<std::string>& DefaultRegions() {
  static const std::vector<std::string> regions = {
      "Elementary Mathematics", "High School Mathematics", "College Mathematics"};
  return regions;
}

class QuestionBank {
 public:
  QuestionBank() = default;
  QuestionBank(std::vector<Question> questions, std::vector<std::string> regions);

  // Line-delimited records {id, region, prompt, choices, answer_index,
  // recorded: {human?, ai?}}. `region` is a region name or index.
  static QuestionBank FromJsonl(std::string_view text,
                                std::vector<std::string> regions = DefaultRegions());
  static QuestionBank LoadFile(const std::string& path,
                               std::vector<std::string> regions = DefaultRegions());

  std::span<const Question> questions() const noexcept { return questions_; }
  const std::vector<std::string>& regions() const noexcept { return regions_; }
  std::size_t size() const noexcept { return questions_.size(); }
  const Question& at(std::size_t i) const { return questions_.at(i); }
  std::vector<std::size_t> IndicesForRegion(std::size_t region) const;

 private:
  std::vector<Question> questions_;
  std::vector<std::string> regions_;
};

struct ScoringTable {
  int self_correct = 10;
  int self_incorrect = 0;
  int human_correct = 3;
  int human_incorrect = -7;
  int ai_correct = 7;
  int ai_incorrect = -3;

  int Delta(Actor actor, bool correct) const;
  friend bool operator==(const ScoringTable&, const ScoringTable&) = default;
};

struct AgentModel {
  enum class Kind { kRecorded, kSimulated };
  // kRecorded uses the bank's recorded answer when present and falls back to
  // simulation otherwise.
  Kind kind = Kind::kRecorded;
  std::vector<double> accuracy;  // per region
};

struct RatePrior {
  double rate = 0.5;
  double strength = 4.0;
};

struct StudyConfig {
  Variant variant = Variant::kOrchestration;
  bool lock_in = true;
  std::size_t questions_per_region = 20;
  std::vector<std::string> regions = DefaultRegions();
  ScoringTable scoring;
  AgentModel human_agent;
  AgentModel ai_agent;
  std::vector<RatePrior> self_prior;   // per region
  std::vector<RatePrior> human_prior;  // per region
  std::vector<RatePrior> ai_prior;     // per region
  PointEstimator estimator = PointEstimator::kPosteriorMean;
  double min_answer_delay_seconds = 10.0;
  // Cost of each actor inside the suggestion utility, indexed by Actor.
  std::array<double, kActors> suggestion_costs = {1.0, 7.0, 3.0};
  bool update_self_on_override = false;

  // Pilot and LLM rates, priors and agent models for the given protocol.
  static StudyConfig Defaults(Variant variant, bool lock_in);

  std::size_t region_count() const noexcept { return regions.size(); }
  std::size_t total_questions() const noexcept {
    return questions_per_region * regions.size();
  }
  // Throws ConfigError.
  void Validate() const;
};

std::string StudyConfigToJson(const StudyConfig& config);
// Fields absent from `text` keep the defaults of the variant/lock_in named in
// `text` (or ORCHESTRATION with lock-in).
StudyConfig StudyConfigFromJson(std::string_view text);

// Produces an agent's choice for a question. Implementations must be
// deterministic in (question, draw_seed); a remote adapter would wrap a live
// model behind this interface.
class AgentResponder {
 public:
  virtual ~AgentResponder() = default;
  virtual std::size_t Answer(const Question& question,
                             std::uint64_t draw_seed) const = 0;
};

// Recorded answer when available (and the model allows it), otherwise
// correct with the model's per-region accuracy and a uniformly drawn wrong
// choice otherwise.
class ModelResponder final : public AgentResponder {
 public:
  ModelResponder(Actor actor, AgentModel model);
  std::size_t Answer(const Question& question,
                     std::uint64_t draw_seed) const override;

 private:
  Actor actor_;
  AgentModel model_;
};

enum class Action { kSelf, kOutsourceHuman, kOutsourceAi };
std::string_view ToString(Action a);

struct QuestionView {
  std::string question_id;
  std::size_t index = 0;  // 0-based position in the session
  std::size_t total = 0;
  std::size_t region = 0;
  std::string region_name;
  std::string prompt;
  std::vector<std::string> choices;
  std::optional<Actor> suggestion;
  std::optional<std::string> suggestion_text;
  bool forced_outsource = false;
  std::vector<Action> allowed_actions;
  int score = 0;
  // No-lock-in: an outsourced answer is waiting for accept/override.
  std::optional<Actor> pending_agent;
  std::optional<std::size_t> pending_agent_choice;
};

struct AnswerResult {
  bool correct = false;
  int score_delta = 0;
  int new_score = 0;
  bool finished = false;
};

struct OutsourceResult {
  std::size_t agent_choice = 0;
  std::optional<bool> correct;      // withheld without lock-in
  std::optional<int> score_delta;   // withheld without lock-in
  std::optional<int> new_score;
  bool override_allowed = false;
  bool finished = false;
};

// Append-only log record. State is a pure function of (config, seed, bank,
// events).
struct Event {
  enum class Type { kAnswer, kOutsource, kFinalize };
  Type type = Type::kAnswer;
  std::size_t index = 0;
  std::string question_id;
  std::size_t region = 0;
  Actor actor = Actor::kSelf;
  std::optional<Actor> suggestion;
  bool forced = false;
  std::optional<std::size_t> agent_choice;
  std::optional<bool> agent_correct;
  std::optional<std::size_t> choice;  // final answer (self or finalized)
  std::optional<bool> correct;        // correctness of the final answer
  std::optional<int> score_delta;     // present once the question is scored
  double elapsed_seconds = 0.0;
};

std::string EventToJson(const Event& e);
Event EventFromJson(std::string_view line);

struct RegionSummary {
  std::size_t served = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  // Fractions of served questions handled by each actor (sum to 1 when
  // served > 0).
  std::array<double, kActors> actor_rate{};
};

struct SessionSummary {
  std::vector<RegionSummary> regions;
  std::size_t served = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  int score = 0;
  bool finished = false;
  std::vector<Event> events;
};

using Clock = std::function<double()>;  // seconds, monotonic

// Seconds on std::chrono::steady_clock.
Clock SteadyClock();

class Session {
 public:
  // Selects questions_per_region questions per region (seeded) and shuffles
  // them. Throws BankError if the bank is too small.
  Session(std::string id, StudyConfig config, std::uint64_t seed,
          std::shared_ptr<const QuestionBank> bank, Clock clock);

  // Rebuilds a session by re-applying a log; throws ProtocolError if any
  // recorded outcome disagrees with the replay.
  static Session Replay(std::string id, StudyConfig config, std::uint64_t seed,
                        std::shared_ptr<const QuestionBank> bank,
                        std::span<const Event> events, Clock clock);

  void SetResponders(std::shared_ptr<const AgentResponder> human,
                     std::shared_ptr<const AgentResponder> ai);

  const std::string& id() const noexcept { return id_; }
  const StudyConfig& config() const noexcept { return config_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool finished() const noexcept { return cursor_ >= order_.size(); }
  std::size_t cursor() const noexcept { return cursor_; }
  int score() const noexcept { return score_; }
  std::span<const Event> events() const noexcept { return events_; }
  std::span<const std::size_t> order() const noexcept { return order_; }
  const QuestionBank& bank() const noexcept { return *bank_; }
  const Question& current_question() const;
  bool forced_outsource(std::size_t region) const { return forced_.at(region); }
  const CorrectnessPosterior& posterior(Actor actor, std::size_t region) const;

  // Throws SessionDone.
  QuestionView GetQuestion() const;

  AnswerResult AnswerSelf(std::string_view question_id, std::size_t choice,
                          double elapsed_seconds);
  OutsourceResult Outsource(std::string_view question_id, Actor agent);
  AnswerResult FinalizeOverride(std::string_view question_id,
                                std::size_t final_choice);

  SessionSummary Summary() const;

  // Empirical utility of each actor for the current question's region; SELF
  // is absent when it is not an allowed action.
  std::array<std::optional<double>, kActors> Utilities() const;

  // Replays the scoring table over the event log.
  static int FoldScore(std::span<const Event> events, const ScoringTable& scoring);

  // Called whenever an event is appended (persistence hook).
  std::function<void(const Event&)> on_event;

 private:
  struct Pending {
    Actor agent;
    std::size_t agent_choice;
    bool agent_correct;
  };

  void CheckCurrent(std::string_view question_id) const;
  std::vector<Action> AllowedActions() const;
  std::optional<Actor> Suggestion() const;
  void Append(Event e);
  void Advance();
  std::uint64_t AgentDrawSeed(Actor agent, std::size_t index) const;
  const AgentResponder& Responder(Actor agent) const;

  std::string id_;
  StudyConfig config_;
  std::uint64_t seed_;
  std::shared_ptr<const QuestionBank> bank_;
  Clock clock_;
  std::shared_ptr<const AgentResponder> human_;
  std::shared_ptr<const AgentResponder> ai_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  int score_ = 0;
  double issued_at_ = 0.0;
  std::vector<std::array<CorrectnessPosterior, kActors>> posteriors_;  // [region][actor]
  RegionPosterior region_posterior_;
  std::vector<bool> forced_;
  std::optional<Pending> pending_;
  std::vector<Event> events_;
  bool replaying_ = false;
};

std::string SuggestionText(Actor suggestion, bool forced,
                           std::string_view region_name);

}  // namespace orchestra::study
