#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "orchestra/estimator.h"
#include "orchestra/random.h"

namespace orchestra::rogers {

enum class Variant { kBaseline, kOrchestrated };
// How the orchestrated variant values options: exact previous-step
// adaptations, or Beta-Binomial estimates per (epoch, strategy class).
enum class Tracker { kExact, kPosterior };

std::string_view ToString(Variant v);
Variant ParseVariant(std::string_view name);
std::string_view ToString(Tracker t);
Tracker ParseTracker(std::string_view name);

inline constexpr std::size_t kAiSystems = 3;

struct Config {
  std::size_t population = 1000;
  std::size_t steps = 4000;
  double world_change_prob = 0.0001;
  double survival_adapted = 0.93;
  double survival_unadapted = 0.85;
  double individual_cost = 0.05;
  double individual_base_success = 0.66;
  double penalty_mean = 1.0;
  double penalty_stddev = 0.1;
  double penalty_min = 0.5;
  double penalty_max = 1.5;
  double mutation_rate = 0.005;
  double bias_noise_stddev = 0.1;
  std::size_t neighborhood_radius = 5;
  double ai_bias_init = 1.0;
  Variant variant = Variant::kBaseline;
  Tracker tracker = Tracker::kExact;
  std::uint64_t seed = 1;

  // Throws ConfigError.
  void Validate() const;
};

struct Strategy {
  enum class Kind { kIndividual, kSocialHuman, kSocialAi };
  Kind kind = Kind::kIndividual;
  // Neighbor index for kSocialHuman, AI system index (0=I, 1=II, 2=III) for
  // kSocialAi; unused for kIndividual.
  std::size_t source = 0;

  friend bool operator==(const Strategy&, const Strategy&) = default;
};

struct HumanAgent {
  double adaptation = 0.0;
  double penalty = 1.0;  // individual-learning multiplier
  double ai_bias = 1.0;
  Strategy last_strategy;
};

// I learns from last step's social learners, II from individual learners,
// III from everyone.
struct AiSystem {
  double adaptation = 0.0;
};
using AiSystems = std::array<AiSystem, kAiSystems>;

struct World {
  std::uint64_t epoch = 0;
  std::size_t unavailable_ai = 0;
};

// With probability change_prob, advances the epoch and redraws the
// unavailable AI. Returns whether the world changed; resetting adaptations
// is the caller's job.
bool StepWorld(World& world, double change_prob, Rng& rng);

// True if j lies in [i - radius, i + radius] (mod n) and j != i.
bool InNeighborhood(std::size_t i, std::size_t j, std::size_t n,
                    std::size_t radius);

// Per-(epoch, strategy class) Beta-Binomial estimates used by the posterior
// tracker. Classes: individual, social-human, AI I, AI II, AI III.
class StrategyTracker {
 public:
  static constexpr std::size_t kClasses = 2 + kAiSystems;

  void Reset();
  void Observe(const Strategy& s, bool success);
  double Estimate(const Strategy& s) const;

  static std::size_t ClassOf(const Strategy& s);

 private:
  std::array<CorrectnessPosterior, kClasses> posteriors_{};
};

// Option value used by the orchestrated variant (exact tracker).
double IndividualValue(double penalty, const Config& cfg);

Strategy ChooseStrategy(std::size_t agent, std::span<const HumanAgent> previous,
                        const AiSystems& ais, const World& world,
                        const Config& cfg, const StrategyTracker* tracker,
                        Rng& rng);

// Returns the agent after learning with `s`. Individual learning succeeds
// (adaptation 1) with probability min(1, base * penalty), else adaptation 0.
// Social learning copies the source's adaptation exactly: a neighbor's
// previous-step value or an AI's current value.
HumanAgent ApplyLearning(HumanAgent agent, const Strategy& s,
                         std::span<const HumanAgent> previous,
                         const AiSystems& ais, const Config& cfg, Rng& rng);

// Recomputes the AI systems from this step's learners; an empty group keeps
// its previous value.
AiSystems UpdateAiSystems(const AiSystems& previous,
                          std::span<const HumanAgent> learners,
                          std::span<const Strategy> strategies);

double SurvivalProbability(double adaptation, bool learned_individually,
                           const Config& cfg);

// Kills agents per SurvivalProbability and refills the dead slots from
// uniformly drawn survivors: ai_bias inherited (mutated with probability
// mutation_rate), penalty redrawn, adaptation 0. Throws ExtinctionError when
// nobody survives. Returns the number of deaths.
std::size_t SurviveAndReplenish(std::vector<HumanAgent>& population,
                                std::span<const Strategy> strategies,
                                const Config& cfg, Rng& rng);

double DrawPenalty(const Config& cfg, Rng& rng);

struct StepStats {
  std::size_t step = 0;
  double mean_adaptation = 0.0;          // after survival and replenishment
  double mean_adaptation_learned = 0.0;  // after learning, before survival
  double frac_individual = 0.0;
  double frac_social_human = 0.0;
  double frac_social_ai = 0.0;
  std::uint64_t epoch = 0;
};

class Simulation {
 public:
  explicit Simulation(Config cfg);

  // Advances one step: world change, learning, AI update, survival.
  const StepStats& Step();

  const Config& config() const noexcept { return cfg_; }
  std::span<const HumanAgent> population() const noexcept { return population_; }
  // Strategies chosen during the most recent step.
  std::span<const Strategy> strategies() const noexcept { return strategies_; }
  const AiSystems& ai_systems() const noexcept { return ais_; }
  const World& world() const noexcept { return world_; }
  std::size_t steps_taken() const noexcept { return steps_taken_; }
  const StepStats& last() const noexcept { return last_; }

 private:
  Config cfg_;
  std::vector<HumanAgent> population_;
  std::vector<HumanAgent> previous_;
  std::vector<Strategy> strategies_;
  AiSystems ais_{};
  World world_;
  StrategyTracker tracker_;
  Rng world_rng_;
  Rng choice_rng_;
  Rng learning_rng_;
  Rng survival_rng_;
  std::size_t steps_taken_ = 0;
  StepStats last_;
};

struct Result {
  std::vector<StepStats> series;
  double equilibrium = 0.0;  // mean of mean_adaptation over the final 10%
};

Result Run(const Config& cfg);

// Columns: step,mean_adaptation,frac_individual,frac_social_human,frac_social_ai,epoch
void WriteSeriesCsv(std::ostream& out, std::span<const StepStats> series);

}  // namespace orchestra::rogers
