#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orchestra/estimator.h"
#include "orchestra/grid.h"
#include "orchestra/orchestrator.h"

namespace orchestra {

struct TrueScenario;

// Declarative feasibility constraint, compiled into a FeasibilityMask.
struct ConstraintSpec {
  enum class Kind {
    // `agents` may never serve tasks from `regions`.
    kForbidRegions,
    // `agents` are unavailable on steps where (step + phase) % period <
    // unavailable_for (e.g. usage quotas).
    kPeriodicUnavailable,
    // Tasks from `regions` (high-risk) may only go to `agents` (humans).
    kHumanOnlyRegions,
  };

  Kind kind = Kind::kForbidRegions;
  std::vector<AgentIndex> agents;
  std::vector<RegionIndex> regions;
  std::size_t period = 1;
  std::size_t unavailable_for = 0;
  std::size_t phase = 0;
};

FeasibilityMask CompileConstraints(std::span<const ConstraintSpec> specs);

struct BetaPrior {
  double alpha_incorrect = kDefaultPseudoCount;
  double alpha_correct = kDefaultPseudoCount;
  friend bool operator==(const BetaPrior&, const BetaPrior&) = default;
};

// A complete orchestration problem.
struct ScenarioConfig {
  std::string name = "custom";
  std::vector<std::string> agent_ids;  // empty: A1..AK
  Grid<double> capabilities;           // K x M, true P(correct | region)
  Grid<double> cost_means;             // K x M, strictly positive
  double cost_stddev = 0.0;
  std::vector<double> region_probs;    // M, sums to 1
  std::size_t stream_length = 1000;
  std::uint64_t seed = 1;
  std::vector<double> region_alphas;   // M
  Grid<BetaPrior> correctness_priors;  // K x M
  PointEstimator estimator = PointEstimator::kMap;
  Feedback feedback = Feedback::kChosen;
  std::vector<ConstraintSpec> constraints;

  std::size_t agent_count() const noexcept { return capabilities.rows(); }
  std::size_t region_count() const noexcept { return capabilities.cols(); }

  // Throws ConfigError describing the first violated invariant.
  void Validate() const;

  AgentSet Agents() const;
  BeliefState InitialBeliefs() const;
  CostTable Costs() const;
  FeasibilityMask Mask() const;
  TrueScenario Truth() const;

  // Fills priors with the default pseudo-count (2) and unit costs where
  // they are still empty.
  void FillDefaults();
};

enum class Profile {
  kInvariant,
  kDominant,
  kDominantMisalignedCost,
  kVarying,
  kVaryingMisalignedCost,
};

inline constexpr Profile kAllProfiles[] = {
    Profile::kInvariant, Profile::kDominant, Profile::kDominantMisalignedCost,
    Profile::kVarying, Profile::kVaryingMisalignedCost};

std::string_view ToString(Profile profile);
std::optional<Profile> ParseProfile(std::string_view name);

// The synthetic K=4, M=3 problems with uniform regions, N=1000, cost noise 2.
// Aligned-cost profiles use unit costs.
ScenarioConfig BuiltinScenario(Profile profile);

// Region ~ region_probs, outcome_k ~ Bernoulli(capabilities[k][r]),
// cost_k ~ Normal(cost_means[k][r], cost_stddev) truncated below at 0.01.
std::vector<StreamItem> GenerateStream(const ScenarioConfig& config,
                                       std::uint64_t seed);

inline constexpr double kMinRealizedCost = 0.01;

// JSON-compatible serialization; see README for the schema.
std::string ScenarioToJson(const ScenarioConfig& config);
ScenarioConfig ScenarioFromJson(std::string_view text);
// Accepts a builtin profile name, an inline JSON object or a path to a JSON
// file.
ScenarioConfig ResolveScenario(std::string_view name_or_path);

}  // namespace orchestra
