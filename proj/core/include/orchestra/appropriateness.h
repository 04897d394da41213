#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "orchestra/grid.h"
#include "orchestra/orchestrator.h"

namespace orchestra {

// Ground-truth capabilities used for analysis. Every capability lies in
// (0, 1] so that ratios and dissimilarities stay finite.
struct TrueScenario {
  Grid<double> capabilities;       // K x M
  std::vector<double> region_probs;  // M

  TrueScenario(Grid<double> capabilities, std::vector<double> region_probs);

  std::size_t agent_count() const noexcept { return capabilities.rows(); }
  std::size_t region_count() const noexcept { return capabilities.cols(); }

  // Converts estimated capabilities (e.g. a BeliefState snapshot) into a
  // TrueScenario, flooring entries at kEstimateFloor.
  static TrueScenario FromEstimates(const BeliefState& beliefs,
                                    PointEstimator est);
};

inline constexpr double kEstimateFloor = 1e-6;

double LongRunningCorrectness(const TrueScenario& s, AgentIndex agent);
double CMax(const TrueScenario& s);

namespace crand {
struct PerStepClosedForm {};
struct FixedAgentExpectation {};
struct MonteCarlo {
  std::size_t runs = 50;
  std::uint64_t seed = 1;
  std::size_t stream_length = 1000;
};
}  // namespace crand

using CRandMode = std::variant<crand::PerStepClosedForm,
                               crand::FixedAgentExpectation, crand::MonteCarlo>;

// Expected correctness of a random orchestrator. The closed form averages
// agents per region; the fixed-agent form averages long-running correctness
// over a uniformly drawn agent; Monte Carlo simulates per-step random picks.
double CRand(const TrueScenario& s,
             CRandMode mode = crand::PerStepClosedForm{});

double Appropriateness(const TrueScenario& s);

// max_m exp|log(P(A_k|R_m) / P(A_h|R_m))|
double Dissimilarity(const TrueScenario& s, AgentIndex k, AgentIndex h);

// Minimum dissimilarity over pairs with different long-running correctness;
// 1 when every agent has the same long-running correctness.
double MinDissimilarity(const TrueScenario& s);

// Single region, K = ceil(1/delta) agents: agent 0 always correct, the rest
// correct with probability 1 - epsilon.
TrueScenario Theorem1Construct(double epsilon, double delta);

enum class DrawSampling {
  kIid,
  // Stratified uniforms (u_i = (pi(i) + U_i) / trials for a random
  // permutation pi): each draw is marginally uniform, and the agent counts
  // match trials / K to within one.
  kStratified,
};

struct Theorem1Report {
  double epsilon = 0.0;
  double delta = 0.0;
  std::size_t agents = 0;
  std::size_t trials = 0;
  double min_dissimilarity = 0.0;
  // Fraction of drawn fixed agents with C_max / C(A) >= min_dissimilarity.
  double empirical_prob_bound_holds = 0.0;
  // The same probability computed exactly by enumerating the K agents.
  double exact_prob_bound_holds = 0.0;
  double ratio_fixed_agent = 0.0;  // C_max / C_rand(fixed-agent expectation)
  double ratio_closed_form = 0.0;  // 1 / (1/K + (1-eps)(K-1)/K)
  double limit = 0.0;              // 1 / (1 - eps)
  double fixed_agent_ratio_limit_error = 0.0;
};

Theorem1Report Theorem1Verify(double epsilon, double delta, std::size_t trials,
                              std::uint64_t seed,
                              DrawSampling sampling = DrawSampling::kStratified);

}  // namespace orchestra
