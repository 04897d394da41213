#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orchestra/orchestrator.h"
#include "orchestra/scenario.h"

namespace orchestra {

struct Policy {
  enum class Kind { kOrchestrated, kRandom, kFixed, kOracle };

  Kind kind = Kind::kOrchestrated;
  AgentIndex fixed_agent = 0;

  static Policy Orchestrated() { return {Kind::kOrchestrated, 0}; }
  static Policy Random() { return {Kind::kRandom, 0}; }
  static Policy Fixed(AgentIndex k) { return {Kind::kFixed, k}; }
  static Policy Oracle() { return {Kind::kOracle, 0}; }

  // "orchestrated", "random", "oracle", "fixed:<k>" (0-based).
  static Policy Parse(std::string_view name);
  std::string ToString() const;
};

struct RunSummary {
  std::size_t steps = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::vector<std::size_t> region_served;
  std::vector<std::size_t> region_correct;
  std::vector<double> region_accuracy;  // 0 for regions never served
  double total_cost = 0.0;
};

struct RunResult {
  std::vector<Decision> trace;
  RunSummary summary;
  BeliefState final_beliefs;
};

// Runs `policy` over the stream generated from config.seed. Beliefs are
// tracked for every policy so that traces carry the orchestrator's utility
// estimates; only ORCHESTRATED acts on them. ORACLE picks the feasible agent
// with the highest true capability in the task's region. RANDOM draws
// uniformly among feasible agents. FIXED(k) throws NoFeasibleAgent whenever k
// is masked out.
RunResult Run(const ScenarioConfig& config, Policy policy);

// Same, over an explicit stream. Randomness for RANDOM comes from
// policy_seed.
RunResult RunOnStream(const ScenarioConfig& config, Policy policy,
                      std::span<const StreamItem> stream,
                      std::uint64_t policy_seed);

// Independent runs with seeds config.seed + r, r in [0, runs). Results are
// ordered by run index regardless of `jobs`.
std::vector<RunResult> RunMany(const ScenarioConfig& config, Policy policy,
                               std::size_t runs, std::size_t jobs = 1);

RunSummary Summarize(std::span<const Decision> trace, std::size_t regions);

// Accuracy over trace[begin, end).
double WindowAccuracy(std::span<const Decision> trace, std::size_t begin,
                      std::size_t end);

// Columns: step,region,feasible_bitmask,chosen,correct,cost_paid,utility_chosen
void WriteTraceCsv(std::ostream& out, std::span<const Decision> trace);

struct Figure2Row {
  Profile profile = Profile::kInvariant;
  double appropriateness_closed_form = 0.0;  // C_max / C_rand from the matrix
  double appropriateness_empirical = 0.0;    // ORACLE acc / RANDOM acc
  double appropriateness_with_cost = 0.0;    // ORCHESTRATED acc / RANDOM acc
  double oracle_accuracy = 0.0;
  double random_accuracy = 0.0;
  double orchestrated_accuracy = 0.0;
};

// Runs every builtin profile `runs` times (seeds seed + r) and averages the
// three policies' accuracies.
std::vector<Figure2Row> ReproduceFigure2(std::size_t runs = 50,
                                         std::uint64_t seed = 1,
                                         std::size_t jobs = 1);

// Columns: profile,appropriateness_closed_form,appropriateness_empirical,
// appropriateness_with_cost,oracle_accuracy,random_accuracy,orchestrated_accuracy
void WriteFigure2Csv(std::ostream& out, std::span<const Figure2Row> rows);

}  // namespace orchestra
