#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orchestra/estimator.h"
#include "orchestra/grid.h"

namespace orchestra {

using AgentIndex = std::size_t;
using RegionIndex = std::size_t;

// Ordered, duplicate-free set of agent identifiers. Index k is stable for the
// lifetime of a run.
class AgentSet {
 public:
  explicit AgentSet(std::vector<std::string> ids);
  static AgentSet Numbered(std::size_t count);  // "A1", "A2", ...

  std::size_t size() const noexcept { return ids_.size(); }
  const std::string& id(AgentIndex k) const { return ids_.at(k); }
  std::span<const std::string> ids() const noexcept { return ids_; }
  std::optional<AgentIndex> IndexOf(std::string_view id) const;

 private:
  std::vector<std::string> ids_;
};

// Everything the orchestrator believes: the region posterior w and the
// K x M grid of per-agent-per-region correctness posteriors.
struct BeliefState {
  RegionPosterior regions;
  Grid<CorrectnessPosterior> correctness;

  BeliefState(RegionPosterior regions, Grid<CorrectnessPosterior> correctness);
  static BeliefState Uniform(std::size_t agents, std::size_t regions,
                             double alpha = kDefaultPseudoCount);

  std::size_t agent_count() const noexcept { return correctness.rows(); }
  std::size_t region_count() const noexcept { return regions.size(); }

  // K x M grid of point estimates.
  Grid<double> CorrectnessEstimates(PointEstimator est) const;

  friend bool operator==(const BeliefState&, const BeliefState&) = default;
};

// Offline per-agent-per-region mean cost; every entry strictly positive.
class CostTable {
 public:
  explicit CostTable(Grid<double> gamma);
  static CostTable Uniform(std::size_t agents, std::size_t regions,
                           double cost = 1.0);

  double operator()(AgentIndex k, RegionIndex m) const { return gamma_(k, m); }
  const Grid<double>& grid() const noexcept { return gamma_; }
  CostTable Scaled(double factor) const;

 private:
  Grid<double> gamma_;
};

struct TaskContext {
  std::size_t step = 0;
  RegionIndex region = 0;
};

// Per-step Boolean mask over agents. Default-constructed masks admit every
// agent.
class FeasibilityMask {
 public:
  using Predicate = std::function<bool(const TaskContext&, AgentIndex)>;

  FeasibilityMask() = default;
  explicit FeasibilityMask(Predicate predicate)
      : predicate_(std::move(predicate)) {}

  bool operator()(const TaskContext& task, AgentIndex agent) const {
    return !predicate_ || predicate_(task, agent);
  }
  bool unconstrained() const noexcept { return !predicate_; }

  // Conjunction: feasible only if both masks agree.
  FeasibilityMask And(FeasibilityMask other) const;

 private:
  Predicate predicate_;
};

// One element of the task stream. outcomes[k] says whether agent k would
// answer this item correctly; realized_costs[k] is what k would charge.
struct StreamItem {
  std::size_t step = 0;
  RegionIndex region = 0;
  std::vector<bool> outcomes;
  std::vector<double> realized_costs;
};

struct Selection {
  std::vector<bool> feasible;
  std::vector<std::optional<double>> utilities;  // empty for infeasible
  AgentIndex chosen = 0;
};

struct Decision {
  std::size_t step = 0;
  RegionIndex region = 0;
  std::vector<bool> feasible;
  std::vector<std::optional<double>> utilities;
  AgentIndex chosen = 0;
  bool correct = false;
  double cost_paid = 0.0;

  double utility_chosen() const { return utilities.at(chosen).value_or(0.0); }
  std::uint64_t feasible_bitmask() const;
};

enum class Feedback { kChosen, kFull };

std::string_view ToString(Feedback feedback);
Feedback ParseFeedback(std::string_view name);

// c_{k,r} * sum_m w_m c_{k,m} from the current point estimates.
double OnwardCorrectness(const BeliefState& beliefs, AgentIndex agent,
                         RegionIndex region, PointEstimator est);

// onward / cost; throws InvalidCost when cost <= 0.
double TotalUtility(double onward, double cost);

// Feasible agent with the highest total utility; ties go to the lowest index.
// Throws NoFeasibleAgent when the mask rejects every agent.
Selection SelectAgent(const BeliefState& beliefs, const CostTable& costs,
                      const FeasibilityMask& mask, const TaskContext& task,
                      PointEstimator est);

// Records the outcome of `selection.chosen` on `item` and updates beliefs:
// the region count for item.region, plus the chosen agent's correctness
// posterior (or every agent's, under Feedback::kFull).
Decision Commit(BeliefState& beliefs, const StreamItem& item,
                Selection selection, Feedback feedback = Feedback::kChosen);

// SelectAgent followed by Commit. `beliefs` is updated in place.
Decision Step(BeliefState& beliefs, const CostTable& costs,
              const FeasibilityMask& mask, const StreamItem& item,
              PointEstimator est, Feedback feedback = Feedback::kChosen);

}  // namespace orchestra
