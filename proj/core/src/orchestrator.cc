#include "orchestra/orchestrator.h"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "orchestra/error.h"

namespace orchestra {

AgentSet::AgentSet(std::vector<std::string> ids) : ids_(std::move(ids)) {
  if (ids_.empty()) throw ConfigError("agent set must not be empty");
  std::unordered_set<std::string> seen;
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) {
      throw ConfigError("duplicate agent id '" + id + "'");
    }
  }
}

AgentSet AgentSet::Numbered(std::size_t count) {
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < count; ++k) ids.push_back("A" + std::to_string(k + 1));
  return AgentSet(std::move(ids));
}

std::optional<AgentIndex> AgentSet::IndexOf(std::string_view id) const {
  auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) return std::nullopt;
  return static_cast<AgentIndex>(it - ids_.begin());
}

BeliefState::BeliefState(RegionPosterior region_posterior,
                         Grid<CorrectnessPosterior> grid)
    : regions(std::move(region_posterior)), correctness(std::move(grid)) {
  if (correctness.rows() == 0 || correctness.cols() != regions.size()) {
    throw ConfigError("correctness grid must be K x M with K >= 1");
  }
}

BeliefState BeliefState::Uniform(std::size_t agents, std::size_t regions,
                                 double alpha) {
  return BeliefState(RegionPosterior::Uniform(regions, alpha),
                     Grid<CorrectnessPosterior>(
                         agents, regions, CorrectnessPosterior(alpha, alpha)));
}

Grid<double> BeliefState::CorrectnessEstimates(PointEstimator est) const {
  Grid<double> out(correctness.rows(), correctness.cols());
  for (std::size_t k = 0; k < out.rows(); ++k) {
    for (std::size_t m = 0; m < out.cols(); ++m) {
      out(k, m) = correctness(k, m).Estimate(est);
    }
  }
  return out;
}

CostTable::CostTable(Grid<double> gamma) : gamma_(std::move(gamma)) {
  for (std::size_t k = 0; k < gamma_.rows(); ++k) {
    for (double g : gamma_.row(k)) {
      if (!(g > 0.0)) throw InvalidCost("every cost must be > 0");
    }
  }
}

CostTable CostTable::Uniform(std::size_t agents, std::size_t regions,
                             double cost) {
  return CostTable(Grid<double>(agents, regions, cost));
}

CostTable CostTable::Scaled(double factor) const {
  Grid<double> g = gamma_;
  for (std::size_t k = 0; k < g.rows(); ++k) {
    for (double& x : g.row(k)) x *= factor;
  }
  return CostTable(std::move(g));
}

FeasibilityMask FeasibilityMask::And(FeasibilityMask other) const {
  if (unconstrained()) return other;
  if (other.unconstrained()) return *this;
  return FeasibilityMask(
      [a = predicate_, b = std::move(other.predicate_)](
          const TaskContext& task, AgentIndex k) {
        return a(task, k) && b(task, k);
      });
}

std::uint64_t Decision::feasible_bitmask() const {
  std::uint64_t bits = 0;
  for (std::size_t k = 0; k < feasible.size() && k < 64; ++k) {
    if (feasible[k]) bits |= std::uint64_t{1} << k;
  }
  return bits;
}

std::string_view ToString(Feedback feedback) {
  return feedback == Feedback::kChosen ? "chosen" : "full";
}

Feedback ParseFeedback(std::string_view name) {
  if (name == "chosen") return Feedback::kChosen;
  if (name == "full") return Feedback::kFull;
  throw ConfigError("unknown feedback mode '" + std::string(name) + "'");
}

namespace {

void CheckIndices(const BeliefState& beliefs, AgentIndex agent,
                  RegionIndex region) {
  if (agent >= beliefs.agent_count()) {
    throw IndexError("agent " + std::to_string(agent) + " out of range");
  }
  if (region >= beliefs.region_count()) {
    throw IndexError("region " + std::to_string(region) + " out of range");
  }
}

double Onward(const BeliefState& beliefs, std::span<const double> weights,
              AgentIndex agent, RegionIndex region, PointEstimator est) {
  double future = 0.0;
  double current = 0.0;
  for (std::size_t m = 0; m < weights.size(); ++m) {
    const double c = beliefs.correctness(agent, m).Estimate(est);
    future += weights[m] * c;
    if (m == region) current = c;
  }
  return current * future;
}

}  // namespace

double OnwardCorrectness(const BeliefState& beliefs, AgentIndex agent,
                         RegionIndex region, PointEstimator est) {
  CheckIndices(beliefs, agent, region);
  const auto weights = beliefs.regions.Weights(est);
  return Onward(beliefs, weights, agent, region, est);
}

double TotalUtility(double onward, double cost) {
  if (!(cost > 0.0)) {
    throw InvalidCost("cost must be > 0, got " + std::to_string(cost));
  }
  return onward / cost;
}

Selection SelectAgent(const BeliefState& beliefs, const CostTable& costs,
                      const FeasibilityMask& mask, const TaskContext& task,
                      PointEstimator est) {
  const std::size_t agents = beliefs.agent_count();
  CheckIndices(beliefs, 0, task.region);
  if (costs.grid().rows() != agents ||
      costs.grid().cols() != beliefs.region_count()) {
    throw ConfigError("cost table shape does not match beliefs");
  }
  const auto weights = beliefs.regions.Weights(est);

  Selection sel;
  sel.feasible.assign(agents, false);
  sel.utilities.assign(agents, std::nullopt);
  std::optional<double> best;
  for (AgentIndex k = 0; k < agents; ++k) {
    if (!mask(task, k)) continue;
    sel.feasible[k] = true;
    const double u = TotalUtility(Onward(beliefs, weights, k, task.region, est),
                                  costs(k, task.region));
    sel.utilities[k] = u;
    if (!best || u > *best) {
      best = u;
      sel.chosen = k;
    }
  }
  if (!best) {
    throw NoFeasibleAgent("no feasible agent at step " +
                          std::to_string(task.step));
  }
  return sel;
}

Decision Commit(BeliefState& beliefs, const StreamItem& item,
                Selection selection, Feedback feedback) {
  const AgentIndex k = selection.chosen;
  if (k >= item.outcomes.size() || k >= item.realized_costs.size()) {
    throw IndexError("stream item has no outcome for agent " +
                     std::to_string(k));
  }
  Decision d;
  d.step = item.step;
  d.region = item.region;
  d.chosen = k;
  d.correct = item.outcomes[k];
  d.cost_paid = item.realized_costs[k];
  d.feasible = std::move(selection.feasible);
  d.utilities = std::move(selection.utilities);

  beliefs.regions.ObserveInPlace(item.region);
  if (feedback == Feedback::kFull) {
    for (AgentIndex a = 0; a < beliefs.agent_count(); ++a) {
      beliefs.correctness(a, item.region).ObserveInPlace(item.outcomes.at(a));
    }
  } else {
    beliefs.correctness(k, item.region).ObserveInPlace(d.correct);
  }
  return d;
}

Decision Step(BeliefState& beliefs, const CostTable& costs,
              const FeasibilityMask& mask, const StreamItem& item,
              PointEstimator est, Feedback feedback) {
  Selection sel = SelectAgent(beliefs, costs, mask,
                              TaskContext{item.step, item.region}, est);
  return Commit(beliefs, item, std::move(sel), feedback);
}

}  // namespace orchestra
