#include "orchestra/simulation.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "orchestra/appropriateness.h"
#include "orchestra/error.h"
#include "orchestra/random.h"

namespace orchestra {

Policy Policy::Parse(std::string_view name) {
  if (name == "orchestrated") return Orchestrated();
  if (name == "random") return Random();
  if (name == "oracle") return Oracle();
  if (name.starts_with("fixed:")) {
    const std::string digits(name.substr(6));
    if (!digits.empty() &&
        std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return Fixed(std::stoul(digits));
    }
  }
  throw ConfigError("unknown policy '" + std::string(name) +
                    "' (expected orchestrated, random, oracle or fixed:<k>)");
}

std::string Policy::ToString() const {
  switch (kind) {
    case Kind::kOrchestrated: return "orchestrated";
    case Kind::kRandom: return "random";
    case Kind::kOracle: return "oracle";
    case Kind::kFixed: return "fixed:" + std::to_string(fixed_agent);
  }
  return "unknown";
}

RunSummary Summarize(std::span<const Decision> trace, std::size_t regions) {
  RunSummary s;
  s.steps = trace.size();
  s.region_served.assign(regions, 0);
  s.region_correct.assign(regions, 0);
  s.region_accuracy.assign(regions, 0.0);
  for (const Decision& d : trace) {
    s.correct += d.correct ? 1 : 0;
    s.total_cost += d.cost_paid;
    if (d.region < regions) {
      ++s.region_served[d.region];
      s.region_correct[d.region] += d.correct ? 1 : 0;
    }
  }
  s.accuracy = s.steps == 0 ? 0.0 : static_cast<double>(s.correct) / static_cast<double>(s.steps);
  for (std::size_t m = 0; m < regions; ++m) {
    if (s.region_served[m] > 0) {
      s.region_accuracy[m] = static_cast<double>(s.region_correct[m]) /
                             static_cast<double>(s.region_served[m]);
    }
  }
  return s;
}

double WindowAccuracy(std::span<const Decision> trace, std::size_t begin,
                      std::size_t end) {
  end = std::min(end, trace.size());
  if (begin >= end) return 0.0;
  std::size_t correct = 0;
  for (std::size_t t = begin; t < end; ++t) correct += trace[t].correct ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(end - begin);
}

RunResult RunOnStream(const ScenarioConfig& config, Policy policy,
                      std::span<const StreamItem> stream,
                      std::uint64_t policy_seed) {
  config.Validate();
  const std::size_t agents = config.agent_count();
  if (policy.kind == Policy::Kind::kFixed && policy.fixed_agent >= agents) {
    throw IndexError("fixed agent " + std::to_string(policy.fixed_agent) + " out of range");
  }
  BeliefState beliefs = config.InitialBeliefs();
  const CostTable costs = config.Costs();
  const FeasibilityMask mask = config.Mask();
  Rng rng = MakeRng(policy_seed, "policy.random");

  std::vector<Decision> trace;
  trace.reserve(stream.size());
  for (const StreamItem& item : stream) {
    const TaskContext task{item.step, item.region};
    Selection sel = SelectAgent(beliefs, costs, mask, task, config.estimator);
    switch (policy.kind) {
      case Policy::Kind::kOrchestrated:
        break;
      case Policy::Kind::kRandom: {
        std::vector<AgentIndex> feasible;
        for (AgentIndex k = 0; k < agents; ++k) {
          if (sel.feasible[k]) feasible.push_back(k);
        }
        sel.chosen = feasible[UniformIndex(rng, feasible.size())];
        break;
      }
      case Policy::Kind::kFixed:
        if (!sel.feasible[policy.fixed_agent]) {
          throw NoFeasibleAgent("fixed agent " + std::to_string(policy.fixed_agent) +
                                " infeasible at step " + std::to_string(item.step));
        }
        sel.chosen = policy.fixed_agent;
        break;
      case Policy::Kind::kOracle: {
        std::optional<AgentIndex> best;
        for (AgentIndex k = 0; k < agents; ++k) {
          if (!sel.feasible[k]) continue;
          if (!best || config.capabilities(k, item.region) >
                           config.capabilities(*best, item.region)) {
            best = k;
          }
        }
        sel.chosen = *best;
        break;
      }
    }
    trace.push_back(Commit(beliefs, item, std::move(sel), config.feedback));
  }
  RunSummary summary = Summarize(trace, config.region_count());
  return RunResult{std::move(trace), std::move(summary), std::move(beliefs)};
}

RunResult Run(const ScenarioConfig& config, Policy policy) {
  const auto stream = GenerateStream(config, config.seed);
  return RunOnStream(config, policy, stream, config.seed);
}

std::vector<RunResult> RunMany(const ScenarioConfig& config, Policy policy,
                               std::size_t runs, std::size_t jobs) {
  std::vector<std::optional<RunResult>> slots(runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t r = next++; r < runs; r = next++) {
      try {
        ScenarioConfig c = config;
        c.seed = config.seed + r;
        slots[r] = Run(c, policy);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(runs, 1));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<RunResult> out;
  out.reserve(runs);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

void WriteTraceCsv(std::ostream& out, std::span<const Decision> trace) {
  out << "step,region,feasible_bitmask,chosen,correct,cost_paid,utility_chosen\n";
  for (const Decision& d : trace) {
    out << fmt::format("{},{},{},{},{},{:.6f},{:.9g}\n", d.step, d.region,
                       d.feasible_bitmask(), d.chosen, d.correct ? 1 : 0,
                       d.cost_paid, d.utility_chosen());
  }
}

namespace {

double MeanAccuracy(const std::vector<RunResult>& results) {
  double total = 0.0;
  for (const auto& r : results) total += r.summary.accuracy;
  return results.empty() ? 0.0 : total / static_cast<double>(results.size());
}

}  // namespace

std::vector<Figure2Row> ReproduceFigure2(std::size_t runs, std::uint64_t seed,
                                         std::size_t jobs) {
  if (runs == 0) throw ConfigError("figure2 needs runs >= 1");
  std::vector<Figure2Row> rows;
  for (Profile profile : kAllProfiles) {
    ScenarioConfig config = BuiltinScenario(profile);
    config.seed = seed;
    Figure2Row row;
    row.profile = profile;
    row.appropriateness_closed_form = Appropriateness(config.Truth());
    row.oracle_accuracy = MeanAccuracy(RunMany(config, Policy::Oracle(), runs, jobs));
    row.random_accuracy = MeanAccuracy(RunMany(config, Policy::Random(), runs, jobs));
    row.orchestrated_accuracy =
        MeanAccuracy(RunMany(config, Policy::Orchestrated(), runs, jobs));
    row.appropriateness_empirical = row.oracle_accuracy / row.random_accuracy;
    row.appropriateness_with_cost = row.orchestrated_accuracy / row.random_accuracy;
    rows.push_back(row);
  }
  return rows;
}

void WriteFigure2Csv(std::ostream& out, std::span<const Figure2Row> rows) {
  out << "profile,appropriateness_closed_form,appropriateness_empirical,"
         "appropriateness_with_cost,oracle_accuracy,random_accuracy,"
         "orchestrated_accuracy\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n",
                       ToString(r.profile), r.appropriateness_closed_form,
                       r.appropriateness_empirical, r.appropriateness_with_cost,
                       r.oracle_accuracy, r.random_accuracy,
                       r.orchestrated_accuracy);
  }
}

}  // namespace orchestra
