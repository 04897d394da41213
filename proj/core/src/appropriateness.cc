#include "orchestra/appropriateness.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "orchestra/error.h"
#include "orchestra/random.h"

namespace orchestra {

TrueScenario::TrueScenario(Grid<double> caps, std::vector<double> probs)
    : capabilities(std::move(caps)), region_probs(std::move(probs)) {
  if (capabilities.rows() == 0 || capabilities.cols() == 0) {
    throw ConfigError("capability matrix must be non-empty");
  }
  if (region_probs.size() != capabilities.cols()) {
    throw ConfigError("region_probs length must equal M");
  }
  for (std::size_t k = 0; k < capabilities.rows(); ++k) {
    for (double c : capabilities.row(k)) {
      if (!(c > 0.0 && c <= 1.0)) {
        throw ConfigError("capabilities must lie in (0, 1]");
      }
    }
  }
  double total = 0.0;
  for (double p : region_probs) {
    if (!(p >= 0.0)) throw ConfigError("region probabilities must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("region probabilities must sum to 1");
  }
}

TrueScenario TrueScenario::FromEstimates(const BeliefState& beliefs,
                                         PointEstimator est) {
  Grid<double> caps = beliefs.CorrectnessEstimates(est);
  for (std::size_t k = 0; k < caps.rows(); ++k) {
    for (double& c : caps.row(k)) c = std::clamp(c, kEstimateFloor, 1.0);
  }
  return TrueScenario(std::move(caps), beliefs.regions.Weights(est));
}

double LongRunningCorrectness(const TrueScenario& s, AgentIndex agent) {
  if (agent >= s.agent_count()) {
    throw IndexError("agent " + std::to_string(agent) + " out of range");
  }
  double total = 0.0;
  for (std::size_t m = 0; m < s.region_count(); ++m) {
    total += s.region_probs[m] * s.capabilities(agent, m);
  }
  return total;
}

double CMax(const TrueScenario& s) {
  double total = 0.0;
  for (std::size_t m = 0; m < s.region_count(); ++m) {
    double best = 0.0;
    for (std::size_t k = 0; k < s.agent_count(); ++k) {
      best = std::max(best, s.capabilities(k, m));
    }
    total += s.region_probs[m] * best;
  }
  return total;
}

namespace {

double MonteCarloCRand(const TrueScenario& s, const crand::MonteCarlo& mc) {
  if (mc.runs == 0 || mc.stream_length == 0) {
    throw ConfigError("Monte Carlo C_rand needs runs >= 1 and N >= 1");
  }
  double sum = 0.0;
  for (std::size_t run = 0; run < mc.runs; ++run) {
    Rng rng = MakeRng(mc.seed + run, "crand");
    std::discrete_distribution<std::size_t> region(s.region_probs.begin(),
                                                   s.region_probs.end());
    std::size_t correct = 0;
    for (std::size_t t = 0; t < mc.stream_length; ++t) {
      const std::size_t m = region(rng);
      const std::size_t k = UniformIndex(rng, s.agent_count());
      correct += Bernoulli(rng, s.capabilities(k, m)) ? 1 : 0;
    }
    sum += static_cast<double>(correct) / static_cast<double>(mc.stream_length);
  }
  return sum / static_cast<double>(mc.runs);
}

}  // namespace

double CRand(const TrueScenario& s, CRandMode mode) {
  const double agents = static_cast<double>(s.agent_count());
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, crand::PerStepClosedForm>) {
          double total = 0.0;
          for (std::size_t r = 0; r < s.region_count(); ++r) {
            double mean = 0.0;
            for (std::size_t k = 0; k < s.agent_count(); ++k) {
              mean += s.capabilities(k, r);
            }
            total += s.region_probs[r] * mean / agents;
          }
          return total;
        } else if constexpr (std::is_same_v<M, crand::FixedAgentExpectation>) {
          double total = 0.0;
          for (std::size_t k = 0; k < s.agent_count(); ++k) {
            total += LongRunningCorrectness(s, k);
          }
          return total / agents;
        } else {
          return MonteCarloCRand(s, m);
        }
      },
      mode);
}

double Appropriateness(const TrueScenario& s) {
  return CMax(s) / CRand(s, crand::PerStepClosedForm{});
}

double Dissimilarity(const TrueScenario& s, AgentIndex k, AgentIndex h) {
  if (k >= s.agent_count() || h >= s.agent_count()) {
    throw IndexError("agent index out of range");
  }
  double worst = 1.0;
  for (std::size_t m = 0; m < s.region_count(); ++m) {
    const double gap =
        std::exp(std::abs(std::log(s.capabilities(k, m) / s.capabilities(h, m))));
    worst = std::max(worst, gap);
  }
  return worst;
}

double MinDissimilarity(const TrueScenario& s) {
  std::vector<double> c(s.agent_count());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = LongRunningCorrectness(s, k);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < c.size(); ++k) {
    for (std::size_t h = k + 1; h < c.size(); ++h) {
      if (c[k] == c[h]) continue;
      best = std::min(best, Dissimilarity(s, k, h));
    }
  }
  return std::isinf(best) ? 1.0 : best;
}

TrueScenario Theorem1Construct(double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("epsilon and delta must lie in the open interval (0, 1)");
  }
  const auto agents = static_cast<std::size_t>(std::ceil(1.0 / delta));
  Grid<double> caps(agents, 1, 1.0 - epsilon);
  caps(0, 0) = 1.0;
  return TrueScenario(std::move(caps), {1.0});
}

Theorem1Report Theorem1Verify(double epsilon, double delta, std::size_t trials,
                              std::uint64_t seed, DrawSampling sampling) {
  if (trials == 0) throw ConfigError("theorem1 needs trials >= 1");
  const TrueScenario s = Theorem1Construct(epsilon, delta);
  const std::size_t agents = s.agent_count();

  Theorem1Report report;
  report.epsilon = epsilon;
  report.delta = delta;
  report.agents = agents;
  report.trials = trials;
  report.min_dissimilarity = MinDissimilarity(s);

  const double c_max = CMax(s);
  // Relative slack so that 1/(1-eps) computed two ways compares equal.
  constexpr double kTol = 1e-12;
  auto holds = [&](std::size_t k) {
    return c_max / LongRunningCorrectness(s, k) >=
           report.min_dissimilarity * (1.0 - kTol);
  };

  std::size_t exact_hits = 0;
  for (std::size_t k = 0; k < agents; ++k) exact_hits += holds(k) ? 1 : 0;
  report.exact_prob_bound_holds =
      static_cast<double>(exact_hits) / static_cast<double>(agents);

  Rng rng = MakeRng(seed, "theorem1.draws");
  std::vector<std::size_t> strata(trials);
  std::iota(strata.begin(), strata.end(), std::size_t{0});
  if (sampling == DrawSampling::kStratified) {
    std::shuffle(strata.begin(), strata.end(), rng);
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    double u = Uniform01(rng);
    if (sampling == DrawSampling::kStratified) {
      u = (static_cast<double>(strata[i]) + u) / static_cast<double>(trials);
    }
    const auto k = std::min(agents - 1,
                            static_cast<std::size_t>(u * static_cast<double>(agents)));
    hits += holds(k) ? 1 : 0;
  }
  report.empirical_prob_bound_holds =
      static_cast<double>(hits) / static_cast<double>(trials);

  const double kd = static_cast<double>(agents);
  report.ratio_fixed_agent = c_max / CRand(s, crand::FixedAgentExpectation{});
  report.ratio_closed_form = 1.0 / (1.0 / kd + (1.0 - epsilon) * (kd - 1.0) / kd);
  report.limit = 1.0 / (1.0 - epsilon);
  report.fixed_agent_ratio_limit_error =
      std::abs(report.ratio_fixed_agent - report.limit);
  return report;
}

}  // namespace orchestra
