#include "orchestra/rogers.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "orchestra/error.h"

namespace orchestra::rogers {

std::string_view ToString(Variant v) {
  return v == Variant::kBaseline ? "baseline" : "orchestrated";
}

Variant ParseVariant(std::string_view name) {
  if (name == "baseline") return Variant::kBaseline;
  if (name == "orchestrated") return Variant::kOrchestrated;
  throw ConfigError("unknown rogers variant '" + std::string(name) + "'");
}

std::string_view ToString(Tracker t) {
  return t == Tracker::kExact ? "exact" : "posterior";
}

Tracker ParseTracker(std::string_view name) {
  if (name == "exact") return Tracker::kExact;
  if (name == "posterior") return Tracker::kPosterior;
  throw ConfigError("unknown tracker '" + std::string(name) + "'");
}

void Config::Validate() const {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError(std::string(what) + " must lie in [0, 1]");
    }
  };
  prob(world_change_prob, "world_change_prob");
  prob(survival_adapted, "survival_adapted");
  prob(survival_unadapted, "survival_unadapted");
  prob(individual_cost, "individual_cost");
  prob(individual_base_success, "individual_base_success");
  prob(mutation_rate, "mutation_rate");
  if (population < 2 * neighborhood_radius + 1) {
    throw ConfigError("population must fit the neighborhood (>= 2 * radius + 1)");
  }
  if (neighborhood_radius == 0) throw ConfigError("neighborhood_radius must be >= 1");
  if (steps == 0) throw ConfigError("steps must be >= 1");
  if (!(penalty_stddev >= 0.0) || !(bias_noise_stddev >= 0.0)) {
    throw ConfigError("standard deviations must be >= 0");
  }
  if (!(penalty_min <= penalty_max)) throw ConfigError("penalty_min must be <= penalty_max");
  if (!(ai_bias_init >= 0.0)) throw ConfigError("ai_bias_init must be >= 0");
}

bool StepWorld(World& world, double change_prob, Rng& rng) {
  if (!Bernoulli(rng, change_prob)) return false;
  ++world.epoch;
  world.unavailable_ai = UniformIndex(rng, kAiSystems);
  return true;
}

bool InNeighborhood(std::size_t i, std::size_t j, std::size_t n,
                    std::size_t radius) {
  if (i == j || i >= n || j >= n) return false;
  const std::size_t forward = (j + n - i) % n;
  return forward <= radius || n - forward <= radius;
}

void StrategyTracker::Reset() { posteriors_.fill(CorrectnessPosterior()); }

std::size_t StrategyTracker::ClassOf(const Strategy& s) {
  switch (s.kind) {
    case Strategy::Kind::kIndividual: return 0;
    case Strategy::Kind::kSocialHuman: return 1;
    case Strategy::Kind::kSocialAi: return 2 + s.source;
  }
  return 0;
}

void StrategyTracker::Observe(const Strategy& s, bool success) {
  posteriors_[ClassOf(s)].ObserveInPlace(success);
}

double StrategyTracker::Estimate(const Strategy& s) const {
  return posteriors_[ClassOf(s)].Estimate(PointEstimator::kPosteriorMean);
}

double IndividualValue(double penalty, const Config& cfg) {
  return std::min(1.0, cfg.individual_base_success * penalty) - cfg.individual_cost;
}

namespace {

// Offsets -r..-1, 1..r around agent i.
std::size_t NeighborAt(std::size_t i, std::size_t slot, std::size_t n,
                       std::size_t radius) {
  const std::size_t offset = slot < radius ? radius - slot : 0;
  if (slot < radius) return (i + n - offset) % n;
  return (i + (slot - radius) + 1) % n;
}

std::size_t RandomAvailableAi(const World& world, Rng& rng) {
  std::size_t pick = UniformIndex(rng, kAiSystems - 1);
  if (pick >= world.unavailable_ai) ++pick;
  return pick;
}

Strategy ChooseBaseline(std::size_t agent, std::span<const HumanAgent> previous,
                        const World& world, const Config& cfg, Rng& rng) {
  const std::size_t n = previous.size();
  if (UniformIndex(rng, 3) == 0) return {Strategy::Kind::kIndividual, 0};
  const double bias = previous[agent].ai_bias;
  if (Bernoulli(rng, bias / (1.0 + bias))) {
    return {Strategy::Kind::kSocialAi, RandomAvailableAi(world, rng)};
  }
  const std::size_t slot = UniformIndex(rng, 2 * cfg.neighborhood_radius);
  return {Strategy::Kind::kSocialHuman,
          NeighborAt(agent, slot, n, cfg.neighborhood_radius)};
}

Strategy ChooseOrchestrated(std::size_t agent,
                            std::span<const HumanAgent> previous,
                            const AiSystems& ais, const World& world,
                            const Config& cfg, const StrategyTracker* tracker,
                            Rng& rng) {
  const std::size_t n = previous.size();
  const std::size_t radius = cfg.neighborhood_radius;
  const double penalty = previous[agent].penalty;

  Strategy best{Strategy::Kind::kIndividual, 0};
  double best_value;
  auto consider = [&](Strategy s, double value) {
    if (value > best_value) {
      best = s;
      best_value = value;
    }
  };

  if (tracker == nullptr) {
    best_value = IndividualValue(penalty, cfg);
    for (std::size_t slot = 0; slot < 2 * radius; ++slot) {
      const std::size_t j = NeighborAt(agent, slot, n, radius);
      consider({Strategy::Kind::kSocialHuman, j}, previous[j].adaptation);
    }
    for (std::size_t a = 0; a < kAiSystems; ++a) {
      if (a == world.unavailable_ai) continue;
      consider({Strategy::Kind::kSocialAi, a}, ais[a].adaptation);
    }
    return best;
  }

  // Posterior tracker: values are class-level estimates; the human source is
  // a uniformly drawn neighbor.
  const Strategy individual{Strategy::Kind::kIndividual, 0};
  best_value = std::min(1.0, tracker->Estimate(individual) * penalty) - cfg.individual_cost;
  const std::size_t slot = UniformIndex(rng, 2 * radius);
  const Strategy human{Strategy::Kind::kSocialHuman, NeighborAt(agent, slot, n, radius)};
  consider(human, tracker->Estimate(human));
  for (std::size_t a = 0; a < kAiSystems; ++a) {
    if (a == world.unavailable_ai) continue;
    const Strategy ai{Strategy::Kind::kSocialAi, a};
    consider(ai, tracker->Estimate(ai));
  }
  return best;
}

}  // namespace

Strategy ChooseStrategy(std::size_t agent, std::span<const HumanAgent> previous,
                        const AiSystems& ais, const World& world,
                        const Config& cfg, const StrategyTracker* tracker,
                        Rng& rng) {
  if (agent >= previous.size()) {
    throw IndexError("agent " + std::to_string(agent) + " out of range");
  }
  if (cfg.variant == Variant::kBaseline) {
    return ChooseBaseline(agent, previous, world, cfg, rng);
  }
  return ChooseOrchestrated(agent, previous, ais, world, cfg, tracker, rng);
}

HumanAgent ApplyLearning(HumanAgent agent, const Strategy& s,
                         std::span<const HumanAgent> previous,
                         const AiSystems& ais, const Config& cfg, Rng& rng) {
  switch (s.kind) {
    case Strategy::Kind::kIndividual: {
      const double p = std::min(1.0, cfg.individual_base_success * agent.penalty);
      agent.adaptation = Bernoulli(rng, p) ? 1.0 : 0.0;
      break;
    }
    case Strategy::Kind::kSocialHuman:
      agent.adaptation = previous[s.source].adaptation;
      break;
    case Strategy::Kind::kSocialAi:
      agent.adaptation = ais[s.source].adaptation;
      break;
  }
  agent.last_strategy = s;
  return agent;
}

AiSystems UpdateAiSystems(const AiSystems& previous,
                          std::span<const HumanAgent> learners,
                          std::span<const Strategy> strategies) {
  double social_sum = 0.0, individual_sum = 0.0, all_sum = 0.0;
  std::size_t social_n = 0, individual_n = 0;
  for (std::size_t i = 0; i < learners.size(); ++i) {
    const double a = learners[i].adaptation;
    all_sum += a;
    if (strategies[i].kind == Strategy::Kind::kIndividual) {
      individual_sum += a;
      ++individual_n;
    } else {
      social_sum += a;
      ++social_n;
    }
  }
  AiSystems next = previous;
  if (social_n > 0) next[0].adaptation = social_sum / static_cast<double>(social_n);
  if (individual_n > 0) next[1].adaptation = individual_sum / static_cast<double>(individual_n);
  if (!learners.empty()) next[2].adaptation = all_sum / static_cast<double>(learners.size());
  return next;
}

double SurvivalProbability(double adaptation, bool learned_individually,
                           const Config& cfg) {
  const double p = cfg.survival_unadapted +
                   adaptation * (cfg.survival_adapted - cfg.survival_unadapted) -
                   (learned_individually ? cfg.individual_cost : 0.0);
  return std::clamp(p, 0.0, 1.0);
}

double DrawPenalty(const Config& cfg, Rng& rng) {
  double p = cfg.penalty_mean;
  if (cfg.penalty_stddev > 0.0) {
    p = std::normal_distribution<double>(cfg.penalty_mean, cfg.penalty_stddev)(rng);
  }
  return std::clamp(p, cfg.penalty_min, cfg.penalty_max);
}

std::size_t SurviveAndReplenish(std::vector<HumanAgent>& population,
                                std::span<const Strategy> strategies,
                                const Config& cfg, Rng& rng) {
  std::vector<std::size_t> survivors;
  std::vector<std::size_t> dead;
  for (std::size_t i = 0; i < population.size(); ++i) {
    const bool individual = strategies[i].kind == Strategy::Kind::kIndividual;
    if (Bernoulli(rng, SurvivalProbability(population[i].adaptation, individual, cfg))) {
      survivors.push_back(i);
    } else {
      dead.push_back(i);
    }
  }
  if (survivors.empty()) throw ExtinctionError("population went extinct");
  for (std::size_t slot : dead) {
    const HumanAgent& parent = population[survivors[UniformIndex(rng, survivors.size())]];
    HumanAgent child;
    child.ai_bias = parent.ai_bias;
    if (Bernoulli(rng, cfg.mutation_rate) && cfg.bias_noise_stddev > 0.0) {
      child.ai_bias = std::max(
          0.0, child.ai_bias +
                   std::normal_distribution<double>(0.0, cfg.bias_noise_stddev)(rng));
    }
    child.penalty = DrawPenalty(cfg, rng);
    child.adaptation = 0.0;
    population[slot] = child;
  }
  return dead.size();
}

Simulation::Simulation(Config cfg)
    : cfg_(std::move(cfg)),
      world_rng_(MakeRng(cfg_.seed, "rogers.world")),
      choice_rng_(MakeRng(cfg_.seed, "rogers.choice")),
      learning_rng_(MakeRng(cfg_.seed, "rogers.learning")),
      survival_rng_(MakeRng(cfg_.seed, "rogers.survival")) {
  cfg_.Validate();
  Rng init = MakeRng(cfg_.seed, "rogers.init");
  population_.resize(cfg_.population);
  for (HumanAgent& a : population_) {
    a.penalty = DrawPenalty(cfg_, init);
    a.ai_bias = cfg_.ai_bias_init;
  }
  world_.unavailable_ai = UniformIndex(init, kAiSystems);
  strategies_.resize(cfg_.population);
  tracker_.Reset();
}

const StepStats& Simulation::Step() {
  if (StepWorld(world_, cfg_.world_change_prob, world_rng_)) {
    for (HumanAgent& a : population_) a.adaptation = 0.0;
    for (AiSystem& ai : ais_) ai.adaptation = 0.0;
    tracker_.Reset();
  }
  previous_ = population_;
  const StrategyTracker* tracker =
      cfg_.tracker == Tracker::kPosterior ? &tracker_ : nullptr;

  std::size_t individual = 0, human = 0, ai = 0;
  for (std::size_t i = 0; i < population_.size(); ++i) {
    strategies_[i] = ChooseStrategy(i, previous_, ais_, world_, cfg_, tracker, choice_rng_);
    population_[i] = ApplyLearning(population_[i], strategies_[i], previous_, ais_, cfg_,
                                   learning_rng_);
    switch (strategies_[i].kind) {
      case Strategy::Kind::kIndividual: ++individual; break;
      case Strategy::Kind::kSocialHuman: ++human; break;
      case Strategy::Kind::kSocialAi: ++ai; break;
    }
  }
  if (cfg_.tracker == Tracker::kPosterior) {
    for (std::size_t i = 0; i < population_.size(); ++i) {
      tracker_.Observe(strategies_[i], Bernoulli(learning_rng_, population_[i].adaptation));
    }
  }

  const double n = static_cast<double>(population_.size());
  double learned = 0.0;
  for (const HumanAgent& a : population_) learned += a.adaptation;

  ais_ = UpdateAiSystems(ais_, population_, strategies_);
  SurviveAndReplenish(population_, strategies_, cfg_, survival_rng_);

  double total = 0.0;
  for (const HumanAgent& a : population_) total += a.adaptation;

  last_.step = steps_taken_++;
  last_.mean_adaptation = total / n;
  last_.mean_adaptation_learned = learned / n;
  last_.frac_individual = static_cast<double>(individual) / n;
  last_.frac_social_human = static_cast<double>(human) / n;
  last_.frac_social_ai = static_cast<double>(ai) / n;
  last_.epoch = world_.epoch;
  return last_;
}

Result Run(const Config& cfg) {
  Simulation sim(cfg);
  Result result;
  result.series.reserve(cfg.steps);
  for (std::size_t t = 0; t < cfg.steps; ++t) result.series.push_back(sim.Step());
  const std::size_t tail = std::max<std::size_t>(1, cfg.steps / 10);
  double sum = 0.0;
  for (std::size_t t = cfg.steps - tail; t < cfg.steps; ++t) {
    sum += result.series[t].mean_adaptation;
  }
  result.equilibrium = sum / static_cast<double>(tail);
  return result;
}

void WriteSeriesCsv(std::ostream& out, std::span<const StepStats> series) {
  out << "step,mean_adaptation,frac_individual,frac_social_human,frac_social_ai,epoch\n";
  for (const StepStats& s : series) {
    out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", s.step,
                       s.mean_adaptation, s.frac_individual, s.frac_social_human,
                       s.frac_social_ai, s.epoch);
  }
}

}  // namespace orchestra::rogers
