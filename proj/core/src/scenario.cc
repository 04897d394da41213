#include "orchestra/scenario.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "orchestra/appropriateness.h"
#include "orchestra/error.h"
#include "orchestra/random.h"

namespace orchestra {

using nlohmann::json;

FeasibilityMask CompileConstraints(std::span<const ConstraintSpec> specs) {
  FeasibilityMask mask;
  for (const ConstraintSpec& spec : specs) {
    auto contains = [](const auto& v, std::size_t x) {
      return std::find(v.begin(), v.end(), x) != v.end();
    };
    switch (spec.kind) {
      case ConstraintSpec::Kind::kForbidRegions:
        mask = mask.And(FeasibilityMask(
            [spec, contains](const TaskContext& task, AgentIndex k) {
              return !(contains(spec.agents, k) &&
                       contains(spec.regions, task.region));
            }));
        break;
      case ConstraintSpec::Kind::kPeriodicUnavailable:
        if (spec.period == 0) throw ConfigError("constraint period must be >= 1");
        mask = mask.And(FeasibilityMask(
            [spec, contains](const TaskContext& task, AgentIndex k) {
              if (!contains(spec.agents, k)) return true;
              return (task.step + spec.phase) % spec.period >=
                     spec.unavailable_for;
            }));
        break;
      case ConstraintSpec::Kind::kHumanOnlyRegions:
        mask = mask.And(FeasibilityMask(
            [spec, contains](const TaskContext& task, AgentIndex k) {
              return !contains(spec.regions, task.region) ||
                     contains(spec.agents, k);
            }));
        break;
    }
  }
  return mask;
}

void ScenarioConfig::Validate() const {
  const std::size_t k = agent_count();
  const std::size_t m = region_count();
  if (k == 0 || m == 0) throw ConfigError("capabilities must be a non-empty K x M matrix");
  if (!agent_ids.empty() && agent_ids.size() != k) {
    throw ConfigError("agent_ids length must equal K");
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (double c : capabilities.row(a)) {
      if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("capabilities must lie in [0, 1]");
    }
  }
  if (cost_means.rows() != k || cost_means.cols() != m) {
    throw ConfigError("cost_means must be K x M");
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (double c : cost_means.row(a)) {
      if (!(c > 0.0)) throw ConfigError("cost_means must be > 0");
    }
  }
  if (!(cost_stddev >= 0.0)) throw ConfigError("cost_stddev must be >= 0");
  if (region_probs.size() != m) throw ConfigError("region_probs must have length M");
  double total = 0.0;
  for (double p : region_probs) {
    if (!(p >= 0.0)) throw ConfigError("region_probs must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("region_probs must sum to 1");
  if (stream_length == 0) throw ConfigError("stream_length must be >= 1");
  if (region_alphas.size() != m) throw ConfigError("region_alphas must have length M");
  if (correctness_priors.rows() != k || correctness_priors.cols() != m) {
    throw ConfigError("correctness priors must be K x M");
  }
  for (const auto& spec : constraints) {
    for (AgentIndex a : spec.agents) {
      if (a >= k) throw ConfigError("constraint references unknown agent");
    }
    for (RegionIndex r : spec.regions) {
      if (r >= m) throw ConfigError("constraint references unknown region");
    }
  }
  // Surfaces InvalidPrior for pseudo-counts below 1.
  (void)InitialBeliefs();
}

AgentSet ScenarioConfig::Agents() const {
  return agent_ids.empty() ? AgentSet::Numbered(agent_count()) : AgentSet(agent_ids);
}

BeliefState ScenarioConfig::InitialBeliefs() const {
  Grid<CorrectnessPosterior> grid(agent_count(), region_count());
  for (std::size_t k = 0; k < agent_count(); ++k) {
    for (std::size_t m = 0; m < region_count(); ++m) {
      const BetaPrior& p = correctness_priors(k, m);
      grid(k, m) = CorrectnessPosterior(p.alpha_incorrect, p.alpha_correct);
    }
  }
  return BeliefState(RegionPosterior(region_alphas), std::move(grid));
}

CostTable ScenarioConfig::Costs() const { return CostTable(cost_means); }

FeasibilityMask ScenarioConfig::Mask() const {
  return CompileConstraints(constraints);
}

TrueScenario ScenarioConfig::Truth() const {
  return TrueScenario(capabilities, region_probs);
}

void ScenarioConfig::FillDefaults() {
  const std::size_t k = agent_count();
  const std::size_t m = region_count();
  if (cost_means.empty()) cost_means = Grid<double>(k, m, 1.0);
  if (region_probs.empty() && m > 0) {
    region_probs.assign(m, 1.0 / static_cast<double>(m));
  }
  if (region_alphas.empty()) region_alphas.assign(m, kDefaultPseudoCount);
  if (correctness_priors.empty()) correctness_priors = Grid<BetaPrior>(k, m);
}

std::string_view ToString(Profile profile) {
  switch (profile) {
    case Profile::kInvariant: return "invariant";
    case Profile::kDominant: return "dominant";
    case Profile::kDominantMisalignedCost: return "dominant_misaligned_cost";
    case Profile::kVarying: return "varying";
    case Profile::kVaryingMisalignedCost: return "varying_misaligned_cost";
  }
  return "unknown";
}

std::optional<Profile> ParseProfile(std::string_view name) {
  std::string lower(name);
  std::replace(lower.begin(), lower.end(), '-', '_');
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (Profile p : kAllProfiles) {
    if (ToString(p) == lower) return p;
  }
  return std::nullopt;
}

namespace {

const Grid<double>& InvariantCapabilities() {
  static const Grid<double> g = Grid<double>::FromRows({
      {0.350, 0.336, 0.314},
      {0.339, 0.338, 0.323},
      {0.349, 0.322, 0.329},
      {0.331, 0.311, 0.357},
  });
  return g;
}

const Grid<double>& DominantCapabilities() {
  static const Grid<double> g = Grid<double>::FromRows({
      {0.650, 0.852, 0.877},
      {0.399, 0.298, 0.303},
      {0.079, 0.076, 0.069},
      {0.031, 0.091, 0.274},
  });
  return g;
}

const Grid<double>& VaryingCapabilities() {
  static const Grid<double> g = Grid<double>::FromRows({
      {0.650, 0.076, 0.274},
      {0.399, 0.298, 0.303},
      {0.079, 0.852, 0.069},
      {0.031, 0.091, 0.877},
  });
  return g;
}

// Cheapest agent per region is never the most capable one.
const Grid<double>& MisalignedCosts() {
  static const Grid<double> g = Grid<double>::FromRows({
      {50.915, 120.683, 110.287},
      {51.582, 111.053, 1.412},
      {45.006, 1.568, 123.644},
      {1.971, 100.274, 121.872},
  });
  return g;
}

}  // namespace

ScenarioConfig BuiltinScenario(Profile profile) {
  ScenarioConfig c;
  c.name = std::string(ToString(profile));
  switch (profile) {
    case Profile::kInvariant:
      c.capabilities = InvariantCapabilities();
      break;
    case Profile::kDominant:
    case Profile::kDominantMisalignedCost:
      c.capabilities = DominantCapabilities();
      break;
    case Profile::kVarying:
    case Profile::kVaryingMisalignedCost:
      c.capabilities = VaryingCapabilities();
      break;
  }
  if (profile == Profile::kDominantMisalignedCost ||
      profile == Profile::kVaryingMisalignedCost) {
    c.cost_means = MisalignedCosts();
  }
  c.cost_stddev = 2.0;
  c.stream_length = 1000;
  c.seed = 1;
  c.FillDefaults();
  return c;
}

std::vector<StreamItem> GenerateStream(const ScenarioConfig& config,
                                       std::uint64_t seed) {
  config.Validate();
  const std::size_t agents = config.agent_count();
  Rng region_rng = MakeRng(seed, "stream.region");
  std::vector<Rng> outcome_rng;
  std::vector<Rng> cost_rng;
  for (std::size_t k = 0; k < agents; ++k) {
    outcome_rng.push_back(MakeRng(seed, "stream.outcome", k));
    cost_rng.push_back(MakeRng(seed, "stream.cost", k));
  }
  std::discrete_distribution<std::size_t> region_dist(
      config.region_probs.begin(), config.region_probs.end());

  std::vector<StreamItem> stream(config.stream_length);
  for (std::size_t t = 0; t < stream.size(); ++t) {
    StreamItem& item = stream[t];
    item.step = t;
    item.region = region_dist(region_rng);
    item.outcomes.resize(agents);
    item.realized_costs.resize(agents);
    for (std::size_t k = 0; k < agents; ++k) {
      item.outcomes[k] =
          Bernoulli(outcome_rng[k], config.capabilities(k, item.region));
      const double mean = config.cost_means(k, item.region);
      double cost = mean;
      if (config.cost_stddev > 0.0) {
        cost = std::normal_distribution<double>(mean, config.cost_stddev)(cost_rng[k]);
      }
      item.realized_costs[k] = std::max(cost, kMinRealizedCost);
    }
  }
  return stream;
}

namespace {

std::string_view ToString(ConstraintSpec::Kind kind) {
  switch (kind) {
    case ConstraintSpec::Kind::kForbidRegions: return "forbid_regions";
    case ConstraintSpec::Kind::kPeriodicUnavailable: return "periodic_unavailable";
    case ConstraintSpec::Kind::kHumanOnlyRegions: return "human_only_regions";
  }
  return "unknown";
}

ConstraintSpec::Kind ParseConstraintKind(const std::string& s) {
  for (auto k : {ConstraintSpec::Kind::kForbidRegions,
                 ConstraintSpec::Kind::kPeriodicUnavailable,
                 ConstraintSpec::Kind::kHumanOnlyRegions}) {
    if (ToString(k) == s) return k;
  }
  throw ConfigError("unknown constraint type '" + s + "'");
}

Grid<double> MatrixFromJson(const json& j, const char* field) {
  try {
    return Grid<double>::FromRows(j.get<std::vector<std::vector<double>>>());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("field '") + field + "': " + e.what());
  }
}

}  // namespace

std::string ScenarioToJson(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  if (!c.agent_ids.empty()) j["agent_ids"] = c.agent_ids;
  j["capabilities"] = c.capabilities.ToRows();
  j["cost_means"] = c.cost_means.ToRows();
  j["cost_stddev"] = c.cost_stddev;
  j["region_probs"] = c.region_probs;
  j["stream_length"] = c.stream_length;
  j["seed"] = c.seed;
  json priors;
  priors["region_alphas"] = c.region_alphas;
  json cells = json::array();
  for (std::size_t k = 0; k < c.correctness_priors.rows(); ++k) {
    json row = json::array();
    for (const BetaPrior& p : c.correctness_priors.row(k)) {
      row.push_back({p.alpha_incorrect, p.alpha_correct});
    }
    cells.push_back(std::move(row));
  }
  priors["correctness"] = std::move(cells);
  j["priors"] = std::move(priors);
  j["estimator"] = std::string(ToString(c.estimator));
  j["feedback"] = std::string(ToString(c.feedback));
  json constraints = json::array();
  for (const auto& spec : c.constraints) {
    json s;
    s["type"] = std::string(ToString(spec.kind));
    s["agents"] = spec.agents;
    if (spec.kind == ConstraintSpec::Kind::kPeriodicUnavailable) {
      s["period"] = spec.period;
      s["unavailable_for"] = spec.unavailable_for;
      s["phase"] = spec.phase;
    } else {
      s["regions"] = spec.regions;
    }
    constraints.push_back(std::move(s));
  }
  j["constraints"] = std::move(constraints);
  return j.dump(2);
}

ScenarioConfig ScenarioFromJson(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid scenario JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  if (!j.contains("capabilities")) throw ConfigError("scenario needs 'capabilities'");

  ScenarioConfig c;
  try {
    c.name = j.value("name", std::string("custom"));
    if (j.contains("agent_ids")) c.agent_ids = j["agent_ids"].get<std::vector<std::string>>();
    c.capabilities = MatrixFromJson(j["capabilities"], "capabilities");
    if (j.contains("cost_means")) c.cost_means = MatrixFromJson(j["cost_means"], "cost_means");
    c.cost_stddev = j.value("cost_stddev", 0.0);
    if (j.contains("region_probs")) c.region_probs = j["region_probs"].get<std::vector<double>>();
    c.stream_length = j.value("stream_length", std::size_t{1000});
    c.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("estimator")) c.estimator = ParsePointEstimator(j["estimator"].get<std::string>());
    if (j.contains("feedback")) c.feedback = ParseFeedback(j["feedback"].get<std::string>());

    const std::size_t k = c.agent_count();
    const std::size_t m = c.region_count();
    if (j.contains("priors")) {
      const json& p = j["priors"];
      if (p.contains("region_alphas")) {
        const json& ra = p["region_alphas"];
        c.region_alphas = ra.is_number() ? std::vector<double>(m, ra.get<double>())
                                         : ra.get<std::vector<double>>();
      }
      if (p.contains("correctness")) {
        const json& cp = p["correctness"];
        if (cp.is_array() && !cp.empty() && cp[0].is_array() && !cp[0].empty() &&
            cp[0][0].is_array()) {
          c.correctness_priors = Grid<BetaPrior>(k, m);
          if (cp.size() != k) throw ConfigError("correctness priors must have K rows");
          for (std::size_t a = 0; a < k; ++a) {
            if (cp[a].size() != m) throw ConfigError("correctness priors must have M columns");
            for (std::size_t r = 0; r < m; ++r) {
              c.correctness_priors(a, r) = {cp[a][r].at(0).get<double>(),
                                            cp[a][r].at(1).get<double>()};
            }
          }
        } else if (cp.is_array() && cp.size() == 2 && cp[0].is_number()) {
          c.correctness_priors = Grid<BetaPrior>(
              k, m, BetaPrior{cp[0].get<double>(), cp[1].get<double>()});
        } else {
          throw ConfigError("priors.correctness must be [a0, a1] or a K x M grid of pairs");
        }
      }
    }
    if (j.contains("constraints")) {
      for (const json& s : j["constraints"]) {
        ConstraintSpec spec;
        spec.kind = ParseConstraintKind(s.at("type").get<std::string>());
        spec.agents = s.value("agents", std::vector<std::size_t>{});
        spec.regions = s.value("regions", std::vector<std::size_t>{});
        spec.period = s.value("period", std::size_t{1});
        spec.unavailable_for = s.value("unavailable_for", std::size_t{0});
        spec.phase = s.value("phase", std::size_t{0});
        c.constraints.push_back(std::move(spec));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid scenario field: ") + e.what());
  }
  c.FillDefaults();
  c.Validate();
  return c;
}

ScenarioConfig ResolveScenario(std::string_view name_or_path) {
  if (auto profile = ParseProfile(name_or_path)) return BuiltinScenario(*profile);
  if (!name_or_path.empty() && name_or_path.front() == '{') {
    return ScenarioFromJson(name_or_path);
  }
  std::ifstream in{std::string(name_or_path)};
  if (!in) {
    throw ConfigError("'" + std::string(name_or_path) +
                      "' is neither a builtin scenario nor a readable file");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return ScenarioFromJson(buf.str());
}

}  // namespace orchestra
