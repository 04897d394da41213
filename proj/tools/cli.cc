#include "cli.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "orchestra/appropriateness.h"
#include "orchestra/error.h"
#include "orchestra/rogers.h"
#include "orchestra/scenario.h"
#include "orchestra/simulation.h"
#include "orchestra/study.h"
#include "orchestra/study_service.h"
#include "orchestra/study_sim.h"

#ifndef ORCHESTRA_VERSION
#define ORCHESTRA_VERSION "0.0.0"
#endif

namespace orchestra::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// What a subcommand produced; becomes the manifest.
struct Outcome {
  std::vector<std::string> args;  // canonical arguments, every default explicit
  json config = json::object();
  std::vector<std::uint64_t> seeds;
  bool write_manifest = true;
};

class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {}
  std::ofstream Open(const std::string& name) {
    fs::create_directories(dir_);
    fs::path p = dir_ / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + p.string() + "'");
    written_.push_back(p.string());
    return f;
  }
  const fs::path& dir() const { return dir_; }
  std::vector<std::string> written() const { return written_; }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

std::string Num(double v) { return fmt::format("{:.17g}", v); }

template <typename Fn>
void ParallelFor(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  std::exception_ptr failure;
  std::mutex mu;
  for (std::size_t j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

// Scenario arguments: builtin names stay names, anything else is inlined as
// JSON so a manifest does not depend on the file still existing.
std::string CanonicalScenarioArg(const std::string& arg, const ScenarioConfig& resolved) {
  if (ParseProfile(arg)) return arg;
  return json::parse(ScenarioToJson(resolved)).dump();
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
  std::string scenario = "dominant";
  std::string policy = "orchestrated";
  std::size_t runs = 1;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::optional<std::string> estimator;
  std::optional<std::string> feedback;
  bool figure2 = false;
  std::uint64_t figure2_seed = 1;
};

Outcome RunSimulate(const SimulateOpts& o, Output& output, std::ostream& out) {
  Outcome res;
  if (o.runs == 0) throw ConfigError("--runs must be >= 1");
  if (o.figure2) {
    auto rows = ReproduceFigure2(o.runs, o.figure2_seed, o.jobs);
    auto f = output.Open("figure2.csv");
    WriteFigure2Csv(f, rows);
    for (const auto& r : rows) {
      out << fmt::format("{:<26} app={:.4f} oracle/random={:.4f} orchestrated/random={:.4f}\n",
                         ToString(r.profile), r.appropriateness_closed_form,
                         r.appropriateness_empirical, r.appropriateness_with_cost);
    }
    res.args = {"simulate", "--figure2", "--runs", std::to_string(o.runs), "--jobs",
                std::to_string(o.jobs), "--figure2-seed", std::to_string(o.figure2_seed)};
    res.config = {{"figure2", true}, {"runs", o.runs}, {"seed", o.figure2_seed}};
    res.seeds = {o.figure2_seed};
    return res;
  }

  ScenarioConfig config = ResolveScenario(o.scenario);
  if (o.seed) config.seed = *o.seed;
  if (o.steps) config.stream_length = *o.steps;
  if (o.estimator) config.estimator = ParsePointEstimator(*o.estimator);
  if (o.feedback) config.feedback = ParseFeedback(*o.feedback);
  config.Validate();
  const Policy policy = Policy::Parse(o.policy);
  auto results = RunMany(config, policy, o.runs, o.jobs);

  {
    auto f = output.Open("runs.csv");
    f << "run,seed,policy,steps,correct,accuracy,total_cost\n";
    for (std::size_t r = 0; r < results.size(); ++r) {
      const auto& s = results[r].summary;
      f << fmt::format("{},{},{},{},{},{:.6f},{:.6f}\n", r, config.seed + r, policy.ToString(),
                       s.steps, s.correct, s.accuracy, s.total_cost);
    }
  }
  {
    auto f = output.Open("trace.csv");
    WriteTraceCsv(f, results.front().trace);
  }
  double mean = 0.0;
  for (const auto& r : results) mean += r.summary.accuracy;
  mean /= static_cast<double>(results.size());
  out << fmt::format("scenario={} policy={} runs={} mean_accuracy={:.6f}\n", config.name,
                     policy.ToString(), o.runs, mean);

  // Overrides are folded into the canonical scenario, so they are inlined.
  const bool overridden = o.seed || o.steps || o.estimator || o.feedback;
  std::string scenario_arg = overridden ? json::parse(ScenarioToJson(config)).dump()
                                        : CanonicalScenarioArg(o.scenario, config);
  res.args = {"simulate", "--scenario", scenario_arg, "--policy", policy.ToString(),
              "--runs", std::to_string(o.runs), "--jobs", std::to_string(o.jobs)};
  res.config = {{"scenario", json::parse(ScenarioToJson(config))},
                {"policy", policy.ToString()},
                {"runs", o.runs}};
  for (std::size_t r = 0; r < o.runs; ++r) res.seeds.push_back(config.seed + r);
  return res;
}

// ---------------------------------------------------------------- approp

struct AppropOpts {
  std::vector<std::string> scenarios;
  std::string crand = "closed";
  std::size_t mc_runs = 50;
  std::uint64_t seed = 1;
};

Outcome RunApprop(const AppropOpts& o, Output& output, std::ostream& out) {
  Outcome res;
  std::vector<std::string> names = o.scenarios;
  if (names.empty() || (names.size() == 1 && names[0] == "all")) {
    names.clear();
    for (Profile p : kAllProfiles) names.emplace_back(ToString(p));
  }
  CRandMode mode;
  if (o.crand == "closed") {
    mode = crand::PerStepClosedForm{};
  } else if (o.crand == "fixed") {
    mode = crand::FixedAgentExpectation{};
  } else if (o.crand == "mc") {
    mode = crand::MonteCarlo{o.mc_runs, o.seed, 1000};
  } else {
    throw ConfigError("--crand must be closed, fixed or mc");
  }

  auto f = output.Open("approp.csv");
  f << "scenario_name,c_max,c_rand,appropriateness,min_dissimilarity\n";
  res.args = {"approp"};
  json scen = json::array();
  for (const auto& name : names) {
    ScenarioConfig config = ResolveScenario(name);
    if (auto* mc = std::get_if<crand::MonteCarlo>(&mode)) mc->stream_length = config.stream_length;
    TrueScenario truth = config.Truth();
    const double cmax = CMax(truth);
    const double cr = CRand(truth, mode);
    const double app = cmax / cr;
    const double dmin = MinDissimilarity(truth);
    f << fmt::format("{},{:.9f},{:.9f},{:.9f},{:.9f}\n", config.name, cmax, cr, app, dmin);
    out << fmt::format("{:<26} c_max={:.6f} c_rand={:.6f} appropriateness={:.6f} "
                       "min_dissimilarity={:.6f}\n",
                       config.name, cmax, cr, app, dmin);
    res.args.push_back("--scenario");
    res.args.push_back(CanonicalScenarioArg(name, config));
    scen.push_back(json::parse(ScenarioToJson(config)));
  }
  res.args.insert(res.args.end(), {"--crand", o.crand, "--mc-runs", std::to_string(o.mc_runs),
                                   "--seed", std::to_string(o.seed)});
  res.config = {{"scenarios", scen}, {"crand", o.crand}, {"mc_runs", o.mc_runs}};
  res.seeds = {o.seed};
  return res;
}

// ---------------------------------------------------------------- theorem1

struct Theorem1Opts {
  std::vector<double> epsilons = {0.2, 0.5};
  std::vector<double> deltas = {0.25, 0.01};
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  std::string sampling = "stratified";
};

Outcome RunTheorem1(const Theorem1Opts& o, Output& output, std::ostream& out) {
  DrawSampling sampling;
  if (o.sampling == "stratified") {
    sampling = DrawSampling::kStratified;
  } else if (o.sampling == "iid") {
    sampling = DrawSampling::kIid;
  } else {
    throw ConfigError("--sampling must be stratified or iid");
  }
  auto f = output.Open("theorem1.csv");
  f << "epsilon,delta,agents,trials,min_dissimilarity,empirical_prob_bound_holds,"
       "exact_prob_bound_holds,ratio_fixed_agent,ratio_closed_form,limit,"
       "fixed_agent_ratio_limit_error\n";
  for (double eps : o.epsilons) {
    for (double delta : o.deltas) {
      auto r = Theorem1Verify(eps, delta, o.trials, o.seed, sampling);
      f << fmt::format("{},{},{},{},{:.12f},{:.6f},{:.12f},{:.12f},{:.12f},{:.12f},{:.12f}\n",
                       Num(eps), Num(delta), r.agents, r.trials, r.min_dissimilarity,
                       r.empirical_prob_bound_holds, r.exact_prob_bound_holds,
                       r.ratio_fixed_agent, r.ratio_closed_form, r.limit,
                       r.fixed_agent_ratio_limit_error);
      out << fmt::format("eps={} delta={} K={} bound_holds={:.4f} (exact {:.4f}) "
                         "ratio={:.6f} closed_form={:.6f} limit={:.6f} |ratio-limit|={:.6f}\n",
                         eps, delta, r.agents, r.empirical_prob_bound_holds,
                         r.exact_prob_bound_holds, r.ratio_fixed_agent, r.ratio_closed_form,
                         r.limit, r.fixed_agent_ratio_limit_error);
    }
  }
  Outcome res;
  res.args = {"theorem1"};
  for (double e : o.epsilons) res.args.insert(res.args.end(), {"--epsilon", Num(e)});
  for (double d : o.deltas) res.args.insert(res.args.end(), {"--delta", Num(d)});
  res.args.insert(res.args.end(), {"--trials", std::to_string(o.trials), "--seed",
                                   std::to_string(o.seed), "--sampling", o.sampling});
  res.config = {{"epsilons", o.epsilons}, {"deltas", o.deltas}, {"trials", o.trials},
                {"sampling", o.sampling}};
  res.seeds = {o.seed};
  return res;
}

// ---------------------------------------------------------------- rogers

struct RogersOpts {
  std::string variant = "baseline";
  std::uint64_t seed = 1;
  std::size_t runs = 1;
  std::size_t jobs = 1;
  std::size_t steps = 4000;
  std::size_t population = 1000;
  std::string tracker = "exact";
};

Outcome RunRogers(const RogersOpts& o, Output& output, std::ostream& out) {
  if (o.runs == 0) throw ConfigError("--runs must be >= 1");
  rogers::Config base;
  base.variant = rogers::ParseVariant(o.variant);
  base.tracker = rogers::ParseTracker(o.tracker);
  base.steps = o.steps;
  base.population = o.population;
  base.Validate();
  std::vector<rogers::Result> results(o.runs);
  ParallelFor(o.runs, o.jobs, [&](std::size_t i) {
    rogers::Config c = base;
    c.seed = o.seed + i;
    results[i] = rogers::Run(c);
  });
  const std::string variant(rogers::ToString(base.variant));
  Outcome res;
  for (std::size_t i = 0; i < o.runs; ++i) {
    auto f = output.Open(fmt::format("rogers_{}_seed{}.csv", variant, o.seed + i));
    rogers::WriteSeriesCsv(f, results[i].series);
    res.seeds.push_back(o.seed + i);
  }
  auto f = output.Open(fmt::format("rogers_{}_equilibrium.csv", variant));
  f << "variant,seed,equilibrium\n";
  double mean = 0.0;
  for (std::size_t i = 0; i < o.runs; ++i) {
    f << fmt::format("{},{},{:.6f}\n", variant, o.seed + i, results[i].equilibrium);
    out << fmt::format("equilibrium variant={} seed={} value={:.4f}\n", variant, o.seed + i,
                       results[i].equilibrium);
    mean += results[i].equilibrium;
  }
  if (o.runs > 1) {
    out << fmt::format("equilibrium variant={} mean={:.4f}\n", variant,
                       mean / static_cast<double>(o.runs));
  }
  res.args = {"rogers", "--variant", variant, "--seed", std::to_string(o.seed), "--runs",
              std::to_string(o.runs), "--jobs", std::to_string(o.jobs), "--steps",
              std::to_string(o.steps), "--population", std::to_string(o.population),
              "--tracker", std::string(rogers::ToString(base.tracker))};
  res.config = {{"variant", variant}, {"steps", o.steps}, {"population", o.population},
                {"tracker", rogers::ToString(base.tracker)}};
  return res;
}

// ---------------------------------------------------------------- study-sim

struct StudySimOpts {
  std::string variant = "all";
  std::string lock_in = "both";
  std::string policy = "scripted";
  double follow_prob = 0.8;
  std::size_t n_users = 20;
  std::uint64_t seed = 1;
  std::size_t questions_per_region = 20;
};

Outcome RunStudySim(const StudySimOpts& o, Output& output, std::ostream& out) {
  if (o.policy != "scripted" && o.policy != "scripted-user-policy") {
    throw ConfigError("only the scripted user policy is available");
  }
  std::vector<study::Variant> variants;
  if (o.variant == "all") {
    variants = {study::Variant::kBaseline, study::Variant::kOrchestration,
                study::Variant::kConstrained};
  } else {
    variants = {study::ParseVariant(o.variant)};
  }
  std::vector<bool> modes;
  if (o.lock_in == "both") {
    modes = {true, false};
  } else if (o.lock_in == "on") {
    modes = {true};
  } else if (o.lock_in == "off") {
    modes = {false};
  } else {
    throw ConfigError("--lock-in must be on, off or both");
  }

  auto f = output.Open("study.csv");
  study::WriteStudyCsvHeader(f);
  bool ok = true;
  for (bool lock_in : modes) {
    for (auto v : variants) {
      study::StudySimConfig sc;
      sc.variant = v;
      sc.lock_in = lock_in;
      sc.n_users = o.n_users;
      sc.seed = o.seed;
      sc.policy.follow_prob = o.follow_prob;
      sc.questions_per_region = o.questions_per_region;
      auto users = study::SimulateStudy(sc);
      study::WriteStudyCsv(f, sc, users, study::DefaultRegions());
      std::size_t violations = 0;
      for (const auto& u : users) violations += u.invariants.all() ? 0 : 1;
      ok = ok && violations == 0;
      out << fmt::format("variant={} lock_in={} users={} mean_accuracy={:.4f} "
                         "invariant_violations={}\n",
                         study::ToString(v), lock_in ? "on" : "off", users.size(),
                         study::MeanAccuracy(users), violations);
    }
  }
  if (!ok) throw ProtocolError("protocol invariants violated in simulated sessions");
  Outcome res;
  res.args = {"study-sim", "--variant", o.variant, "--lock-in", o.lock_in, "--policy",
              "scripted", "--follow-prob", Num(o.follow_prob), "--n-users",
              std::to_string(o.n_users), "--seed", std::to_string(o.seed),
              "--questions-per-region", std::to_string(o.questions_per_region)};
  res.config = {{"variant", o.variant}, {"lock_in", o.lock_in}, {"follow_prob", o.follow_prob},
                {"n_users", o.n_users}, {"questions_per_region", o.questions_per_region}};
  res.seeds = {o.seed};
  return res;
}

// ---------------------------------------------------------------- serve

struct ServeOpts {
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string bank;
  std::string config;
  std::string persist;
};

Outcome RunServe(const ServeOpts& o, std::ostream& out) {
  study::StudyConfig defaults =
      study::StudyConfig::Defaults(study::Variant::kOrchestration, true);
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw ConfigError("cannot open config '" + o.config + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    defaults = study::StudyConfigFromJson(ss.str());
  }
  std::shared_ptr<const study::QuestionBank> bank;
  if (!o.bank.empty()) {
    bank = std::make_shared<const study::QuestionBank>(
        study::QuestionBank::LoadFile(o.bank, defaults.regions));
  } else {
    bank = std::make_shared<const study::QuestionBank>(
        study::SyntheticBank(defaults.regions, defaults.questions_per_region, 1));
  }
  std::optional<fs::path> dir;
  if (!o.persist.empty()) dir = fs::path(o.persist);
  study::SessionStore store(bank, dir);
  if (std::size_t n = store.Recover()) out << fmt::format("recovered {} sessions\n", n);
  study::StudyApi api(store, defaults);
  auto log = [&out](const std::string& line) { out << line << std::endl; };
  if (!study::Serve(api, o.host, o.port, log)) {
    throw ConfigError(fmt::format("cannot bind {}:{}", o.host, o.port));
  }
  Outcome res;
  res.write_manifest = false;
  return res;
}

// ---------------------------------------------------------------- manifest

void WriteManifest(const Outcome& res, Output& output, double seconds) {
  json m;
  m["subcommand"] = res.args.empty() ? "" : res.args.front();
  m["args"] = res.args;
  m["config"] = res.config;
  m["seeds"] = res.seeds;
  m["tool_version"] = ORCHESTRA_VERSION;
  m["outputs"] = output.written();
  m["wall_clock_seconds"] = seconds;
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m["created_utc"] = buf;
  fs::create_directories(output.dir());
  std::ofstream f(output.dir() / "manifest.json", std::ios::trunc);
  f << m.dump(2) << '\n';
}

void PrintError(std::ostream& err, std::string_view code, std::string_view message) {
  err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int Dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Orchestration engine, simulators and study service", "orchestra"};
  app.require_subcommand(0, 1);
  std::string out_dir = "out";
  std::string from_manifest;
  app.add_option("--from-manifest", from_manifest,
                 "Re-run the command recorded in a manifest.json");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.set_version_flag("--version", ORCHESTRA_VERSION);

  SimulateOpts sim;
  auto* c_sim = app.add_subcommand("simulate", "Run a scenario stream under a policy");
  c_sim->add_option("--scenario,--builtin", sim.scenario,
                    "Builtin profile, scenario JSON file or inline JSON")
      ->capture_default_str();
  c_sim->add_option("--policy", sim.policy, "orchestrated|random|oracle|fixed:K")
      ->capture_default_str();
  c_sim->add_option("--runs", sim.runs)->capture_default_str();
  c_sim->add_option("--jobs", sim.jobs)->capture_default_str();
  c_sim->add_option("--seed", sim.seed, "Override the scenario seed");
  c_sim->add_option("--steps", sim.steps, "Override the stream length");
  c_sim->add_option("--estimator", sim.estimator, "map|posterior_mean");
  c_sim->add_option("--feedback", sim.feedback, "chosen|full");
  c_sim->add_flag("--figure2", sim.figure2,
                  "Appropriateness of every builtin profile, closed form and empirical");
  c_sim->add_option("--figure2-seed", sim.figure2_seed)->capture_default_str();
  c_sim->add_option("--out", out_dir, "Output directory");

  AppropOpts ap;
  auto* c_ap = app.add_subcommand("approp", "Appropriateness report");
  c_ap->add_option("--scenario,--builtin", ap.scenarios,
                   "Builtin profile, JSON file or inline JSON (repeatable; default all)");
  c_ap->add_option("--crand", ap.crand, "closed|fixed|mc")->capture_default_str();
  c_ap->add_option("--mc-runs", ap.mc_runs)->capture_default_str();
  c_ap->add_option("--seed", ap.seed)->capture_default_str();
  c_ap->add_option("--out", out_dir, "Output directory");

  Theorem1Opts th;
  auto* c_th = app.add_subcommand("theorem1", "Verify the lower-bound construction");
  c_th->add_option("--epsilon", th.epsilons, "Repeatable")->capture_default_str();
  c_th->add_option("--delta", th.deltas, "Repeatable")->capture_default_str();
  c_th->add_option("--trials", th.trials)->capture_default_str();
  c_th->add_option("--seed", th.seed)->capture_default_str();
  c_th->add_option("--sampling", th.sampling, "stratified|iid")->capture_default_str();
  c_th->add_option("--out", out_dir, "Output directory");

  RogersOpts ro;
  auto* c_ro = app.add_subcommand("rogers", "Social-learning population simulation");
  c_ro->add_option("--variant", ro.variant, "baseline|orchestrated")->capture_default_str();
  c_ro->add_option("--seed", ro.seed)->capture_default_str();
  c_ro->add_option("--runs", ro.runs, "Seeds seed..seed+runs-1")->capture_default_str();
  c_ro->add_option("--jobs", ro.jobs)->capture_default_str();
  c_ro->add_option("--steps", ro.steps)->capture_default_str();
  c_ro->add_option("--population", ro.population)->capture_default_str();
  c_ro->add_option("--tracker", ro.tracker, "exact|posterior")->capture_default_str();
  c_ro->add_option("--out", out_dir, "Output directory");

  StudySimOpts ss;
  auto* c_ss = app.add_subcommand("study-sim", "Headless study with scripted users");
  c_ss->add_option("--variant", ss.variant, "baseline|orchestration|constrained|all")
      ->capture_default_str();
  c_ss->add_option("--lock-in", ss.lock_in, "on|off|both")->capture_default_str();
  c_ss->add_option("--policy", ss.policy, "scripted")->capture_default_str();
  c_ss->add_option("--follow-prob", ss.follow_prob)->capture_default_str();
  c_ss->add_option("--n-users", ss.n_users)->capture_default_str();
  c_ss->add_option("--seed", ss.seed)->capture_default_str();
  c_ss->add_option("--questions-per-region", ss.questions_per_region)->capture_default_str();
  c_ss->add_option("--out", out_dir, "Output directory");

  ServeOpts sv;
  auto* c_sv = app.add_subcommand("serve", "Serve the study HTTP JSON API");
  c_sv->add_option("--port", sv.port)->capture_default_str();
  c_sv->add_option("--host", sv.host)->capture_default_str();
  c_sv->add_option("--bank", sv.bank, "Line-delimited question bank");
  c_sv->add_option("--config", sv.config, "Study config JSON used for new sessions");
  c_sv->add_option("--persist", sv.persist, "Directory for session event logs");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << ORCHESTRA_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  if (!from_manifest.empty()) {
    if (!app.get_subcommands().empty()) {
      err << "error: --from-manifest cannot be combined with a subcommand\n";
      return kUsageError;
    }
    json m;
    try {
      std::ifstream in(from_manifest);
      if (!in) throw ConfigError("cannot open manifest '" + from_manifest + "'");
      m = json::parse(in);
    } catch (const json::exception& e) {
      PrintError(err, "ConfigError", std::string("malformed manifest: ") + e.what());
      return kDomainError;
    } catch (const Error& e) {
      PrintError(err, e.code(), e.what());
      return kDomainError;
    }
    auto replay = m.at("args").get<std::vector<std::string>>();
    bool out_given = std::find(args.begin(), args.end(), "--out") != args.end();
    if (!out_given) out_dir = fs::path(from_manifest).parent_path().string();
    if (out_dir.empty()) out_dir = ".";
    replay.insert(replay.begin(), {"--out", out_dir});
    return Dispatch(replay, out, err);
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return kUsageError;
  }

  const auto start = std::chrono::steady_clock::now();
  Output output{fs::path(out_dir)};
  try {
    Outcome res;
    if (c_sim->parsed()) {
      res = RunSimulate(sim, output, out);
    } else if (c_ap->parsed()) {
      res = RunApprop(ap, output, out);
    } else if (c_th->parsed()) {
      res = RunTheorem1(th, output, out);
    } else if (c_ro->parsed()) {
      res = RunRogers(ro, output, out);
    } else if (c_ss->parsed()) {
      res = RunStudySim(ss, output, out);
    } else if (c_sv->parsed()) {
      res = RunServe(sv, out);
    }
    if (res.write_manifest) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      WriteManifest(res, output, secs);
      out << fmt::format("wrote {} file(s) and manifest.json to {}\n", output.written().size(),
                         output.dir().string());
    }
    return kOk;
  } catch (const Error& e) {
    PrintError(err, e.code(), e.what());
    return kDomainError;
  } catch (const std::exception& e) {
    PrintError(err, "InternalError", e.what());
    return kDomainError;
  }
}

}  // namespace orchestra::cli
