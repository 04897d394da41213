#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "orchestra/error.h"
#include "orchestra/study_service.h"

namespace orchestra::study {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json ErrorBody(std::string_view code, std::string_view message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

std::vector<std::string> SplitPath(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      ++i;
      continue;
    }
    std::size_t j = path.find('/', i);
    if (j == std::string_view::npos) j = path.size();
    parts.emplace_back(path.substr(i, j - i));
    i = j;
  }
  return parts;
}

json ParseBody(std::string_view body) {
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  try {
    json j = json::parse(body);
    if (!j.is_object()) throw Error("BadRequest", "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error("BadRequest", std::string("malformed JSON body: ") + e.what());
  }
}

template <typename T>
T Field(const json& j, const char* name) {
  if (!j.contains(name)) throw Error("BadRequest", fmt::format("missing field '{}'", name));
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error("BadRequest", fmt::format("field '{}' has the wrong type", name));
  }
}

std::string QuestionIdField(const json& j) {
  if (j.contains("question_id") && !j.at("question_id").is_string()) {
    return j.at("question_id").dump();
  }
  return Field<std::string>(j, "question_id");
}

json OptionalToJson(const std::optional<bool>& v) { return v ? json(*v) : json(nullptr); }
json OptionalToJson(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

// ---------------------------------------------------------------- store

SessionStore::SessionStore(std::shared_ptr<const QuestionBank> bank,
                           std::optional<fs::path> persist_dir, Clock clock)
    : bank_(std::move(bank)), dir_(std::move(persist_dir)),
      clock_(clock ? std::move(clock) : SteadyClock()) {
  if (!bank_) throw BankError("session store needs a question bank");
  if (dir_) fs::create_directories(*dir_);
}

std::string SessionStore::Create(const StudyConfig& config,
                                 std::optional<std::uint64_t> seed) {
  static thread_local std::random_device rd;
  auto draw64 = [] {
    return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
  };
  const std::uint64_t s = seed.value_or(draw64());
  std::string id;
  {
    std::shared_lock lock(mu_);
    do {
      id = fmt::format("{:016x}{:016x}", draw64(), draw64());
    } while (sessions_.count(id));
  }
  Session session(id, config, s, bank_, clock_);
  if (dir_) {
    json meta = {{"id", id}, {"seed", s}, {"config", json::parse(StudyConfigToJson(config))}};
    std::ofstream(*dir_ / (id + ".meta.json")) << meta.dump() << '\n';
    std::ofstream(*dir_ / (id + ".events.jsonl"), std::ios::trunc);
    AttachPersistence(session, s);
  }
  auto entry = std::make_shared<Entry>(std::move(session));
  std::unique_lock lock(mu_);
  sessions_.emplace(id, std::move(entry));
  return id;
}

void SessionStore::AttachPersistence(Session& s, const std::uint64_t) {
  fs::path log = *dir_ / (s.id() + ".events.jsonl");
  s.on_event = [log](const Event& e) {
    std::ofstream out(log, std::ios::app);
    out << EventToJson(e) << '\n';
    out.flush();
  };
}

std::size_t SessionStore::Recover() {
  if (!dir_) return 0;
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(*dir_)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = ".meta.json";
    if (name.size() <= suffix.size() ||
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    json meta = json::parse(ReadFile(entry.path()));
    const std::string id = meta.at("id").get<std::string>();
    const std::uint64_t seed = meta.at("seed").get<std::uint64_t>();
    StudyConfig config = StudyConfigFromJson(meta.at("config").dump());
    std::vector<Event> events;
    std::istringstream log(ReadFile(*dir_ / (id + ".events.jsonl")));
    std::string line;
    while (std::getline(log, line)) {
      if (!line.empty()) events.push_back(EventFromJson(line));
    }
    Session s = Session::Replay(id, config, seed, bank_, events, clock_);
    AttachPersistence(s, seed);
    std::unique_lock lock(mu_);
    sessions_.insert_or_assign(id, std::make_shared<Entry>(std::move(s)));
    ++n;
  }
  return n;
}

std::size_t SessionStore::size() const {
  std::shared_lock lock(mu_);
  return sessions_.size();
}

std::shared_ptr<SessionStore::Entry> SessionStore::Find(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession("no session '" + id + "'");
  return it->second;
}

// ---------------------------------------------------------------- json views

std::string QuestionViewToJson(const QuestionView& v) {
  json j;
  j["question_id"] = v.question_id;
  j["index"] = v.index;
  j["total"] = v.total;
  j["region"] = v.region;
  j["region_name"] = v.region_name;
  j["prompt"] = v.prompt;
  j["choices"] = v.choices;
  j["suggestion"] = v.suggestion ? json(ToString(*v.suggestion)) : json(nullptr);
  j["suggestion_text"] = v.suggestion_text ? json(*v.suggestion_text) : json(nullptr);
  j["forced_outsource"] = v.forced_outsource;
  json actions = json::array();
  for (Action a : v.allowed_actions) actions.push_back(ToString(a));
  j["allowed_actions"] = actions;
  j["score"] = v.score;
  if (v.pending_agent) {
    j["pending"] = {{"agent", ToString(*v.pending_agent)},
                    {"agent_choice", *v.pending_agent_choice}};
  } else {
    j["pending"] = nullptr;
  }
  return j.dump();
}

std::string SummaryToJson(const SessionSummary& s, const std::vector<std::string>& regions) {
  json j;
  json rs = json::array();
  for (std::size_t m = 0; m < s.regions.size(); ++m) {
    const auto& r = s.regions[m];
    rs.push_back({{"region", m},
                  {"region_name", m < regions.size() ? regions[m] : std::string()},
                  {"served", r.served},
                  {"correct", r.correct},
                  {"accuracy", r.accuracy},
                  {"self_rate", r.actor_rate[0]},
                  {"human_rate", r.actor_rate[1]},
                  {"ai_rate", r.actor_rate[2]}});
  }
  j["regions"] = rs;
  j["served"] = s.served;
  j["correct"] = s.correct;
  j["accuracy"] = s.accuracy;
  j["score"] = s.score;
  j["finished"] = s.finished;
  json events = json::array();
  for (const Event& e : s.events) events.push_back(json::parse(EventToJson(e)));
  j["events"] = events;
  return j.dump();
}

// ---------------------------------------------------------------- api

int StudyApi::StatusFor(std::string_view code) {
  if (code == "UnknownSession" || code == "NotFound") return 404;
  if (code == "TooFast") return 425;
  if (code == "ForcedOutsource") return 403;
  if (code == "SessionDone" || code == "StaleQuestion" || code == "ProtocolError") return 409;
  if (code == "MethodNotAllowed") return 405;
  return 400;
}

HttpResponse StudyApi::Handle(std::string_view method, std::string_view path,
                              std::string_view body) {
  auto ok = [](const json& j) { return HttpResponse{200, j.dump()}; };
  auto fail = [](std::string_view code, std::string_view message) {
    return HttpResponse{StatusFor(code), ErrorBody(code, message).dump()};
  };
  const auto parts = SplitPath(path);
  try {
    if (parts.empty() || parts[0] != "sessions" || parts.size() > 3) {
      return fail("NotFound", fmt::format("no route for {}", path));
    }
    if (parts.size() == 1) {
      if (method != "POST") return fail("MethodNotAllowed", "use POST /sessions");
      json req = ParseBody(body);
      std::optional<std::uint64_t> seed;
      if (req.contains("seed")) {
        seed = Field<std::uint64_t>(req, "seed");
        req.erase("seed");
      }
      StudyConfig config = defaults_;
      if (!req.empty()) {
        if (!req.contains("variant") && !req.contains("lock_in")) {
          json merged = json::parse(StudyConfigToJson(defaults_));
          merged.update(req);
          req = merged;
        }
        config = StudyConfigFromJson(req.dump());
      }
      std::string id = store_.Create(config, seed);
      std::string question = store_.With(id, [](Session& s) {
        return QuestionViewToJson(s.GetQuestion());
      });
      return ok({{"session_id", id}, {"question", json::parse(question)}});
    }
    if (parts.size() == 2) return fail("NotFound", fmt::format("no route for {}", path));

    const std::string& id = parts[1];
    const std::string& verb = parts[2];
    if (verb == "question") {
      if (method != "GET") return fail("MethodNotAllowed", "use GET");
      return ok(json::parse(store_.With(id, [](Session& s) {
        return QuestionViewToJson(s.GetQuestion());
      })));
    }
    if (verb == "summary") {
      if (method != "GET") return fail("MethodNotAllowed", "use GET");
      return ok(json::parse(store_.With(id, [](Session& s) {
        return SummaryToJson(s.Summary(), s.config().regions);
      })));
    }
    if (method != "POST") return fail("MethodNotAllowed", "use POST");
    json req = ParseBody(body);
    if (verb == "answer") {
      const std::string qid = QuestionIdField(req);
      const auto choice = Field<std::size_t>(req, "choice");
      const double elapsed = req.contains("elapsed_s") ? Field<double>(req, "elapsed_s") : 0.0;
      return ok(json::parse(store_.With(id, [&](Session& s) {
        AnswerResult r = s.AnswerSelf(qid, choice, elapsed);
        return json{{"correct", r.correct},
                    {"score_delta", r.score_delta},
                    {"new_score", r.new_score},
                    {"finished", r.finished}}
            .dump();
      })));
    }
    if (verb == "outsource") {
      const std::string qid = QuestionIdField(req);
      Actor agent;
      try {
        agent = ParseActor(Field<std::string>(req, "agent"));
      } catch (const ConfigError& e) {
        throw Error("BadRequest", e.what());
      }
      return ok(json::parse(store_.With(id, [&](Session& s) {
        OutsourceResult r = s.Outsource(qid, agent);
        return json{{"agent_choice", r.agent_choice},
                    {"correct", OptionalToJson(r.correct)},
                    {"score_delta", OptionalToJson(r.score_delta)},
                    {"new_score", OptionalToJson(r.new_score)},
                    {"override_allowed", r.override_allowed},
                    {"finished", r.finished}}
            .dump();
      })));
    }
    if (verb == "finalize") {
      const std::string qid = QuestionIdField(req);
      const auto choice = Field<std::size_t>(req, "choice");
      return ok(json::parse(store_.With(id, [&](Session& s) {
        AnswerResult r = s.FinalizeOverride(qid, choice);
        return json{{"correct", r.correct},
                    {"score_delta", r.score_delta},
                    {"new_score", r.new_score},
                    {"finished", r.finished}}
            .dump();
      })));
    }
    return fail("NotFound", fmt::format("no route for {}", path));
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  }
}

bool Serve(StudyApi& api, const std::string& host, int port,
           std::function<void(const std::string&)> log) {
  httplib::Server server;
  auto handler = [&api, log](const httplib::Request& req, httplib::Response& res) {
    HttpResponse r = api.Handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body, "application/json");
    if (log) log(fmt::format("{} {} -> {}", req.method, req.path, r.status));
  };
  server.Get(R"(/sessions/.*)", handler);
  server.Post(R"(/sessions(/.*)?)", handler);
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });
  if (!server.bind_to_port(host, port)) return false;
  if (log) log(fmt::format("listening on {}:{}", host, port));
  return server.listen_after_bind();
}

}  // namespace orchestra::study
