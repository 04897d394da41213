#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "orchestra/study.h"

namespace orchestra::study {

// Owns live sessions. Operations on one session are serialized by that
// session's mutex; the bank is shared read-only.
class SessionStore {
 public:
  // With a persistence directory every session writes <id>.meta.json and an
  // append-only <id>.events.jsonl there.
  SessionStore(std::shared_ptr<const QuestionBank> bank,
               std::optional<std::filesystem::path> persist_dir = std::nullopt,
               Clock clock = nullptr);

  // Seed defaults to a fresh random value. Returns the session id.
  std::string Create(const StudyConfig& config,
                     std::optional<std::uint64_t> seed = std::nullopt);

  // Runs fn with exclusive access to the session. Throws UnknownSession.
  template <typename Fn>
  auto With(const std::string& id, Fn&& fn) {
    auto entry = Find(id);
    std::lock_guard lock(entry->mu);
    return fn(entry->session);
  }

  // Reloads every session found in the persistence directory by replaying
  // its log. Returns the number recovered.
  std::size_t Recover();

  std::size_t size() const;
  const QuestionBank& bank() const { return *bank_; }

 private:
  struct Entry {
    explicit Entry(Session s) : session(std::move(s)) {}
    std::mutex mu;
    Session session;
  };

  std::shared_ptr<Entry> Find(const std::string& id) const;
  void AttachPersistence(Session& s, const std::uint64_t seed);

  std::shared_ptr<const QuestionBank> bank_;
  std::optional<std::filesystem::path> dir_;
  Clock clock_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

// Transport-independent JSON API:
//   POST /sessions                      config -> {session_id, question}
//   GET  /sessions/{id}/question
//   POST /sessions/{id}/answer          {question_id, choice, elapsed_s}
//   POST /sessions/{id}/outsource       {question_id, agent}
//   POST /sessions/{id}/finalize        {question_id, choice}
//   GET  /sessions/{id}/summary
// Errors: 4xx with {"error": {"code", "message"}}.
class StudyApi {
 public:
  explicit StudyApi(SessionStore& store, StudyConfig defaults = StudyConfig::Defaults(
                                             Variant::kOrchestration, true))
      : store_(store), defaults_(std::move(defaults)) {}

  HttpResponse Handle(std::string_view method, std::string_view path,
                      std::string_view body);

  static int StatusFor(std::string_view error_code);

 private:
  SessionStore& store_;
  StudyConfig defaults_;
};

std::string QuestionViewToJson(const QuestionView& v);
std::string SummaryToJson(const SessionSummary& s, const std::vector<std::string>& regions);

// Blocks serving the API over HTTP until the process is stopped.
// Returns false if the port could not be bound.
bool Serve(StudyApi& api, const std::string& host, int port,
           std::function<void(const std::string&)> log = nullptr);

}  // namespace orchestra::study
