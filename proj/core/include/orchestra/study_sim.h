#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "orchestra/study.h"

namespace orchestra::study {

// Headless participant. Each user gets a per-region skill drawn from a Beta
// with the given mean and standard deviation; on each question the user takes
// the suggested action with probability follow_prob and otherwise picks
// uniformly among the allowed actions. Outsourced answers are accepted as is.
struct ScriptedUserPolicy {
  double follow_prob = 0.8;
  std::vector<double> skill_mean = {0.795, 0.545, 0.435};
  std::vector<double> skill_sd = {0.17, 0.21, 0.21};
};

struct StudySimConfig {
  Variant variant = Variant::kOrchestration;
  bool lock_in = true;
  std::size_t n_users = 20;
  std::uint64_t seed = 0;
  ScriptedUserPolicy policy;
  // Overrides for the variant defaults; questions_per_region etc.
  std::size_t questions_per_region = 20;
};

struct UserResult;

// Bank of `per_region` four-choice questions per region with seeded answer
// keys and no recorded agent answers.
QuestionBank SyntheticBank(const std::vector<std::string>& regions,
                           std::size_t per_region, std::uint64_t seed);

// User u sees the same questions, skills and per-question draws in every
// variant for a given seed, so variants are compared on common numbers.
std::vector<UserResult> SimulateStudy(const StudySimConfig& config,
                                      std::shared_ptr<const QuestionBank> bank = nullptr);

double MeanAccuracy(const std::vector<UserResult>& users);

struct InvariantReport {
  bool score_integrity = true;
  bool region_balance = true;
  bool constrained_safety = true;
  bool lock_in_fixity = true;
  bool all() const {
    return score_integrity && region_balance && constrained_safety && lock_in_fixity;
  }
};

struct UserResult {
  std::size_t user = 0;
  std::vector<double> skill;
  SessionSummary summary;
  InvariantReport invariants;
};

// Checks one finished session's log against the protocol invariants.
InvariantReport CheckInvariants(const Session& session);

// No SELF answer in region r directly after a wrong SELF answer in r.
bool ConstrainedSafe(std::span<const Event> events);

// Long format: variant,lock_in,user,region,served,correct,accuracy,self_rate,
// human_rate,ai_rate,score. One row per region plus an "overall" row.
void WriteStudyCsvHeader(std::ostream& out);
void WriteStudyCsv(std::ostream& out, const StudySimConfig& config,
                   const std::vector<UserResult>& users,
                   const std::vector<std::string>& regions);

}  // namespace orchestra::study
