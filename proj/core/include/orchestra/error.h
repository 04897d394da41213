#pragma once

#include <stdexcept>
#include <string>

namespace orchestra {

// Base class for every domain error. code() is the machine-readable name
// surfaced by the CLI and the HTTP API.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define ORCHESTRA_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

ORCHESTRA_DEFINE_ERROR(IndexError);
ORCHESTRA_DEFINE_ERROR(InvalidPrior);
ORCHESTRA_DEFINE_ERROR(DegeneratePosterior);
ORCHESTRA_DEFINE_ERROR(InvalidCost);
ORCHESTRA_DEFINE_ERROR(NoFeasibleAgent);
ORCHESTRA_DEFINE_ERROR(ConfigError);
ORCHESTRA_DEFINE_ERROR(ExtinctionError);
ORCHESTRA_DEFINE_ERROR(BankError);
ORCHESTRA_DEFINE_ERROR(SessionDone);
ORCHESTRA_DEFINE_ERROR(TooFast);
ORCHESTRA_DEFINE_ERROR(ForcedOutsource);
ORCHESTRA_DEFINE_ERROR(StaleQuestion);
ORCHESTRA_DEFINE_ERROR(ProtocolError);
ORCHESTRA_DEFINE_ERROR(UnknownSession);

#undef ORCHESTRA_DEFINE_ERROR

}  // namespace orchestra
