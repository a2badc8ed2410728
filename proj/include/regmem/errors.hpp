#pragma once

#include <stdexcept>
#include <string>

namespace regmem {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidParams : Error {
  using Error::Error;
};
struct NoEnabledAction : Error {
  using Error::Error;
};
struct ActorUnavailable : Error {
  using Error::Error;
};
struct NonTermination : Error {
  using Error::Error;
};
struct FailedServerInFingerprint : Error {
  using Error::Error;
};
struct MalformedHistory : Error {
  using Error::Error;
};
struct SearchBudgetExceeded : Error {
  using Error::Error;
};
struct SingularSystem : Error {
  using Error::Error;
};
struct InconsistentSymbols : Error {
  using Error::Error;
};
struct FieldTooLarge : Error {
  using Error::Error;
};
struct AssumptionViolation : Error {
  using Error::Error;
};
struct HypothesisViolation : Error {
  using Error::Error;
};
struct SearchFailed : Error {
  using Error::Error;
};
struct NoFlip : Error {
  using Error::Error;
};

}  // namespace regmem
