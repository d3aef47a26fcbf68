#pragma once

#include <stdexcept>
#include <string>

namespace nocrit {

// Every failure carries a short clause tag naming the property that broke,
// e.g. "fixed-point:semi-contraction". The CLI copies it into failure records.
class Error : public std::runtime_error {
 public:
  Error(std::string clause, const std::string& what)
      : std::runtime_error(clause + ": " + what), clause_(std::move(clause)) {}
  const std::string& clause() const noexcept { return clause_; }

 private:
  std::string clause_;
};

#define NOCRIT_ERROR_TYPE(Name)                                   \
  class Name : public Error {                                     \
   public:                                                        \
    using Error::Error;                                           \
  };

NOCRIT_ERROR_TYPE(TruncationError)
NOCRIT_ERROR_TYPE(DomainError)
NOCRIT_ERROR_TYPE(EquatorError)
NOCRIT_ERROR_TYPE(SingularPointError)
NOCRIT_ERROR_TYPE(BracketError)
NOCRIT_ERROR_TYPE(ContractViolation)
NOCRIT_ERROR_TYPE(ExcludedSetError)
NOCRIT_ERROR_TYPE(CertificationError)
NOCRIT_ERROR_TYPE(ScheduleError)
NOCRIT_ERROR_TYPE(WindowConsistencyError)
NOCRIT_ERROR_TYPE(InvalidGaugeError)
NOCRIT_ERROR_TYPE(CoverageError)
NOCRIT_ERROR_TYPE(CoverError)
NOCRIT_ERROR_TYPE(CapacityError)
NOCRIT_ERROR_TYPE(OptimizationError)
NOCRIT_ERROR_TYPE(OracleError)
NOCRIT_ERROR_TYPE(BudgetError)
NOCRIT_ERROR_TYPE(ConfigError)

#undef NOCRIT_ERROR_TYPE

// Wraps a failure from a pipeline stage, keeping the original clause.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const Error& inner)
      : Error(inner.clause(), "[" + stage + "] " + inner.what()), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace nocrit
