#pragma once

#include <stdexcept>
#include <string>

namespace latflow {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;

 protected:
  Error(const char* tag, const std::string& what) : std::runtime_error(std::string(tag) + ": " + what) {}
};

#define LATFLOW_DEFINE_ERROR_FROM(Name, Base)                      \
  class Name : public Base {                                       \
   public:                                                         \
    explicit Name(const std::string& what) : Name(#Name, what) {}  \
                                                                   \
   protected:                                                      \
    Name(const char* tag, const std::string& what) : Base(tag, what) {} \
  }
#define LATFLOW_DEFINE_ERROR(Name) LATFLOW_DEFINE_ERROR_FROM(Name, Error)

// Lattice core.
LATFLOW_DEFINE_ERROR(NonInvertibleBasis);
LATFLOW_DEFINE_ERROR(PrecisionInsufficient);
LATFLOW_DEFINE_ERROR(NumericOverflow);
LATFLOW_DEFINE_ERROR(InvalidSubspace);

// Statistics and scans.
LATFLOW_DEFINE_ERROR(TooFewSamples);
LATFLOW_DEFINE_ERROR(TooFewRecords);
LATFLOW_DEFINE_ERROR(BudgetExceeded);
LATFLOW_DEFINE_ERROR_FROM(EnumerationBudgetExceeded, BudgetExceeded);
LATFLOW_DEFINE_ERROR(DomainError);
LATFLOW_DEFINE_ERROR(SolveFailure);
LATFLOW_DEFINE_ERROR(FlatFunction);
LATFLOW_DEFINE_ERROR(UnachievableRate);

// Input handling.
LATFLOW_DEFINE_ERROR(ParseError);
LATFLOW_DEFINE_ERROR(DimensionMismatch);
LATFLOW_DEFINE_ERROR(ConfigInvalid);
LATFLOW_DEFINE_ERROR(MissingArtifact);

#undef LATFLOW_DEFINE_ERROR
#undef LATFLOW_DEFINE_ERROR_FROM

}  // namespace latflow
