#pragma once

#include <stdexcept>
#include <string>

namespace arlequin {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ARLEQUIN_DECLARE_ERROR(Name)      \
  class Name : public Error {             \
   public:                                \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  };

ARLEQUIN_DECLARE_ERROR(NonDivisibleGeometry)
ARLEQUIN_DECLARE_ERROR(DegenerateSpec)
ARLEQUIN_DECLARE_ERROR(UnknownTag)
ARLEQUIN_DECLARE_ERROR(UnknownCoefficient)
ARLEQUIN_DECLARE_ERROR(InvalidParameter)
ARLEQUIN_DECLARE_ERROR(NonSpdCoefficient)
ARLEQUIN_DECLARE_ERROR(MismatchedRegion)
ARLEQUIN_DECLARE_ERROR(SingularGram)
ARLEQUIN_DECLARE_ERROR(SolverFailure)
ARLEQUIN_DECLARE_ERROR(CollinearEnrichment)
ARLEQUIN_DECLARE_ERROR(SingularKkt)
ARLEQUIN_DECLARE_ERROR(NoDescent)
ARLEQUIN_DECLARE_ERROR(NonPositiveIterate)
ARLEQUIN_DECLARE_ERROR(InfeasibleBounds)
ARLEQUIN_DECLARE_ERROR(ConfigError)

#undef ARLEQUIN_DECLARE_ERROR

}  // namespace arlequin
