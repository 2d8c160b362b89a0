#pragma once

#include <stdexcept>
#include <string>

namespace mvopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MVOPT_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  };

MVOPT_DEFINE_ERROR(ParseError)
MVOPT_DEFINE_ERROR(ValidationError)
MVOPT_DEFINE_ERROR(SyntaxError)
MVOPT_DEFINE_ERROR(UnknownRelation)
MVOPT_DEFINE_ERROR(UnknownColumn)
MVOPT_DEFINE_ERROR(TypeMismatch)
MVOPT_DEFINE_ERROR(AggregateNotIncremental)
MVOPT_DEFINE_ERROR(BudgetExceeded)
MVOPT_DEFINE_ERROR(NullDifferential)
MVOPT_DEFINE_ERROR(PlanInconsistent)
MVOPT_DEFINE_ERROR(SchemaMismatch)
MVOPT_DEFINE_ERROR(TooLarge)

#undef MVOPT_DEFINE_ERROR

}  // namespace mvopt
