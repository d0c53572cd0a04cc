#pragma once

#include <stdexcept>
#include <string>

namespace assp {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ASSP_DEFINE_ERROR(Name)                          \
  class Name : public Error {                            \
   public:                                               \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

ASSP_DEFINE_ERROR(DisconnectedGraph);
ASSP_DEFINE_ERROR(SelfLoop);
ASSP_DEFINE_ERROR(InvalidNode);
ASSP_DEFINE_ERROR(DimensionMismatch);
ASSP_DEFINE_ERROR(InfeasibleDomain);
ASSP_DEFINE_ERROR(OutOfWindow);
ASSP_DEFINE_ERROR(InvalidHyperparams);
ASSP_DEFINE_ERROR(NoFeasibleDelta);
ASSP_DEFINE_ERROR(DegenerateSeries);
ASSP_DEFINE_ERROR(InvalidConfig);
ASSP_DEFINE_ERROR(ParseError);
ASSP_DEFINE_ERROR(ValidationError);

#undef ASSP_DEFINE_ERROR

}  // namespace assp
