#pragma once

#include <stdexcept>
#include <string>

namespace wk {

// Every failure raised by the library derives from wk::Error so that callers
// (the CLI in particular) can map error kinds onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define WK_DEFINE_ERROR(Name)                                       \
  class Name : public Error {                                       \
   public:                                                          \
    using Error::Error;                                             \
    const char* kind() const noexcept override { return #Name; }    \
  };

WK_DEFINE_ERROR(OutOfChart)
WK_DEFINE_ERROR(DegenerateMetric)
WK_DEFINE_ERROR(NonTimelike)
WK_DEFINE_ERROR(GaugeViolated)
WK_DEFINE_ERROR(StepUnderflow)
WK_DEFINE_ERROR(DifferentiationFailure)
WK_DEFINE_ERROR(QuadratureFailure)
WK_DEFINE_ERROR(ConfigError)

#undef WK_DEFINE_ERROR

}  // namespace wk
