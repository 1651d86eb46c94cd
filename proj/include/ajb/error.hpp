#pragma once

#include <stdexcept>
#include <string>

namespace ajb {

enum class ErrorKind {
  Length,     // sequence length contract violated
  Numeric,    // non-finite or out-of-range values
  Format,     // malformed file or incompatible sample format
  Parameter,  // scalar parameter outside its domain
  Input,      // model input does not satisfy the model contract
  Config,     // inconsistent attack/run configuration
  Metric,     // metric undefined on the given records
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define AJB_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

AJB_DEFINE_ERROR(LengthError, Length)
AJB_DEFINE_ERROR(NumericError, Numeric)
AJB_DEFINE_ERROR(FormatError, Format)
AJB_DEFINE_ERROR(ParameterError, Parameter)
AJB_DEFINE_ERROR(InputError, Input)
AJB_DEFINE_ERROR(ConfigError, Config)
AJB_DEFINE_ERROR(MetricError, Metric)

#undef AJB_DEFINE_ERROR

}  // namespace ajb
