// errors.hpp — exception types thrown on contract violations across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace cavex {

// Common base so callers can catch all library errors at once.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// transmon
struct FluxSweetSpotSingularity : Error {
  explicit FluxSweetSpotSingularity(const std::string& msg) : Error(msg) {}
};
struct ModeIndexOutOfRange : Error {
  explicit ModeIndexOutOfRange(const std::string& msg) : Error(msg) {}
};
struct InsufficientData : Error {
  explicit InsufficientData(const std::string& msg) : Error(msg) {}
};

// dispersive
struct DispersiveBreakdown : Error {
  explicit DispersiveBreakdown(const std::string& msg) : Error(msg) {}
};
struct ZeroDetuning : Error {
  explicit ZeroDetuning(const std::string& msg) : Error(msg) {}
};
struct DegenerateUncoupled : Error {
  explicit DegenerateUncoupled(const std::string& msg) : Error(msg) {}
};

// exact
struct DimensionCap : Error {
  explicit DimensionCap(const std::string& msg) : Error(msg) {}
};
struct ConvergenceFailure : Error {
  explicit ConvergenceFailure(const std::string& msg) : Error(msg) {}
};
struct StateIdentificationAmbiguous : Error {
  explicit StateIdentificationAmbiguous(const std::string& msg) : Error(msg) {}
};
struct NotNormalized : Error {
  explicit NotNormalized(const std::string& msg) : Error(msg) {}
};

// spectroscopy
struct IntermediateStateResonance : Error {
  explicit IntermediateStateResonance(const std::string& msg) : Error(msg) {}
};

// fitting
struct NotBracketed : Error {
  explicit NotBracketed(const std::string& msg) : Error(msg) {}
};
struct SingularFit : Error {
  explicit SingularFit(const std::string& msg) : Error(msg) {}
};
struct GuardViolation : Error {
  explicit GuardViolation(const std::string& msg) : Error(msg) {}
};
struct SingularInformation : Error {
  explicit SingularInformation(const std::string& msg) : Error(msg) {}
};

// io / cli
struct ParseError : Error {
  ParseError(const std::string& file, long line, const std::string& msg)
      : Error(file + ":" + std::to_string(line) + ": " + msg), line_number(line) {}
  long line_number;
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace cavex
