#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdef {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// exprlang
struct SyntaxError : Error {
  SyntaxError(std::size_t pos, std::vector<std::string> exp, const std::string& msg)
      : Error(msg), position(pos), expected(std::move(exp)) {}
  std::size_t position;
  std::vector<std::string> expected;
};

struct UnknownSymbol : Error {
  UnknownSymbol(std::string sym, std::size_t pos)
      : Error("unknown symbol '" + sym + "' at position " + std::to_string(pos)),
        name(std::move(sym)), position(pos) {}
  std::string name;
  std::size_t position;
};

struct EvaluationError : Error {
  using Error::Error;
};
struct DomainError : EvaluationError {
  using EvaluationError::EvaluationError;
};
struct DivisionByZero : EvaluationError {
  using EvaluationError::EvaluationError;
};

// chart
struct ChartFormatError : Error {
  using Error::Error;
};
struct WrongDimension : Error {
  using Error::Error;
};

// sbrana
struct JetOrderTooLow : Error {
  using Error::Error;
};
struct DegenerateStack : Error {
  using Error::Error;
};
struct StepFailure : Error {
  using Error::Error;
};

// moduli
struct NotAdmissible : Error {
  using Error::Error;
};
struct ZeroEntry : Error {
  using Error::Error;
};
struct Singular : Error {
  using Error::Error;
};

// gauss
struct SingularMetric : Error {
  using Error::Error;
};
struct SingularP : Error {
  using Error::Error;
};

// deform
struct ZeroPhi : Error {
  using Error::Error;
};
struct ZeroShapeValue : Error {
  using Error::Error;
};
struct IntegrabilityTooPoor : Error {
  using Error::Error;
};
struct NotSupported : Error {
  using Error::Error;
};

// curves
struct NotPolarNormalized : Error {
  using Error::Error;
};
struct SharedDimensionNotTwo : Error {
  using Error::Error;
};
struct DegenerateSpan : Error {
  using Error::Error;
};
struct EmptyInterval : Error {
  using Error::Error;
};

}  // namespace gdef
