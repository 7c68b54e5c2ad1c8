#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rotorbar {

enum class ErrorKind {
  Configuration,
  InsufficientSignal,
  NoCrossings,
  EmptySignal,
  DegenerateSignal,
  EmptyNode,
  EmptyDataset,
  FeatureArity,
  DegenerateLabels,
  Convergence,
  InsufficientClassSamples,
  UndefinedMetric,
  Io,
  Format,
};

std::string_view to_string(ErrorKind kind);

// Base of every error raised by the library. The kind lets callers (the CLI
// in particular) map failures to exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double final_gradient_norm);
  double final_gradient_norm() const noexcept { return gradient_norm_; }

 private:
  double gradient_norm_;
};

}  // namespace rotorbar
