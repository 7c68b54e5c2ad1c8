#include "rotorbar/errors.hpp"

namespace rotorbar {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Configuration: return "ConfigurationError";
    case ErrorKind::InsufficientSignal: return "InsufficientSignal";
    case ErrorKind::NoCrossings: return "NoCrossings";
    case ErrorKind::EmptySignal: return "EmptySignal";
    case ErrorKind::DegenerateSignal: return "DegenerateSignal";
    case ErrorKind::EmptyNode: return "EmptyNode";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::FeatureArity: return "FeatureArityError";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::Convergence: return "ConvergenceError";
    case ErrorKind::InsufficientClassSamples: return "InsufficientClassSamples";
    case ErrorKind::UndefinedMetric: return "UndefinedMetric";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Format: return "FormatError";
  }
  return "Error";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

ConvergenceError::ConvergenceError(const std::string& what, double final_gradient_norm)
    : Error(ErrorKind::Convergence, what), gradient_norm_(final_gradient_norm) {}

}  // namespace rotorbar
