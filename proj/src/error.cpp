#include "levyml/error.hpp"

namespace levyml {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NoCycle: return "NoCycle";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::SingularAtZero: return "SingularAtZero";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::Unstable: return "Unstable";
    case ErrorCode::DegenerateField: return "DegenerateField";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnknownArtifact: return "UnknownArtifact";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace levyml
