#include "falsify/error.hpp"

namespace falsify {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::InvalidTemplate: return "InvalidTemplate";
    case ErrorCode::InvalidBindings: return "InvalidBindings";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::NonFiniteCommand: return "NonFiniteCommand";
    case ErrorCode::NoOtherActors: return "NoOtherActors";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::BadPopulationSize: return "BadPopulationSize";
    case ErrorCode::UnevaluatedMember: return "UnevaluatedMember";
    case ErrorCode::UnknownController: return "UnknownController";
    case ErrorCode::FramesUnavailable: return "FramesUnavailable";
    case ErrorCode::InvalidCampaign: return "InvalidCampaign";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace falsify
