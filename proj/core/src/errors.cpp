#include "flowtopo/errors.hpp"

namespace flowtopo {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DisconnectedNetwork: return "DisconnectedNetwork";
    case ErrorCode::NoInternalNodes: return "NoInternalNodes";
    case ErrorCode::NotASpanningTree: return "NotASpanningTree";
    case ErrorCode::RankZero: return "RankZero";
    case ErrorCode::FullDeficiency: return "FullDeficiency";
    case ErrorCode::NoValidPartition: return "NoValidPartition";
    case ErrorCode::NonIntegerCutset: return "NonIntegerCutset";
    case ErrorCode::NotUnique: return "NotUnique";
    case ErrorCode::NotCanonicalizable: return "NotCanonicalizable";
    case ErrorCode::NotArborescence: return "NotArborescence";
    case ErrorCode::AmbiguousParent: return "AmbiguousParent";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NoStableOrder: return "NoStableOrder";
    case ErrorCode::SnapFailure: return "SnapFailure";
    case ErrorCode::EmptySpec: return "EmptySpec";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::InvalidArgument:
      return 2;
    case ErrorCode::RankZero:
    case ErrorCode::FullDeficiency:
    case ErrorCode::NoStableOrder:
    case ErrorCode::NoValidPartition:
      return 3;
    case ErrorCode::SnapFailure:
    case ErrorCode::NonIntegerCutset:
      return 4;
    case ErrorCode::NotUnique:
    case ErrorCode::NotCanonicalizable:
    case ErrorCode::NotArborescence:
    case ErrorCode::AmbiguousParent:
      return 5;
    default:
      return 1;
  }
}

}  // namespace flowtopo
