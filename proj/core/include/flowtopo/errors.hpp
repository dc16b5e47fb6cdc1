#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowtopo {

/// Machine-readable failure classes raised by the reconstruction pipeline.
enum class ErrorCode {
  // input / parsing
  ParseError,
  InvalidArgument,
  // graph_model
  DisconnectedNetwork,
  NoInternalNodes,
  NotASpanningTree,
  // nullspace
  RankZero,
  FullDeficiency,
  NoValidPartition,
  NonIntegerCutset,
  // canonical_cutset
  NotUnique,
  NotCanonicalizable,
  // realize
  NotArborescence,
  AmbiguousParent,
  LabelMismatch,
  // noise_pipeline
  NotPositiveDefinite,
  NoStableOrder,
  SnapFailure,
  // synth
  EmptySpec,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Process exit code used by the command-line tool for a given failure class.
///   2 parse error, 3 model-order failure, 4 snap failure, 5 realization failure, 1 otherwise.
int exit_code(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace flowtopo
