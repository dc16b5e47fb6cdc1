#pragma once

#include "flowtopo/graph_model.hpp"
#include "flowtopo/nullspace.hpp"

#include <span>
#include <unordered_map>
#include <vector>

namespace flowtopo {

/// One branch/chord exchange performed while canonicalising.
struct Interchange {
  int row = 0;
  EdgeLabel branch_out = 0;  // branch that became a chord
  EdgeLabel chord_in = 0;    // chord that became the row's branch

  friend bool operator==(const Interchange&, const Interchange&) = default;
};

/**
 * Cutset matrix whose branches are exactly the non-sink flow edges: every row is
 * +1 on its branch and 0 / -1 on the chords.
 */
struct CanonicalCutsetMatrix {
  CutsetMatrix inner;
  std::vector<Interchange> provenance;
};

enum class PivotStrategy {
  UniqueSign,        // edge whose coefficient sign differs from all others in the row
  MaxFlowMagnitude,  // edge with the largest mean |flow| in the row (needs flow magnitudes)
};

struct CanonicalizeOptions {
  PivotStrategy strategy = PivotStrategy::UniqueSign;
  std::unordered_map<EdgeLabel, double> flow_magnitude;
};

/// The single edge of a cutset row whose sign differs from every other nonzero entry.
EdgeLabel unique_sign_edge(std::span<const int> row, std::span<const EdgeLabel> labels);

CanonicalCutsetMatrix canonicalize(const CutsetMatrix& cutset, const CanonicalizeOptions& options = {});

/// Mean absolute flow per edge, for PivotStrategy::MaxFlowMagnitude.
std::unordered_map<EdgeLabel, double> mean_flow_magnitudes(const FlowDataMatrix& data);

}  // namespace flowtopo
