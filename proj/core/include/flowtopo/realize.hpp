#pragma once

#include "flowtopo/canonical_cutset.hpp"
#include "flowtopo/graph_model.hpp"
#include "flowtopo/nullspace.hpp"
#include "flowtopo/rank_test.hpp"

#include <map>
#include <optional>
#include <vector>

namespace flowtopo {

/// Directed edge of a reconstructed network; target carries the same label as the edge.
struct LabeledEdge {
  EdgeLabel label = 0;
  NodeId source = 0;
  NodeId target = 0;

  friend bool operator==(const LabeledEdge&, const LabeledEdge&) = default;
};

struct Diagnostics {
  int estimated_m = 0;
  std::optional<Partition> partition;
  std::optional<CanonicalCutsetMatrix> canonical;
  Eigen::VectorXd singular_values;
  std::optional<RankTestReport> rank_test;
};

/**
 * Reconstructed arborescence under the node-labelling convention: the root is
 * node e+1 and every other node takes the label of its unique incoming edge.
 */
struct ReconstructionResult {
  NodeId root = 0;
  std::vector<LabeledEdge> edges;           // ascending by label
  std::map<EdgeLabel, NodeId> node_labels;  // edge label -> label of the node it enters
  Diagnostics diagnostics;

  /// Network with nodes 1..root; requires labels 1..e.
  FlowNetwork to_network() const;
};

ReconstructionResult realize_topology(const CanonicalCutsetMatrix& canon);

/// The arborescence rewritten under the labelling convention (no diagnostics).
ReconstructionResult conventional_labeling(const FlowNetwork& arborescence);

/// Exact labelled-edge-set equality; throws LabelMismatch if the label universes differ.
bool verify_against_truth(const ReconstructionResult& result, const FlowNetwork& truth);

}  // namespace flowtopo
