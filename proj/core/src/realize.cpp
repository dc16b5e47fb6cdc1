#include "flowtopo/realize.hpp"

#include "flowtopo/errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace flowtopo {

namespace {

NodeId root_label(std::span<const EdgeLabel> labels) {
  return labels.empty() ? 1 : *std::max_element(labels.begin(), labels.end()) + 1;
}

}  // namespace

FlowNetwork ReconstructionResult::to_network() const {
  std::vector<Edge> out(edges.size());
  for (const auto& edge : edges) {
    if (edge.label < 1 || edge.label > static_cast<int>(edges.size())) {
      throw Error(ErrorCode::InvalidArgument, "to_network needs edge labels 1..e");
    }
    out[static_cast<size_t>(edge.label - 1)] = {edge.source, edge.target};
  }
  return FlowNetwork(root, std::move(out));
}

ReconstructionResult realize_topology(const CanonicalCutsetMatrix& canon) {
  const CutsetMatrix& c = canon.inner;
  const int m = c.rows();
  const int chords = c.cols() - m;
  const auto branch_labels = c.branches();
  const auto chord_labels = c.chords();

  std::vector<std::vector<int>> chord_sets(static_cast<size_t>(m));
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < chords; ++j) {
      const int v = c.entries()(k, m + j);
      if (v > 0) {
        throw Error(ErrorCode::NotArborescence,
                    "row for x" + std::to_string(branch_labels[static_cast<size_t>(k)]) + " has a +1 chord");
      }
      if (v < 0) chord_sets[static_cast<size_t>(k)].push_back(j);
    }
    if (chord_sets[static_cast<size_t>(k)].empty()) {
      throw Error(ErrorCode::NotArborescence,
                  "branch x" + std::to_string(branch_labels[static_cast<size_t>(k)]) + " feeds no sink flow");
    }
  }

  // Root row first: descending nonzero count, ties by branch label.
  std::vector<int> order(static_cast<size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto na = chord_sets[static_cast<size_t>(a)].size();
    const auto nb = chord_sets[static_cast<size_t>(b)].size();
    if (na != nb) return na > nb;
    return branch_labels[static_cast<size_t>(a)] < branch_labels[static_cast<size_t>(b)];
  });

  std::vector<EdgeLabel> all_labels(branch_labels.begin(), branch_labels.end());
  all_labels.insert(all_labels.end(), chord_labels.begin(), chord_labels.end());
  const NodeId root = root_label(all_labels);

  // owner[j]: most recently placed row containing chord j, i.e. the smallest
  // chord set seen so far that contains it. Placed sets must stay laminar.
  std::vector<int> owner(static_cast<size_t>(chords), -1);
  std::vector<NodeId> parent(static_cast<size_t>(m), root);
  for (int k : order) {
    const auto& set = chord_sets[static_cast<size_t>(k)];
    const int p = owner[static_cast<size_t>(set.front())];
    for (int j : set) {
      if (owner[static_cast<size_t>(j)] != p) {
        throw Error(ErrorCode::NotArborescence,
                    "chord set of x" + std::to_string(branch_labels[static_cast<size_t>(k)]) +
                        " overlaps an incomparable chord set");
      }
    }
    if (p >= 0) {
      if (chord_sets[static_cast<size_t>(p)].size() == set.size()) {
        throw Error(ErrorCode::AmbiguousParent,
                    "x" + std::to_string(branch_labels[static_cast<size_t>(k)]) + " and x" +
                        std::to_string(branch_labels[static_cast<size_t>(p)]) + " have identical chord sets");
      }
      parent[static_cast<size_t>(k)] = branch_labels[static_cast<size_t>(p)];
    }
    for (int j : set) owner[static_cast<size_t>(j)] = k;
  }

  ReconstructionResult result;
  result.root = root;
  for (int k = 0; k < m; ++k) {
    const EdgeLabel label = branch_labels[static_cast<size_t>(k)];
    result.edges.push_back({label, parent[static_cast<size_t>(k)], label});
  }
  for (int j = 0; j < chords; ++j) {
    const EdgeLabel label = chord_labels[static_cast<size_t>(j)];
    const int o = owner[static_cast<size_t>(j)];
    result.edges.push_back({label, o >= 0 ? branch_labels[static_cast<size_t>(o)] : root, label});
  }
  std::sort(result.edges.begin(), result.edges.end(),
            [](const LabeledEdge& a, const LabeledEdge& b) { return a.label < b.label; });
  for (const auto& edge : result.edges) result.node_labels.emplace(edge.label, edge.target);
  result.diagnostics.estimated_m = m;
  result.diagnostics.canonical = canon;
  return result;
}

ReconstructionResult conventional_labeling(const FlowNetwork& network) {
  if (!is_arborescence(network)) throw Error(ErrorCode::NotArborescence, "network is not an arborescence");
  const NodeId root = root_label(network.labels());
  std::vector<NodeId> node_label(static_cast<size_t>(network.node_count()) + 1, root);
  for (int i = 0; i < network.edge_count(); ++i) {
    node_label[static_cast<size_t>(network.edges()[static_cast<size_t>(i)].target)] =
        network.labels()[static_cast<size_t>(i)];
  }
  ReconstructionResult out;
  out.root = root;
  for (int i = 0; i < network.edge_count(); ++i) {
    const EdgeLabel label = network.labels()[static_cast<size_t>(i)];
    out.edges.push_back({label, node_label[static_cast<size_t>(network.edges()[static_cast<size_t>(i)].source)], label});
  }
  std::sort(out.edges.begin(), out.edges.end(),
            [](const LabeledEdge& a, const LabeledEdge& b) { return a.label < b.label; });
  for (const auto& edge : out.edges) out.node_labels.emplace(edge.label, edge.target);
  out.diagnostics.estimated_m = static_cast<int>(network.internal_nodes().size());
  return out;
}

bool verify_against_truth(const ReconstructionResult& result, const FlowNetwork& truth) {
  const ReconstructionResult expected = conventional_labeling(truth);
  if (expected.edges.size() != result.edges.size()) {
    throw Error(ErrorCode::LabelMismatch, "result and truth have different edge counts");
  }
  for (size_t i = 0; i < expected.edges.size(); ++i) {
    if (expected.edges[i].label != result.edges[i].label) {
      throw Error(ErrorCode::LabelMismatch, "edge label universes differ");
    }
  }
  return expected.root == result.root && expected.edges == result.edges;
}

}  // namespace flowtopo
