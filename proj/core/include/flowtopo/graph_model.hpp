#pragma once

#include <Eigen/Core>

#include <span>
#include <unordered_map>
#include <vector>

namespace flowtopo {

/// Edge labels are 1-based and double as flow-variable subscripts (label 3 is x3).
using EdgeLabel = int;
/// Node identifiers are 1-based: a network with n nodes uses ids 1..n.
using NodeId = int;

struct Edge {
  NodeId source = 0;
  NodeId target = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/**
 * Directed flow network. Position i of the edge list carries label labels()[i];
 * by default labels are 1..e so position i is flow variable x_{i+1}.
 *
 * Sources and sinks are derived from degrees (zero in-degree / zero out-degree),
 * so they can never disagree with the edge list.
 */
class FlowNetwork {
 public:
  FlowNetwork(int node_count, std::vector<Edge> edges, std::vector<EdgeLabel> labels = {});

  int node_count() const noexcept { return node_count_; }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }

  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const EdgeLabel> labels() const noexcept { return labels_; }
  std::span<const NodeId> sources() const noexcept { return sources_; }
  std::span<const NodeId> sinks() const noexcept { return sinks_; }

  /// Nodes that are neither sources nor sinks, ascending.
  std::vector<NodeId> internal_nodes() const;

  int in_degree(NodeId v) const { return in_degree_.at(static_cast<size_t>(v)); }
  int out_degree(NodeId v) const { return out_degree_.at(static_cast<size_t>(v)); }

  bool is_source(NodeId v) const { return in_degree(v) == 0; }
  bool is_sink(NodeId v) const { return out_degree(v) == 0; }

  /// Position of an edge label in the edge list; throws InvalidArgument if absent.
  int position_of(EdgeLabel label) const;
  const Edge& edge(EdgeLabel label) const { return edges_[static_cast<size_t>(position_of(label))]; }

  /// Edge labels whose target is a sink node, in edge-list order.
  std::vector<EdgeLabel> sink_edges() const;
  /// All other edge labels, in edge-list order.
  std::vector<EdgeLabel> non_sink_edges() const;

 private:
  int node_count_;
  std::vector<Edge> edges_;
  std::vector<EdgeLabel> labels_;
  std::vector<int> in_degree_;
  std::vector<int> out_degree_;
  std::vector<NodeId> sources_;
  std::vector<NodeId> sinks_;
  std::unordered_map<EdgeLabel, int> position_;
};

/**
 * Network with all sources and sinks merged into one environment node E.
 * Internal node i (0-based) is original node internal_nodes()[i]; E has index m.
 * Edge order, labels, and directions are those of the originating network.
 */
class ConservationGraph {
 public:
  int internal_node_count() const noexcept { return static_cast<int>(internal_nodes_.size()); }
  int node_count() const noexcept { return internal_node_count() + 1; }
  int environment() const noexcept { return internal_node_count(); }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }

  std::span<const NodeId> internal_nodes() const noexcept { return internal_nodes_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const EdgeLabel> labels() const noexcept { return labels_; }

  int position_of(EdgeLabel label) const;

 private:
  friend ConservationGraph build_conservation_graph(const FlowNetwork& network);

  std::vector<NodeId> internal_nodes_;
  std::vector<Edge> edges_;  // endpoints in [0, m]
  std::vector<EdgeLabel> labels_;
  std::unordered_map<EdgeLabel, int> position_;
};

/// Rows are internal nodes (E omitted), columns follow edge_labels.
struct IncidenceMatrix {
  Eigen::MatrixXi entries;
  std::vector<NodeId> row_nodes;
  std::vector<EdgeLabel> edge_labels;
};

/**
 * Integer matrix of the form [I | C] with explicit column labels: the first m
 * columns are the branches (in row order), the rest are chords.
 */
class CutsetMatrix {
 public:
  CutsetMatrix(Eigen::MatrixXi entries, std::vector<EdgeLabel> branches, std::vector<EdgeLabel> chords);

  const Eigen::MatrixXi& entries() const noexcept { return entries_; }
  std::span<const EdgeLabel> branches() const noexcept { return branches_; }
  std::span<const EdgeLabel> chords() const noexcept { return chords_; }
  std::vector<EdgeLabel> column_labels() const;

  int rows() const noexcept { return static_cast<int>(branches_.size()); }
  int cols() const noexcept { return static_cast<int>(entries_.cols()); }

  /// Entries with columns permuted into the given label order.
  Eigen::MatrixXi columns_in_order(std::span<const EdgeLabel> order) const;

  friend bool operator==(const CutsetMatrix& a, const CutsetMatrix& b);

 private:
  Eigen::MatrixXi entries_;
  std::vector<EdgeLabel> branches_;
  std::vector<EdgeLabel> chords_;
};

ConservationGraph build_conservation_graph(const FlowNetwork& network);

IncidenceMatrix reduced_incidence_matrix(const ConservationGraph& cg);

/// (m+1) x e incidence matrix including the environment row as the last row.
Eigen::MatrixXi full_incidence_matrix(const ConservationGraph& cg);

/// Fundamental cutset matrix with respect to the spanning tree formed by `branches`.
CutsetMatrix fcutset_matrix(const ConservationGraph& cg, std::span<const EdgeLabel> branches);

bool is_arborescence(const FlowNetwork& network);

}  // namespace flowtopo
