#include "flowtopo/graph_model.hpp"

#include "flowtopo/errors.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <unordered_set>

namespace flowtopo {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(static_cast<size_t>(n)), rank_(static_cast<size_t>(n), 0) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[static_cast<size_t>(x)] != x) {
      auto& p = parent_[static_cast<size_t>(x)];
      p = parent_[static_cast<size_t>(p)];
      x = p;
    }
    return x;
  }

  // false if a and b were already joined
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[static_cast<size_t>(a)] < rank_[static_cast<size_t>(b)]) std::swap(a, b);
    parent_[static_cast<size_t>(b)] = a;
    if (rank_[static_cast<size_t>(a)] == rank_[static_cast<size_t>(b)]) ++rank_[static_cast<size_t>(a)];
    return true;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
};

std::unordered_map<EdgeLabel, int> index_labels(std::span<const EdgeLabel> labels) {
  std::unordered_map<EdgeLabel, int> position;
  position.reserve(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] <= 0) {
      throw Error(ErrorCode::InvalidArgument, "edge labels must be positive, got " + std::to_string(labels[i]));
    }
    if (!position.emplace(labels[i], static_cast<int>(i)).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate edge label " + std::to_string(labels[i]));
    }
  }
  return position;
}

}  // namespace

// ---------------------------------------------------------------------------
// FlowNetwork

FlowNetwork::FlowNetwork(int node_count, std::vector<Edge> edges, std::vector<EdgeLabel> labels)
    : node_count_(node_count), edges_(std::move(edges)), labels_(std::move(labels)) {
  if (node_count_ <= 0) throw Error(ErrorCode::InvalidArgument, "node count must be positive");
  if (labels_.empty()) {
    labels_.resize(edges_.size());
    std::iota(labels_.begin(), labels_.end(), 1);
  }
  if (labels_.size() != edges_.size()) {
    throw Error(ErrorCode::InvalidArgument, "label count does not match edge count");
  }
  position_ = index_labels(labels_);

  in_degree_.assign(static_cast<size_t>(node_count_) + 1, 0);
  out_degree_.assign(static_cast<size_t>(node_count_) + 1, 0);
  for (const auto& [s, t] : edges_) {
    if (s < 1 || s > node_count_ || t < 1 || t > node_count_) {
      throw Error(ErrorCode::InvalidArgument,
                  "edge (" + std::to_string(s) + ", " + std::to_string(t) + ") references an unknown node");
    }
    if (s == t) throw Error(ErrorCode::InvalidArgument, "self-loop at node " + std::to_string(s));
    ++out_degree_[static_cast<size_t>(s)];
    ++in_degree_[static_cast<size_t>(t)];
  }
  for (NodeId v = 1; v <= node_count_; ++v) {
    if (in_degree_[static_cast<size_t>(v)] == 0) sources_.push_back(v);
    if (out_degree_[static_cast<size_t>(v)] == 0) sinks_.push_back(v);
  }
}

std::vector<NodeId> FlowNetwork::internal_nodes() const {
  std::vector<NodeId> nodes;
  for (NodeId v = 1; v <= node_count_; ++v) {
    if (!is_source(v) && !is_sink(v)) nodes.push_back(v);
  }
  return nodes;
}

int FlowNetwork::position_of(EdgeLabel label) const {
  auto it = position_.find(label);
  if (it == position_.end()) throw Error(ErrorCode::InvalidArgument, "unknown edge label " + std::to_string(label));
  return it->second;
}

std::vector<EdgeLabel> FlowNetwork::sink_edges() const {
  std::vector<EdgeLabel> out;
  for (size_t i = 0; i < edges_.size(); ++i) {
    if (is_sink(edges_[i].target)) out.push_back(labels_[i]);
  }
  return out;
}

std::vector<EdgeLabel> FlowNetwork::non_sink_edges() const {
  std::vector<EdgeLabel> out;
  for (size_t i = 0; i < edges_.size(); ++i) {
    if (!is_sink(edges_[i].target)) out.push_back(labels_[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ConservationGraph

int ConservationGraph::position_of(EdgeLabel label) const {
  auto it = position_.find(label);
  if (it == position_.end()) throw Error(ErrorCode::InvalidArgument, "unknown edge label " + std::to_string(label));
  return it->second;
}

ConservationGraph build_conservation_graph(const FlowNetwork& network) {
  const int n = network.node_count();

  // Connectivity of the undirected skeleton; isolated nodes count as disconnected.
  DisjointSets components(n + 1);
  int joined = 0;
  for (const auto& [s, t] : network.edges()) joined += components.unite(s, t) ? 1 : 0;
  if (joined != n - 1) throw Error(ErrorCode::DisconnectedNetwork, "underlying undirected graph is not connected");

  if (network.sources().empty() || network.sinks().empty()) {
    throw Error(ErrorCode::InvalidArgument, "network needs at least one source and one sink");
  }

  ConservationGraph cg;
  cg.internal_nodes_ = network.internal_nodes();
  const int m = static_cast<int>(cg.internal_nodes_.size());
  if (m == 0) throw Error(ErrorCode::NoInternalNodes, "network has no node that is neither source nor sink");

  std::vector<int> remap(static_cast<size_t>(n) + 1, m);
  for (int i = 0; i < m; ++i) remap[static_cast<size_t>(cg.internal_nodes_[static_cast<size_t>(i)])] = i;

  cg.edges_.reserve(static_cast<size_t>(network.edge_count()));
  for (const auto& [s, t] : network.edges()) {
    cg.edges_.push_back({remap[static_cast<size_t>(s)], remap[static_cast<size_t>(t)]});
  }
  cg.labels_.assign(network.labels().begin(), network.labels().end());
  cg.position_ = index_labels(cg.labels_);
  return cg;
}

// ---------------------------------------------------------------------------
// Incidence and cutset matrices

Eigen::MatrixXi full_incidence_matrix(const ConservationGraph& cg) {
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(cg.node_count(), cg.edge_count());
  const auto edges = cg.edges();
  for (int j = 0; j < cg.edge_count(); ++j) {
    const auto& [s, t] = edges[static_cast<size_t>(j)];
    if (s == t) continue;  // source-to-sink edge collapses to a loop at E
    a(s, j) -= 1;
    a(t, j) += 1;
  }
  return a;
}

IncidenceMatrix reduced_incidence_matrix(const ConservationGraph& cg) {
  IncidenceMatrix out;
  out.entries = full_incidence_matrix(cg).topRows(cg.internal_node_count());
  out.row_nodes.assign(cg.internal_nodes().begin(), cg.internal_nodes().end());
  out.edge_labels.assign(cg.labels().begin(), cg.labels().end());
  return out;
}

CutsetMatrix::CutsetMatrix(Eigen::MatrixXi entries, std::vector<EdgeLabel> branches, std::vector<EdgeLabel> chords)
    : entries_(std::move(entries)), branches_(std::move(branches)), chords_(std::move(chords)) {
  const auto m = static_cast<Eigen::Index>(branches_.size());
  if (entries_.rows() != m || entries_.cols() != m + static_cast<Eigen::Index>(chords_.size())) {
    throw Error(ErrorCode::InvalidArgument, "cutset matrix shape does not match its branch/chord labels");
  }
  std::vector<EdgeLabel> all = column_labels();
  (void)index_labels(all);
  if (!entries_.leftCols(m).isIdentity()) {
    throw Error(ErrorCode::InvalidArgument, "branch columns of a cutset matrix must form the identity");
  }
  if ((entries_.array().abs() > 1).any()) {
    throw Error(ErrorCode::InvalidArgument, "cutset matrix entries must lie in {-1, 0, +1}");
  }
}

std::vector<EdgeLabel> CutsetMatrix::column_labels() const {
  std::vector<EdgeLabel> labels(branches_);
  labels.insert(labels.end(), chords_.begin(), chords_.end());
  return labels;
}

Eigen::MatrixXi CutsetMatrix::columns_in_order(std::span<const EdgeLabel> order) const {
  const auto labels = column_labels();
  if (order.size() != labels.size()) throw Error(ErrorCode::LabelMismatch, "column order has the wrong length");
  const auto position = index_labels(labels);
  Eigen::MatrixXi out(entries_.rows(), entries_.cols());
  for (size_t j = 0; j < order.size(); ++j) {
    auto it = position.find(order[j]);
    if (it == position.end()) throw Error(ErrorCode::LabelMismatch, "label " + std::to_string(order[j]) + " not in matrix");
    out.col(static_cast<Eigen::Index>(j)) = entries_.col(it->second);
  }
  return out;
}

bool operator==(const CutsetMatrix& a, const CutsetMatrix& b) {
  return a.branches_ == b.branches_ && a.chords_ == b.chords_ && a.entries_ == b.entries_;
}

CutsetMatrix fcutset_matrix(const ConservationGraph& cg, std::span<const EdgeLabel> branches) {
  const int m = cg.internal_node_count();
  const int nodes = cg.node_count();
  if (static_cast<int>(branches.size()) != m) {
    throw Error(ErrorCode::NotASpanningTree,
                "expected " + std::to_string(m) + " branches, got " + std::to_string(branches.size()));
  }

  std::vector<int> branch_pos;
  branch_pos.reserve(branches.size());
  std::vector<char> is_branch(static_cast<size_t>(cg.edge_count()), 0);
  DisjointSets forest(nodes);
  for (EdgeLabel label : branches) {
    const int pos = cg.position_of(label);
    if (is_branch[static_cast<size_t>(pos)]) {
      throw Error(ErrorCode::NotASpanningTree, "branch " + std::to_string(label) + " listed twice");
    }
    const auto& [s, t] = cg.edges()[static_cast<size_t>(pos)];
    if (!forest.unite(s, t)) {
      throw Error(ErrorCode::NotASpanningTree, "branch " + std::to_string(label) + " closes a cycle");
    }
    is_branch[static_cast<size_t>(pos)] = 1;
    branch_pos.push_back(pos);
  }

  // Tree adjacency: (neighbour, branch row).
  std::vector<std::vector<std::pair<int, int>>> tree(static_cast<size_t>(nodes));
  for (int row = 0; row < m; ++row) {
    const auto& [s, t] = cg.edges()[static_cast<size_t>(branch_pos[static_cast<size_t>(row)])];
    tree[static_cast<size_t>(s)].emplace_back(t, row);
    tree[static_cast<size_t>(t)].emplace_back(s, row);
  }

  std::vector<EdgeLabel> chords;
  std::vector<int> column_pos(branch_pos);
  for (int j = 0; j < cg.edge_count(); ++j) {
    if (!is_branch[static_cast<size_t>(j)]) {
      chords.push_back(cg.labels()[static_cast<size_t>(j)]);
      column_pos.push_back(j);
    }
  }

  Eigen::MatrixXi entries = Eigen::MatrixXi::Zero(m, cg.edge_count());
  std::vector<char> head_side(static_cast<size_t>(nodes));
  std::vector<int> stack;
  for (int row = 0; row < m; ++row) {
    // Removing the branch splits the tree; collect the component holding its head.
    const auto& branch = cg.edges()[static_cast<size_t>(branch_pos[static_cast<size_t>(row)])];
    std::fill(head_side.begin(), head_side.end(), 0);
    stack.assign(1, branch.target);
    head_side[static_cast<size_t>(branch.target)] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& [w, via] : tree[static_cast<size_t>(v)]) {
        if (via == row || head_side[static_cast<size_t>(w)]) continue;
        head_side[static_cast<size_t>(w)] = 1;
        stack.push_back(w);
      }
    }
    for (int col = 0; col < cg.edge_count(); ++col) {
      const auto& [s, t] = cg.edges()[static_cast<size_t>(column_pos[static_cast<size_t>(col)])];
      const bool into = head_side[static_cast<size_t>(t)] != 0;
      const bool from = head_side[static_cast<size_t>(s)] != 0;
      if (into && !from) entries(row, col) = 1;
      if (from && !into) entries(row, col) = -1;
    }
  }

  return CutsetMatrix(std::move(entries), std::vector<EdgeLabel>(branches.begin(), branches.end()), std::move(chords));
}

bool is_arborescence(const FlowNetwork& network) {
  if (network.sources().size() != 1) return false;
  if (network.edge_count() != network.node_count() - 1) return false;
  const NodeId root = network.sources().front();
  for (NodeId v = 1; v <= network.node_count(); ++v) {
    if (v != root && network.in_degree(v) != 1) return false;
  }

  std::vector<std::vector<NodeId>> children(static_cast<size_t>(network.node_count()) + 1);
  for (const auto& [s, t] : network.edges()) children[static_cast<size_t>(s)].push_back(t);
  std::vector<char> seen(static_cast<size_t>(network.node_count()) + 1, 0);
  std::queue<NodeId> frontier;
  frontier.push(root);
  seen[static_cast<size_t>(root)] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const NodeId v = frontier.front();
    frontier.pop();
    for (NodeId w : children[static_cast<size_t>(v)]) {
      if (seen[static_cast<size_t>(w)]) return false;
      seen[static_cast<size_t>(w)] = 1;
      ++reached;
      frontier.push(w);
    }
  }
  return reached == network.node_count();
}

}  // namespace flowtopo
