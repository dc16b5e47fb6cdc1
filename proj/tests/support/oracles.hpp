#pragma once

// Reference implementations used only by tests. They are written from the
// graph definitions directly and never call into the library under test, so a
// bug in the library cannot hide behind an identical bug here.

#include "flowtopo/graph_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using flowtopo::EdgeLabel;
using flowtopo::FlowNetwork;
using flowtopo::NodeId;

inline Eigen::MatrixXd random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix the sign ambiguity so the distribution is Haar.
  for (int j = 0; j < n; ++j)
    if (qr.matrixQR()(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

/// Orthonormal basis of the row space of `a` (rows of the result).
inline Eigen::MatrixXd row_space(const Eigen::MatrixXd& a, double tol = 1e-9) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  int r = 0;
  while (r < s.size() && s(r) > tol * std::max(1.0, s(0))) ++r;
  return svd.matrixV().leftCols(r).transpose();
}

/// Largest distance of a row of `b` from the row space of `a`, relative to the row norm.
inline double projection_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd q = row_space(a);
  double worst = 0.0;
  for (int i = 0; i < b.rows(); ++i) {
    const Eigen::RowVectorXd row = b.row(i);
    const Eigen::RowVectorXd rest = row - (row * q.transpose()) * q;
    worst = std::max(worst, rest.norm() / std::max(row.norm(), 1e-300));
  }
  return worst;
}

inline double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return std::max(projection_residual(a, b), projection_residual(b, a));
}

/// Every m-subset of columns whose submatrix is nonsingular (|det| > tol).
inline std::vector<std::vector<int>> nonsingular_column_subsets(const Eigen::MatrixXd& basis, double tol = 1e-8) {
  const int m = static_cast<int>(basis.rows());
  const int e = static_cast<int>(basis.cols());
  std::vector<std::vector<int>> out;
  std::vector<bool> pick(static_cast<size_t>(e), false);
  std::fill(pick.begin(), pick.begin() + m, true);
  do {
    std::vector<int> cols;
    for (int j = 0; j < e; ++j)
      if (pick[static_cast<size_t>(j)]) cols.push_back(j);
    Eigen::MatrixXd sub(m, m);
    for (int k = 0; k < m; ++k) sub.col(k) = basis.col(cols[static_cast<size_t>(k)]);
    if (std::abs(sub.determinant()) > tol) out.push_back(cols);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

/// Edge labels entering sinks reachable from the target of `label` (itself if it is a sink edge).
inline std::set<EdgeLabel> descendant_sink_edges(const FlowNetwork& net, EdgeLabel label) {
  std::map<NodeId, std::vector<size_t>> out_edges;
  for (size_t i = 0; i < net.edges().size(); ++i) out_edges[net.edges()[i].source].push_back(i);
  std::set<EdgeLabel> sinks;
  std::vector<size_t> stack;
  for (size_t i = 0; i < net.edges().size(); ++i)
    if (net.labels()[i] == label) stack.push_back(i);
  while (!stack.empty()) {
    const size_t i = stack.back();
    stack.pop_back();
    const NodeId t = net.edges()[i].target;
    auto it = out_edges.find(t);
    if (it == out_edges.end()) {
      sinks.insert(net.labels()[i]);
      continue;
    }
    for (size_t j : it->second) stack.push_back(j);
  }
  return sinks;
}

/// True when edge `lower` lies on a directed path that starts with edge `upper` (upper != lower).
inline bool is_descendant_edge(const FlowNetwork& net, EdgeLabel upper, EdgeLabel lower) {
  std::map<NodeId, std::vector<size_t>> out_edges;
  for (size_t i = 0; i < net.edges().size(); ++i) out_edges[net.edges()[i].source].push_back(i);
  std::vector<NodeId> stack;
  for (size_t i = 0; i < net.edges().size(); ++i)
    if (net.labels()[i] == upper) stack.push_back(net.edges()[i].target);
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (size_t j : out_edges[v]) {
      if (net.labels()[j] == lower) return true;
      stack.push_back(net.edges()[j].target);
    }
  }
  return false;
}

/// Number of edges on the path from the source to the head of each edge (source edges have depth 1).
inline std::map<EdgeLabel, int> edge_depths(const FlowNetwork& net) {
  std::map<NodeId, size_t> incoming;
  for (size_t i = 0; i < net.edges().size(); ++i) incoming[net.edges()[i].target] = i;
  std::map<EdgeLabel, int> depth;
  for (size_t i = 0; i < net.edges().size(); ++i) {
    int d = 1;
    for (NodeId v = net.edges()[i].source; incoming.count(v); v = net.edges()[incoming[v]].source) ++d;
    depth[net.labels()[i]] = d;
  }
  return depth;
}

/// Node of the merged graph: sources and sinks collapse to 0, others keep their id.
inline NodeId merged(const FlowNetwork& net, NodeId v) {
  return (net.in_degree(v) == 0 || net.out_degree(v) == 0) ? 0 : v;
}

/// Kruskal over the merged graph with a shuffled edge order.
inline std::vector<EdgeLabel> random_spanning_tree(const FlowNetwork& net, std::mt19937_64& rng) {
  std::vector<size_t> order(net.edges().size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> parent(static_cast<size_t>(net.node_count()) + 1);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) {
    auto& p = parent[static_cast<size_t>(v)];
    return p == v ? v : p = find(p);
  };
  std::vector<EdgeLabel> tree;
  for (size_t i : order) {
    const int a = find(merged(net, net.edges()[i].source));
    const int b = find(merged(net, net.edges()[i].target));
    if (a == b) continue;
    parent[static_cast<size_t>(a)] = b;
    tree.push_back(net.labels()[i]);
  }
  return tree;
}

/**
 * Fundamental cutset of each branch found by deleting it from the tree and
 * labelling the two components. Returns label -> coefficient maps, one per
 * branch in the given order, oriented so the branch has coefficient +1.
 */
inline std::vector<std::map<EdgeLabel, int>> fundamental_cutsets(const FlowNetwork& net,
                                                                 const std::vector<EdgeLabel>& branches) {
  std::map<EdgeLabel, std::pair<NodeId, NodeId>> ends;
  for (size_t i = 0; i < net.edges().size(); ++i)
    ends[net.labels()[i]] = {merged(net, net.edges()[i].source), merged(net, net.edges()[i].target)};

  std::vector<std::map<EdgeLabel, int>> rows;
  for (EdgeLabel cut : branches) {
    std::map<NodeId, std::vector<NodeId>> adj;
    for (EdgeLabel b : branches) {
      if (b == cut) continue;
      adj[ends[b].first].push_back(ends[b].second);
      adj[ends[b].second].push_back(ends[b].first);
    }
    // Component containing the head of the removed branch.
    std::set<NodeId> side{ends[cut].second};
    std::vector<NodeId> stack{ends[cut].second};
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      for (NodeId w : adj[v])
        if (side.insert(w).second) stack.push_back(w);
    }
    std::map<EdgeLabel, int> row;
    for (const auto& [label, st] : ends) {
      const bool in_s = side.count(st.first) > 0;
      const bool in_t = side.count(st.second) > 0;
      if (in_s == in_t) continue;
      row[label] = in_t ? 1 : -1;  // same direction as the branch (into `side`) is +1
    }
    rows.push_back(row);
  }
  return rows;
}

/// Bartlett's statistic for equality of the k smallest of the (descending) eigenvalues.
inline double bartlett_statistic(const Eigen::VectorXd& eigenvalues, int k, int samples) {
  const int e = static_cast<int>(eigenvalues.size());
  double mean = 0.0;
  double log_sum = 0.0;
  for (int i = e - k; i < e; ++i) {
    mean += eigenvalues(i);
    log_sum += std::log(eigenvalues(i));
  }
  mean /= k;
  return samples * (k * std::log(mean) - log_sum);
}

}  // namespace oracle
