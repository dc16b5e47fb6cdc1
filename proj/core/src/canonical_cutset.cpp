#include "flowtopo/canonical_cutset.hpp"

#include "flowtopo/errors.hpp"

#include <string>

namespace flowtopo {

EdgeLabel unique_sign_edge(std::span<const int> row, std::span<const EdgeLabel> labels) {
  if (row.size() != labels.size()) throw Error(ErrorCode::InvalidArgument, "row and label lengths differ");
  int positive = 0;
  int negative = 0;
  size_t last_positive = 0;
  size_t last_negative = 0;
  for (size_t j = 0; j < row.size(); ++j) {
    if (row[j] > 0) {
      ++positive;
      last_positive = j;
    } else if (row[j] < 0) {
      ++negative;
      last_negative = j;
    }
  }
  const bool positive_unique = positive == 1 && negative >= 1;
  const bool negative_unique = negative == 1 && positive >= 1;
  if (positive_unique == negative_unique) {
    throw Error(ErrorCode::NotUnique, "row has " + std::to_string(positive) + " positive and " +
                                          std::to_string(negative) + " negative entries");
  }
  return labels[positive_unique ? last_positive : last_negative];
}

CanonicalCutsetMatrix canonicalize(const CutsetMatrix& cutset, const CanonicalizeOptions& options) {
  Eigen::MatrixXi c = cutset.entries();
  std::vector<EdgeLabel> labels = cutset.column_labels();
  const Eigen::Index m = cutset.rows();
  const Eigen::Index e = cutset.cols();
  std::vector<Interchange> provenance;
  std::vector<int> row(static_cast<size_t>(e));

  auto magnitude = [&](EdgeLabel label) {
    auto it = options.flow_magnitude.find(label);
    if (it == options.flow_magnitude.end()) {
      throw Error(ErrorCode::InvalidArgument, "no flow magnitude for edge " + std::to_string(label));
    }
    return it->second;
  };

  for (Eigen::Index k = 0; k < m; ++k) {
    Eigen::Index pivot = k;
    if (options.strategy == PivotStrategy::UniqueSign) {
      for (Eigen::Index j = 0; j < e; ++j) row[static_cast<size_t>(j)] = c(k, j);
      const EdgeLabel unique = unique_sign_edge(row, labels);
      if (unique != labels[static_cast<size_t>(k)]) {
        for (Eigen::Index j = m; j < e; ++j) {
          if (labels[static_cast<size_t>(j)] == unique) pivot = j;
        }
      }
    } else {
      double best = -1.0;
      for (Eigen::Index j = 0; j < e; ++j) {
        if (c(k, j) == 0) continue;
        const double mag = magnitude(labels[static_cast<size_t>(j)]);
        if (mag > best) {
          best = mag;
          pivot = j;
        }
      }
    }
    if (pivot == k) continue;

    // Elementary tree transformation: the chord enters the tree in place of branch k.
    provenance.push_back({static_cast<int>(k), labels[static_cast<size_t>(k)], labels[static_cast<size_t>(pivot)]});
    c.col(k).swap(c.col(pivot));
    std::swap(labels[static_cast<size_t>(k)], labels[static_cast<size_t>(pivot)]);
    const int sign = c(k, k);
    c.row(k) *= sign;
    for (Eigen::Index r = 0; r < m; ++r) {
      const int factor = c(r, k);
      if (r != k && factor != 0) c.row(r) -= factor * c.row(k);
    }
  }

  for (Eigen::Index k = 0; k < m; ++k) {
    const auto chords = c.row(k).tail(e - m);
    if ((chords.array() > 0).any() || (chords.array() < -1).any() || (chords.array() == 0).all()) {
      throw Error(ErrorCode::NotCanonicalizable,
                  "row for x" + std::to_string(labels[static_cast<size_t>(k)]) + " is not of the form [+1 | 0/-1]");
    }
  }

  std::vector<EdgeLabel> branches(labels.begin(), labels.begin() + m);
  std::vector<EdgeLabel> chords(labels.begin() + m, labels.end());
  return {CutsetMatrix(std::move(c), std::move(branches), std::move(chords)), std::move(provenance)};
}

std::unordered_map<EdgeLabel, double> mean_flow_magnitudes(const FlowDataMatrix& data) {
  std::unordered_map<EdgeLabel, double> out;
  const Eigen::VectorXd mean = data.entries().cwiseAbs().rowwise().mean();
  for (int i = 0; i < data.edge_count(); ++i) out.emplace(data.edge_labels()[static_cast<size_t>(i)], mean(i));
  return out;
}

}  // namespace flowtopo
