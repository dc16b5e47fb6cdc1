#pragma once

#include "flowtopo/errors.hpp"
#include "flowtopo/graph_model.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace flowtopo {

inline constexpr double kDefaultZeroTol = 1e-10;
inline constexpr double kDefaultRoundTol = 0.1;
inline constexpr double kMaxPartitionCondition = 1e8;

/**
 * e x n_s matrix of steady-state flow samples: row i holds edge edge_labels()[i],
 * each column is one sample. Fewer samples than edges is rejected unless
 * `allow_few_samples` is set (a warning is emitted instead).
 */
class FlowDataMatrix {
 public:
  explicit FlowDataMatrix(Eigen::MatrixXd entries, std::vector<EdgeLabel> edge_labels = {},
                          bool allow_few_samples = false);

  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  std::span<const EdgeLabel> edge_labels() const noexcept { return labels_; }
  int edge_count() const noexcept { return static_cast<int>(entries_.rows()); }
  int sample_count() const noexcept { return static_cast<int>(entries_.cols()); }

  /// Same labels, new entries (used after whitening / noise injection).
  FlowDataMatrix with_entries(Eigen::MatrixXd entries) const;

 private:
  Eigen::MatrixXd entries_;
  std::vector<EdgeLabel> labels_;
  bool allow_few_samples_ = false;
};

/// Orthonormal basis of the left null space of the data, one row per conservation relation.
struct NullBasis {
  Eigen::MatrixXd basis;           // m x e
  int rank_deficiency = 0;         // m
  Eigen::VectorXd singular_values; // length e, nonincreasing
  std::vector<EdgeLabel> edge_labels;
};

/// Split of the edges into m dependent (branch) and e - m independent (chord) variables.
struct Partition {
  std::vector<EdgeLabel> dependent;
  std::vector<EdgeLabel> independent;
  double condition_number = 0.0;
};

/**
 * SVD of the data; the left singular vectors whose singular values satisfy
 * sigma_i <= zero_tol * sigma_max span the conservation relations.
 */
NullBasis estimate_null_basis(const FlowDataMatrix& data, double zero_tol = kDefaultZeroTol);

/**
 * Chooses m well-conditioned dependent columns by greedy column pivoting on an
 * orthonormalised copy of the rows (largest remaining column norm first, ties to
 * the lowest edge position). The selection depends only on the row space, so any
 * basis of the same relations yields the same partition.
 */
Partition find_valid_partition(const Eigen::MatrixXd& basis, std::span<const EdgeLabel> edge_labels);
Partition find_valid_partition(const NullBasis& basis);

/// Partition with the given dependent labels (any order); NoValidPartition if they are not a valid choice.
Partition partition_with_dependent(const Eigen::MatrixXd& basis, std::span<const EdgeLabel> edge_labels,
                                   std::span<const EdgeLabel> dependent);

/// R_D = B_D^{-1} B_I before any rounding; columns follow partition.independent.
Eigen::MatrixXd reduce_to_partition(const Eigen::MatrixXd& basis, std::span<const EdgeLabel> edge_labels,
                                    const Partition& partition);

/**
 * Snaps every entry of R_D to the nearest of {-1, 0, +1}; entries farther than
 * `tolerance` from it raise `failure`.
 */
CutsetMatrix snap_to_cutset(const Eigen::MatrixXd& reduced, const Partition& partition, double tolerance,
                            ErrorCode failure = ErrorCode::NonIntegerCutset);

/// [I | R_D] with branches = partition.dependent and chords = partition.independent.
CutsetMatrix to_fcutset_form(const NullBasis& basis, const Partition& partition,
                             double round_tol = kDefaultRoundTol);

}  // namespace flowtopo
