#include "flowtopo/nullspace.hpp"

#include "flowtopo/log.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace flowtopo {

namespace {

std::unordered_map<EdgeLabel, int> positions(std::span<const EdgeLabel> labels) {
  std::unordered_map<EdgeLabel, int> pos;
  for (size_t i = 0; i < labels.size(); ++i) pos.emplace(labels[i], static_cast<int>(i));
  return pos;
}

std::vector<int> columns_for(std::span<const EdgeLabel> wanted, const std::unordered_map<EdgeLabel, int>& pos) {
  std::vector<int> cols;
  cols.reserve(wanted.size());
  for (EdgeLabel label : wanted) {
    auto it = pos.find(label);
    if (it == pos.end()) throw Error(ErrorCode::LabelMismatch, "label " + std::to_string(label) + " not in basis");
    cols.push_back(it->second);
  }
  return cols;
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& m, const std::vector<int>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(cols[j]);
  return out;
}

double condition_number(const Eigen::MatrixXd& square) {
  if (square.size() == 0) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(square);
  const auto& s = svd.singularValues();
  const double smallest = s(s.size() - 1);
  return smallest > 0.0 ? s(0) / smallest : std::numeric_limits<double>::infinity();
}

// Rows spanning the same space as `basis`, orthonormal.
Eigen::MatrixXd orthonormal_rows(const Eigen::MatrixXd& basis) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis.transpose());
  const Eigen::Index m = basis.rows();
  const Eigen::MatrixXd r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  const double scale = std::max(r.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  if ((r.diagonal().cwiseAbs().array() <= 1e-12 * scale).any()) {
    throw Error(ErrorCode::NoValidPartition, "null basis is numerically rank deficient");
  }
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(basis.cols(), m);
  return q.transpose();
}

}  // namespace

// ---------------------------------------------------------------------------

FlowDataMatrix::FlowDataMatrix(Eigen::MatrixXd entries, std::vector<EdgeLabel> edge_labels, bool allow_few_samples)
    : entries_(std::move(entries)), labels_(std::move(edge_labels)), allow_few_samples_(allow_few_samples) {
  if (entries_.rows() == 0 || entries_.cols() == 0) throw Error(ErrorCode::InvalidArgument, "empty data matrix");
  if (labels_.empty()) {
    labels_.resize(static_cast<size_t>(entries_.rows()));
    std::iota(labels_.begin(), labels_.end(), 1);
  }
  if (static_cast<Eigen::Index>(labels_.size()) != entries_.rows()) {
    throw Error(ErrorCode::InvalidArgument, "data matrix has " + std::to_string(entries_.rows()) + " rows but " +
                                                std::to_string(labels_.size()) + " edge labels");
  }
  if (positions(labels_).size() != labels_.size()) throw Error(ErrorCode::InvalidArgument, "duplicate edge labels");
  if (!entries_.allFinite()) throw Error(ErrorCode::InvalidArgument, "data matrix contains non-finite entries");
  if (entries_.cols() <= entries_.rows()) {
    const std::string msg = "only " + std::to_string(entries_.cols()) + " samples for " +
                            std::to_string(entries_.rows()) + " edges (need n_s > e)";
    if (!allow_few_samples_) throw Error(ErrorCode::InvalidArgument, msg);
    warn(msg);
  }
}

FlowDataMatrix FlowDataMatrix::with_entries(Eigen::MatrixXd entries) const {
  return FlowDataMatrix(std::move(entries), labels_, allow_few_samples_);
}

NullBasis estimate_null_basis(const FlowDataMatrix& data, double zero_tol) {
  if (!(zero_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "zero_tol must be positive");
  const Eigen::Index e = data.edge_count();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(data.entries(), Eigen::ComputeFullU);
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(e);
  sigma.head(svd.singularValues().size()) = svd.singularValues();

  const double sigma_max = sigma(0);
  if (!(sigma_max > 0.0)) throw Error(ErrorCode::FullDeficiency, "data matrix is identically zero");
  const double threshold = zero_tol * sigma_max;
  int m = 0;
  for (Eigen::Index i = e - 1; i >= 0 && sigma(i) <= threshold; --i) ++m;
  if (m == 0) throw Error(ErrorCode::RankZero, "no singular value below the zero tolerance");

  NullBasis out;
  out.rank_deficiency = m;
  out.singular_values = std::move(sigma);
  out.basis = svd.matrixU().rightCols(m).transpose();
  out.edge_labels.assign(data.edge_labels().begin(), data.edge_labels().end());
  return out;
}

Partition find_valid_partition(const Eigen::MatrixXd& basis, std::span<const EdgeLabel> edge_labels) {
  const Eigen::Index m = basis.rows();
  const Eigen::Index e = basis.cols();
  if (m == 0 || m > e) throw Error(ErrorCode::NoValidPartition, "basis must have 1..e rows");
  if (static_cast<Eigen::Index>(edge_labels.size()) != e) {
    throw Error(ErrorCode::LabelMismatch, "basis width does not match edge label count");
  }

  const Eigen::MatrixXd q = orthonormal_rows(basis);
  Eigen::MatrixXd work = q;
  std::vector<char> chosen(static_cast<size_t>(e), 0);
  std::vector<int> picked;
  for (Eigen::Index step = 0; step < m; ++step) {
    const Eigen::VectorXd norms = work.colwise().squaredNorm();
    double best = 0.0;
    for (Eigen::Index j = 0; j < e; ++j) {
      if (!chosen[static_cast<size_t>(j)]) best = std::max(best, norms(j));
    }
    if (best <= 1e-24) throw Error(ErrorCode::NoValidPartition, "no remaining column with a usable pivot");
    Eigen::Index pivot = -1;
    for (Eigen::Index j = 0; j < e; ++j) {
      if (!chosen[static_cast<size_t>(j)] && norms(j) >= best * (1.0 - 1e-9)) {
        pivot = j;
        break;
      }
    }
    chosen[static_cast<size_t>(pivot)] = 1;
    picked.push_back(static_cast<int>(pivot));
    const Eigen::VectorXd direction = work.col(pivot) / std::sqrt(norms(pivot));
    work -= direction * (direction.transpose() * work);
  }

  auto make = [&](const std::vector<char>& mask) {
    Partition p;
    std::vector<int> dep;
    for (Eigen::Index j = 0; j < e; ++j) {
      if (mask[static_cast<size_t>(j)]) {
        p.dependent.push_back(edge_labels[static_cast<size_t>(j)]);
        dep.push_back(static_cast<int>(j));
      } else {
        p.independent.push_back(edge_labels[static_cast<size_t>(j)]);
      }
    }
    p.condition_number = condition_number(take_columns(q, dep));
    return p;
  };

  Partition partition = make(chosen);
  if (partition.condition_number <= kMaxPartitionCondition) return partition;

  // Single-column exchanges, latest pick first.
  for (auto it = picked.rbegin(); it != picked.rend(); ++it) {
    for (Eigen::Index j = 0; j < e; ++j) {
      if (chosen[static_cast<size_t>(j)]) continue;
      auto trial = chosen;
      trial[static_cast<size_t>(*it)] = 0;
      trial[static_cast<size_t>(j)] = 1;
      Partition candidate = make(trial);
      if (candidate.condition_number <= kMaxPartitionCondition) return candidate;
    }
  }
  throw Error(ErrorCode::NoValidPartition, "no dependent column set with condition number <= 1e8");
}

Partition partition_with_dependent(const Eigen::MatrixXd& basis, std::span<const EdgeLabel> edge_labels,
                                   std::span<const EdgeLabel> dependent) {
  if (static_cast<Eigen::Index>(dependent.size()) != basis.rows() ||
      static_cast<Eigen::Index>(edge_labels.size()) != basis.cols()) {
    throw Error(ErrorCode::InvalidArgument, "dependent set size must equal the number of basis rows");
  }
  const auto pos = positions(edge_labels);
  std::vector<char> mask(edge_labels.size(), 0);
  for (int col : columns_for(dependent, pos)) mask[static_cast<size_t>(col)] = 1;
  Partition p;
  std::vector<int> dep;
  for (size_t j = 0; j < edge_labels.size(); ++j) {
    if (mask[j]) {
      p.dependent.push_back(edge_labels[j]);
      dep.push_back(static_cast<int>(j));
    } else {
      p.independent.push_back(edge_labels[j]);
    }
  }
  if (static_cast<Eigen::Index>(dep.size()) != basis.rows()) {
    throw Error(ErrorCode::InvalidArgument, "dependent set has duplicate labels");
  }
  p.condition_number = condition_number(take_columns(orthonormal_rows(basis), dep));
  if (!(p.condition_number <= kMaxPartitionCondition)) {
    throw Error(ErrorCode::NoValidPartition, "requested dependent set is singular or ill-conditioned");
  }
  return p;
}

Partition find_valid_partition(const NullBasis& basis) {
  return find_valid_partition(basis.basis, basis.edge_labels);
}

Eigen::MatrixXd reduce_to_partition(const Eigen::MatrixXd& basis, std::span<const EdgeLabel> edge_labels,
                                    const Partition& partition) {
  if (static_cast<Eigen::Index>(partition.dependent.size()) != basis.rows() ||
      partition.dependent.size() + partition.independent.size() != edge_labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "partition sizes do not match the basis");
  }
  const auto pos = positions(edge_labels);
  const Eigen::MatrixXd dependent = take_columns(basis, columns_for(partition.dependent, pos));
  const Eigen::MatrixXd independent = take_columns(basis, columns_for(partition.independent, pos));
  Eigen::FullPivLU<Eigen::MatrixXd> lu(dependent);
  if (!lu.isInvertible()) throw Error(ErrorCode::NoValidPartition, "dependent submatrix is singular");
  return lu.solve(independent);
}

CutsetMatrix snap_to_cutset(const Eigen::MatrixXd& reduced, const Partition& partition, double tolerance,
                            ErrorCode failure) {
  const Eigen::Index m = reduced.rows();
  Eigen::MatrixXi entries = Eigen::MatrixXi::Zero(m, m + reduced.cols());
  entries.leftCols(m).setIdentity();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < reduced.cols(); ++j) {
      const double v = reduced(i, j);
      const double nearest = std::clamp(std::round(v), -1.0, 1.0);
      if (!(std::abs(v - nearest) <= tolerance)) {
        throw Error(failure, "entry (" + std::to_string(i) + ", x" +
                                 std::to_string(partition.independent[static_cast<size_t>(j)]) + ") = " +
                                 std::to_string(v) + " is not within " + std::to_string(tolerance) +
                                 " of {-1, 0, 1}");
      }
      entries(i, m + j) = static_cast<int>(nearest);
    }
  }
  return CutsetMatrix(std::move(entries), partition.dependent, partition.independent);
}

CutsetMatrix to_fcutset_form(const NullBasis& basis, const Partition& partition, double round_tol) {
  return snap_to_cutset(reduce_to_partition(basis.basis, basis.edge_labels, partition), partition, round_tol,
                        ErrorCode::NonIntegerCutset);
}

}  // namespace flowtopo
