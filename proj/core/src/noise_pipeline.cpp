#include "flowtopo/noise_pipeline.hpp"

#include "flowtopo/errors.hpp"
#include "flowtopo/log.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

namespace flowtopo {

NoiseModel NoiseModel::homoscedastic(int edges, double sigma2) {
  if (edges <= 0 || !(sigma2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "homoscedastic noise needs sigma2 > 0");
  NoiseModel model;
  model.kind = NoiseKind::Homoscedastic;
  model.mean = Eigen::VectorXd::Zero(edges);
  model.covariance = sigma2 * Eigen::MatrixXd::Identity(edges, edges);
  return model;
}

NoiseModel NoiseModel::heteroscedastic(Eigen::MatrixXd covariance) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "noise covariance must be square and non-empty");
  }
  NoiseModel model;
  model.kind = NoiseKind::Heteroscedastic;
  model.mean = Eigen::VectorXd::Zero(covariance.rows());
  model.covariance = std::move(covariance);
  return model;
}

NoiseModel NoiseModel::heteroscedastic(const Eigen::VectorXd& variances) {
  return heteroscedastic(Eigen::MatrixXd(variances.asDiagonal()));
}

namespace {

Eigen::MatrixXd cholesky_factor(const NoiseModel& noise, int edges) {
  if (noise.edge_count() != edges) {
    throw Error(ErrorCode::InvalidArgument, "noise covariance is " + std::to_string(noise.edge_count()) +
                                                "x" + std::to_string(noise.edge_count()) + " but data has " +
                                                std::to_string(edges) + " edges");
  }
  if (!noise.covariance.isApprox(noise.covariance.transpose(), 1e-12)) {
    throw Error(ErrorCode::NotPositiveDefinite, "noise covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(noise.covariance);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorisation failed");
  return llt.matrixL();
}

Eigen::MatrixXd centred(const FlowDataMatrix& data, const NoiseModel& noise) {
  if (noise.mean.size() != 0 && noise.mean.size() != data.edge_count()) {
    throw Error(ErrorCode::InvalidArgument, "noise mean has the wrong length");
  }
  if (noise.mean.size() == 0 || noise.mean.isZero(0.0)) return data.entries();
  warn("noise model has a nonzero mean; subtracting it from every sample before whitening");
  return data.entries().colwise() - noise.mean;
}

RankTestReport order_from_singular_values(const Eigen::VectorXd& sigma, int samples, const ModelOrderOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be in (0, 1)");
  const int e = static_cast<int>(sigma.size());
  RankTestReport report;
  report.alpha = options.alpha;
  report.eigenvalues = sigma.array().square();

  // Whitened noise has unit variance, so a genuinely zero direction must also sit far below 1.
  // The relative test alone misfires when n_s is close to e and the noise block is nearly square.
  constexpr double kUnitNoiseZero = 1e-6;
  int zeros = 0;
  for (int i = e - 1; i >= 0 && sigma(i) <= options.zero_tol * sigma(0) && sigma(i) <= kUnitNoiseZero; --i) ++zeros;
  if (zeros > 0) {
    report.degenerate_noise = true;
    report.chosen_m = zeros;
    report.used_m = zeros;
    return report;
  }
  if (samples < 5 * e) {
    warn("model-order test with n_s = " + std::to_string(samples) + " < 5e; chi-square reference is unreliable");
  }

  const Eigen::VectorXd log_lambda = report.eigenvalues.array().log();
  for (int k = e; k >= 2; --k) {
    const auto tail = report.eigenvalues.tail(k);
    const double mean = tail.mean();
    const double raw = static_cast<double>(k) * std::log(mean) - log_lambda.tail(k).sum();
    double multiplier = samples;
    if (options.statistic == OrderStatistic::BartlettLawley) {
      multiplier = samples - (e - k) - (2.0 * k * k + k + 2.0) / (6.0 * k);
      for (int i = 0; i < e - k; ++i) {
        const double gap = report.eigenvalues(i) - mean;
        if (gap > 0.0) multiplier += (mean / gap) * (mean / gap);
      }
    }
    RankCandidate c;
    c.k = k;
    c.degrees_of_freedom = 0.5 * (k - 1) * (k + 2);
    if (multiplier <= 0.0) {
      c.statistic = std::numeric_limits<double>::infinity();
      c.p_value = 0.0;
    } else {
      c.statistic = std::max(0.0, multiplier * raw);
      boost::math::chi_squared reference(c.degrees_of_freedom);
      c.p_value = boost::math::cdf(boost::math::complement(reference, c.statistic));
    }
    c.rejected = c.p_value < options.alpha;
    report.candidates.push_back(c);
    if (!c.rejected) {
      report.chosen_m = k;
      report.used_m = k;
      return report;
    }
  }
  report.chosen_m = 0;
  return report;
}

[[noreturn]] void throw_no_stable_order(double alpha) {
  throw Error(ErrorCode::NoStableOrder,
              "every candidate order down to k = 2 was rejected at alpha = " + std::to_string(alpha));
}

// Whitened noise has unit variance, so its sample eigenvalues stay below the
// Marchenko-Pastur edge (1 + sqrt(e / n_s))^2 with high probability.
int noise_floor_count(const Eigen::VectorXd& eigenvalues, int samples) {
  const double ratio = static_cast<double>(eigenvalues.size()) / samples;
  const double edge = (1.0 + std::sqrt(ratio)) * (1.0 + std::sqrt(ratio));
  return static_cast<int>((eigenvalues.array() <= edge).count());
}

// Branch set of the canonical form reached from a plain rounding of `reduced`, as a partition of `model`.
std::optional<Partition> canonical_partition(const Eigen::MatrixXd& model, std::span<const EdgeLabel> labels,
                                             const Partition& partition, const Eigen::MatrixXd& reduced,
                                             const CanonicalizeOptions& options) {
  try {
    const CutsetMatrix rounded = snap_to_cutset(reduced, partition, 0.5, ErrorCode::SnapFailure);
    const CanonicalCutsetMatrix canon = canonicalize(rounded, options);
    return partition_with_dependent(model, labels, canon.inner.branches());
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool is_structural_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::SnapFailure:
    case ErrorCode::NoValidPartition:
    case ErrorCode::NotUnique:
    case ErrorCode::NotCanonicalizable:
    case ErrorCode::NotArborescence:
    case ErrorCode::AmbiguousParent:
      return true;
    default:
      return false;
  }
}

}  // namespace

FlowDataMatrix whiten(const FlowDataMatrix& data, const NoiseModel& noise) {
  const Eigen::MatrixXd l = cholesky_factor(noise, data.edge_count());
  Eigen::MatrixXd y = centred(data, noise);
  l.triangularView<Eigen::Lower>().solveInPlace(y);
  return data.with_entries(std::move(y));
}

RankTestReport estimate_model_order(const FlowDataMatrix& whitened, const ModelOrderOptions& options) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(whitened.sample_count()));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(whitened.entries() * scale);
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(whitened.edge_count());
  sigma.head(svd.singularValues().size()) = svd.singularValues();
  RankTestReport report = order_from_singular_values(sigma, whitened.sample_count(), options);
  if (report.chosen_m == 0) throw_no_stable_order(options.alpha);
  return report;
}

RankTestReport estimate_model_order(const FlowDataMatrix& whitened, double alpha) {
  ModelOrderOptions options;
  options.alpha = alpha;
  return estimate_model_order(whitened, options);
}

ReconstructionResult reconstruct_noisy(const FlowDataMatrix& data, const NoiseModel& noise,
                                       const NoisyOptions& options) {
  const int e = data.edge_count();
  const Eigen::MatrixXd l = cholesky_factor(noise, e);
  Eigen::MatrixXd y = centred(data, noise);
  l.triangularView<Eigen::Lower>().solveInPlace(y);

  const double scale = 1.0 / std::sqrt(static_cast<double>(data.sample_count()));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(y * scale, Eigen::ComputeFullU);
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(e);
  sigma.head(svd.singularValues().size()) = svd.singularValues();

  RankTestReport report = order_from_singular_values(sigma, data.sample_count(), options.order);

  // Candidate orders are tried largest first. A too-small order still spans true
  // conservation relations and can realise a coarser, wrong tree, while a too-large
  // one mixes in signal directions and fails to snap.
  std::vector<int> orders;
  if (report.chosen_m > 0) orders.push_back(report.chosen_m);
  if (options.refine_order && !report.degenerate_noise) {
    if (report.chosen_m > 0 && report.chosen_m + 1 < e) orders.push_back(report.chosen_m + 1);
    const int below = noise_floor_count(report.eigenvalues, data.sample_count());
    if (below >= 1 && below < e) orders.push_back(below);
  }
  std::sort(orders.begin(), orders.end(), std::greater<>());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());

  Eigen::MatrixXd l_inv = Eigen::MatrixXd::Identity(e, e);
  l.triangularView<Eigen::Lower>().solveInPlace(l_inv);
  const auto labels = data.edge_labels();

  std::optional<Error> failure;
  for (int m : orders) {
    try {
      const Eigen::MatrixXd model = svd.matrixU().rightCols(m).transpose() * l_inv;
      Partition partition = find_valid_partition(model, labels);
      Eigen::MatrixXd reduced = reduce_to_partition(model, labels, partition);
      if (options.canonical_reestimate) {
        if (auto canonical = canonical_partition(model, labels, partition, reduced, options.canonicalize)) {
          partition = std::move(*canonical);
          reduced = reduce_to_partition(model, labels, partition);
        }
      }
      const CutsetMatrix cutset = snap_to_cutset(reduced, partition, options.snap_band, ErrorCode::SnapFailure);
      ReconstructionResult result = realize_topology(canonicalize(cutset, options.canonicalize));
      report.used_m = m;
      result.diagnostics.estimated_m = m;
      result.diagnostics.partition = std::move(partition);
      result.diagnostics.singular_values = sigma;
      result.diagnostics.rank_test = report;
      return result;
    } catch (const Error& err) {
      if (!is_structural_failure(err.code())) throw;
      // Report the failure at the tested order when there is one.
      if (!failure || m == report.chosen_m) failure = err;
    }
  }
  if (!failure) throw_no_stable_order(options.order.alpha);
  throw *failure;
}

ReconstructionResult reconstruct_noisy(const FlowDataMatrix& data, const NoiseModel& noise, double alpha) {
  NoisyOptions options;
  options.order.alpha = alpha;
  return reconstruct_noisy(data, noise, options);
}

}  // namespace flowtopo
