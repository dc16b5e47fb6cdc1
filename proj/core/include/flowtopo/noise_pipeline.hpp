#pragma once

#include "flowtopo/canonical_cutset.hpp"
#include "flowtopo/nullspace.hpp"
#include "flowtopo/rank_test.hpp"
#include "flowtopo/realize.hpp"

#include <Eigen/Core>

namespace flowtopo {

enum class NoiseKind { Homoscedastic, Heteroscedastic };

/// Additive measurement error y = x + eps with eps ~ (mean, covariance).
struct NoiseModel {
  NoiseKind kind = NoiseKind::Homoscedastic;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  static NoiseModel homoscedastic(int edges, double sigma2);
  static NoiseModel heteroscedastic(Eigen::MatrixXd covariance);
  static NoiseModel heteroscedastic(const Eigen::VectorXd& variances);

  int edge_count() const noexcept { return static_cast<int>(covariance.rows()); }
};

enum class OrderStatistic {
  Bartlett,        // n_s * [k ln(mean) - sum ln(lambda)]
  BartlettLawley,  // same with the multiplier n_s - (e - k) - (2k^2 + k + 2) / 6k
};

struct ModelOrderOptions {
  double alpha = 0.05;
  OrderStatistic statistic = OrderStatistic::Bartlett;
  double zero_tol = kDefaultZeroTol;
};

struct NoisyOptions {
  ModelOrderOptions order;
  double snap_band = 0.35;
  /**
   * When the tested order gives a non-integral or unrealisable cutset, retry with
   * m + 1 and then with the number of whitened eigenvalues under the unit-noise
   * Marchenko-Pastur edge.
   */
  bool refine_order = true;
  /**
   * Round R_D provisionally, canonicalise to find the non-sink branch set, then
   * recompute R_D for that partition from the unrounded basis before snapping.
   * Estimation error is markedly smaller on the canonical partition.
   */
  bool canonical_reestimate = true;
  CanonicalizeOptions canonicalize;
};

/// Y_s = L^{-1} (Y - mu) where covariance = L L^T.
FlowDataMatrix whiten(const FlowDataMatrix& data, const NoiseModel& noise);

/**
 * Sequential test on the eigenvalues of S_y = Y_s Y_s^T / n_s: for k = e, e-1, ..., 2
 * the k smallest eigenvalues are tested for equality; the first k not rejected at
 * level alpha is the number of conservation relations.
 */
RankTestReport estimate_model_order(const FlowDataMatrix& whitened, const ModelOrderOptions& options = {});
RankTestReport estimate_model_order(const FlowDataMatrix& whitened, double alpha);

/// Whiten, test the order, back-transform the null basis, snap, canonicalise, realise.
ReconstructionResult reconstruct_noisy(const FlowDataMatrix& data, const NoiseModel& noise,
                                       const NoisyOptions& options = {});
ReconstructionResult reconstruct_noisy(const FlowDataMatrix& data, const NoiseModel& noise, double alpha);

}  // namespace flowtopo
