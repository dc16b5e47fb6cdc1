#pragma once

#include "flowtopo/noise_pipeline.hpp"
#include "flowtopo/realize.hpp"
#include "flowtopo/synth.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace flowtopo {

enum class PipelineMode { Exact, Noisy };

PipelineMode parse_mode(std::string_view name);

/**
 * End-to-end request. Either `data_file` (measured flows) or `network_file`
 * (ground truth to sample `samples` flows from) must be given. Noisy mode needs
 * `noise_file` or `sigma2`; when sampling from a network, `snr` sets the noise
 * level instead.
 */
struct PipelineRequest {
  std::optional<std::filesystem::path> data_file;
  std::optional<std::filesystem::path> network_file;
  PipelineMode mode = PipelineMode::Exact;
  std::optional<std::filesystem::path> noise_file;
  std::optional<double> sigma2;
  std::optional<double> snr;
  NoiseKind noise_kind = NoiseKind::Homoscedastic;
  int samples = 0;  // 0 -> 50 e
  bool transposed = false;
  double zero_tol = kDefaultZeroTol;
  double round_tol = kDefaultRoundTol;
  NoisyOptions noisy;
  std::uint64_t seed = 1;
};

ReconstructionResult run_pipeline(const PipelineRequest& request);

struct SweepNetwork {
  Family family = Family::Binary;
  FlowNetwork network;
};

/// One generated network per (family, seed) pair with the family's default shape.
std::vector<SweepNetwork> networks_from_families(std::span<const Family> families,
                                                 std::span<const std::uint64_t> seeds);

struct SweepConfig {
  std::vector<SweepNetwork> networks;
  std::vector<double> snr_list{100.0, 50.0, 30.0, 10.0, 5.0};
  std::vector<int> z_list;  // empty -> 1..50
  int trials = 100;
  NoiseKind noise_kind = NoiseKind::Homoscedastic;
  NoisyOptions noisy;
  std::uint64_t base_seed = 1;
  unsigned threads = 0;  // 0 -> hardware concurrency
  /// Stop scanning z for a cell once every trial at some z succeeded.
  bool early_stop = true;
  /// A trial slower than this marks its cell aborted; larger z are skipped.
  std::optional<std::chrono::duration<double>> trial_time_budget;
  /// Rows are appended and flushed as each (cell, z) finishes.
  std::optional<std::filesystem::path> output;
};

struct SweepPoint {
  int z = 0;
  int successes = 0;
  int trials = 0;
  double accuracy = 0.0;
  double mean_runtime_s = 0.0;
  std::map<std::string, int> failures;  // error code (or "Mismatch") -> count
};

struct SweepCell {
  std::size_t network = 0;
  Family family = Family::Binary;
  int edges = 0;
  double snr = 0.0;
  std::vector<SweepPoint> curve;
  std::optional<int> min_z;  // smallest tested z with accuracy 1
  bool aborted = false;
};

struct SweepResult {
  std::vector<SweepCell> cells;
};

inline constexpr const char* kSweepCsvHeader = "family,e,snr,z,accuracy,min_z_flag,network,successes,trials";

/// Plot-ready rows; min_z_flag is 1 on the minimal-z row, "none" on the last row of a cell without one.
std::string sweep_to_csv(const SweepResult& result);

/// Seed of one trial; depends only on its coordinates, never on scheduling.
std::uint64_t trial_seed(std::uint64_t base, std::size_t network, std::size_t snr_index, int z, int trial);

/// Samples n_s = z e flows, adds noise at `snr`, reconstructs and compares with the truth.
bool run_trial(const FlowNetwork& truth, double snr, int z, NoiseKind kind, const NoisyOptions& options,
               std::uint64_t seed, std::string* failure = nullptr);

SweepResult run_sweep(const SweepConfig& config);

struct StageTimings {
  int edges = 0;
  int relations = 0;  // m
  double svd_s = 0.0;
  double rref_s = 0.0;
  double algorithm1_s = 0.0;
  double algorithm2_s = 0.0;
  double total_s = 0.0;
  double total_variance = 0.0;  // across repeats
  bool recovered = false;
};

struct ScalingReport {
  std::vector<StageTimings> rows;  // medians per size
  // Least-squares slopes of log(time) against log(e), except algorithm 2 which is against log(m).
  // NaN when fewer than two sizes were run.
  double slope_svd = 0.0;
  double slope_rref = 0.0;
  double slope_algorithm1 = 0.0;
  double slope_algorithm2_vs_m = 0.0;
  double slope_total = 0.0;
  /// With n_s = 2e the SVD is O(e^2 n_s + n_s^3) = O(e^3); allows half a power of slack.
  bool svd_within_bound = true;
};

ScalingReport run_scaling_bench(std::span<const int> sizes, int repeats, std::uint64_t seed = 1);

std::string scaling_to_json(const ScalingReport& report);
std::string scaling_to_csv(const ScalingReport& report);

/// Least-squares slope of log(y) on log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace flowtopo
