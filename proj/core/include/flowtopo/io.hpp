#pragma once

#include "flowtopo/canonical_cutset.hpp"
#include "flowtopo/graph_model.hpp"
#include "flowtopo/noise_pipeline.hpp"
#include "flowtopo/nullspace.hpp"
#include "flowtopo/rank_test.hpp"
#include "flowtopo/realize.hpp"
#include "flowtopo/synth.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

// File formats:
//   network JSON   {"nodes": n, "edges": [[src, dst], ...], "labels": [...]}   (nodes are 1-based)
//   data CSV       one row per edge: label, sample_1, ..., sample_ns       (label may be "x7" or "7")
//                  transposed: header row of labels, then one row per sample
//   matrix CSV     header row of edge labels (x<label>), then integer or real rows
//   result JSON    {"root": e+1, "edges": [[s, t], ...]} with edges in label order
//   noise JSON     {"kind": "homo", "sigma2": s} | {"kind": "hetero", "cov_csv": path} |
//                  {"kind": "hetero", "variances": [...]}
namespace flowtopo::io {

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

FlowNetwork parse_network_json(std::string_view text);
std::string network_to_json(const FlowNetwork& network);
std::string network_to_dot(const FlowNetwork& network);

FlowDataMatrix parse_data_csv(std::string_view text, bool transposed = false, bool allow_few_samples = false);
std::string data_to_csv(const FlowDataMatrix& data, bool transposed = false);

std::string matrix_to_csv(const Eigen::MatrixXi& entries, std::span<const EdgeLabel> labels);
std::string matrix_to_csv(const Eigen::MatrixXd& entries, std::span<const EdgeLabel> labels);
std::string cutset_to_csv(const CutsetMatrix& cutset);
/// Reads a matrix CSV with an x<label> header whose first m columns form the identity.
CutsetMatrix parse_cutset_csv(std::string_view text);

std::string result_to_json(const ReconstructionResult& result, bool with_diagnostics = false);
std::string result_to_dot(const ReconstructionResult& result);
/// Accepts the result JSON above (diagnostics ignored).
ReconstructionResult parse_result_json(std::string_view text);

std::string provenance_to_json(const CanonicalCutsetMatrix& canonical);
std::string rank_report_to_json(const RankTestReport& report);

/// Relative cov_csv paths are resolved against `base_dir`.
NoiseModel parse_noise_json(std::string_view text, const std::filesystem::path& base_dir = {});
std::string noise_to_json(const NoiseModel& model);

ArborescenceSpec parse_spec_json(std::string_view text);
std::string spec_to_json(const ArborescenceSpec& spec);

}  // namespace flowtopo::io
