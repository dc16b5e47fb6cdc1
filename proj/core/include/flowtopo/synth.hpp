#pragma once

#include "flowtopo/graph_model.hpp"
#include "flowtopo/noise_pipeline.hpp"
#include "flowtopo/nullspace.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace flowtopo {

enum class Family { Binary, ThinLong, FatShort };

std::string_view to_string(Family family) noexcept;
Family parse_family(std::string_view name);

struct IntRange {
  int min = 0;
  int max = 0;
};

/**
 * Shape of a random arborescence. Layer 1 holds the children of the source; at
 * every later layer a random subset of the previous layer's nodes (all of them
 * when `expanded_per_layer` is empty) receives `children` new nodes each.
 */
struct ArborescenceSpec {
  Family family = Family::Binary;
  IntRange layers{2, 7};
  IntRange children{2, 2};
  std::optional<IntRange> expanded_per_layer;
  std::uint64_t seed = 0;

  static ArborescenceSpec defaults(Family family, std::uint64_t seed = 0);
};

struct FlowSamplerConfig {
  std::vector<double> means{100.0, 200.0, 300.0};
  std::vector<double> std_devs{10.0, 20.0, 30.0};
  /// Optional fixed component per sink edge (edge-list order); drawn uniformly when empty.
  std::vector<int> sink_components;
  int samples = 0;
  std::uint64_t seed = 0;
};

struct SnrSetting {
  double snr = 100.0;
  NoiseKind kind = NoiseKind::Homoscedastic;
};

/// Node ids follow the labelling convention: root = e + 1, other nodes = label of their incoming edge.
FlowNetwork generate_arborescence(const ArborescenceSpec& spec);

/// Random arborescence with exactly `edges` edges where every non-leaf has at least two children.
FlowNetwork generate_arborescence_with_edges(int edges, std::uint64_t seed);

FlowDataMatrix sample_flows(const FlowNetwork& network, const FlowSamplerConfig& cfg);

/// Adds zero-mean Gaussian noise scaled to the requested per-edge signal-to-noise ratio.
std::pair<FlowDataMatrix, NoiseModel> add_noise(const FlowDataMatrix& data, const SnrSetting& snr,
                                                 std::uint64_t seed);

}  // namespace flowtopo
