#pragma once

#include "flowtopo/graph_model.hpp"
#include "flowtopo/io.hpp"
#include "flowtopo/nullspace.hpp"

#include <filesystem>
#include <string>

namespace fixtures {

inline std::filesystem::path data_dir() { return FLOWTOPO_TEST_DATA_DIR; }

/**
 * Meshed example network: internal nodes 1, 2, 3, 5; node 4 and 6-7 are sinks,
 * 8-10 are sources. Edge i carries flow x_i.
 */
inline flowtopo::FlowNetwork meshed_network() {
  return flowtopo::FlowNetwork(10, {
                                       {1, 4},   // x1
                                       {2, 6},   // x2
                                       {3, 7},   // x3
                                       {2, 3},   // x4
                                       {8, 1},   // x5
                                       {5, 1},   // x6
                                       {5, 2},   // x7
                                       {9, 3},   // x8
                                       {10, 5},  // x9
                                   });
}

/// Source 4 feeds node 1 via x1; x2 and x3 leave node 1 to sinks 2 and 3.
inline flowtopo::FlowNetwork star_network() { return flowtopo::FlowNetwork(4, {{4, 1}, {1, 2}, {1, 3}}); }

/// Radial network of the worked example, already under the labelling convention.
inline flowtopo::FlowNetwork worked_tree() {
  return flowtopo::FlowNetwork(9, {{9, 1}, {1, 2}, {2, 3}, {2, 4}, {2, 5}, {1, 6}, {6, 7}, {6, 8}});
}

inline flowtopo::FlowDataMatrix worked_data() {
  return flowtopo::io::parse_data_csv(flowtopo::io::read_text(data_dir() / "worked_example.csv"));
}

/// The published 3 x 8 null basis, rounded to two decimals.
inline Eigen::MatrixXd worked_printed_basis() {
  const auto cut = flowtopo::io::read_text(data_dir() / "worked_example_null_basis.csv");
  const auto m = flowtopo::io::parse_data_csv(cut, /*transposed=*/true, /*allow_few_samples=*/true);
  return m.entries().transpose();
}

}  // namespace fixtures
