#include "expect_error.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "flowtopo/graph_model.hpp"
#include "flowtopo/synth.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace flowtopo;

namespace {

Eigen::MatrixXi rows_of(std::initializer_list<std::initializer_list<int>> rows) {
  Eigen::MatrixXi m(static_cast<int>(rows.size()), static_cast<int>(rows.begin()->size()));
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (int v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST(GraphModel, MeshedReducedIncidenceMatchesPrintedMatrix) {
  const auto cg = build_conservation_graph(fixtures::meshed_network());
  const auto a = reduced_incidence_matrix(cg);
  EXPECT_EQ(a.row_nodes, (std::vector<NodeId>{1, 2, 3, 5}));
  EXPECT_EQ(a.edge_labels, (std::vector<EdgeLabel>{1, 2, 3, 4, 5, 6, 7, 8, 9}));
  const Eigen::MatrixXi expected = rows_of({
      {-1, 0, 0, 0, 1, 1, 0, 0, 0},
      {0, -1, 0, -1, 0, 0, 1, 0, 0},
      {0, 0, -1, 1, 0, 0, 0, 1, 0},
      {0, 0, 0, 0, 0, -1, -1, 0, 1},
  });
  EXPECT_EQ(a.entries, expected);
}

TEST(GraphModel, MeshedCutsetMatchesPrintedMatrix) {
  const auto cg = build_conservation_graph(fixtures::meshed_network());
  const std::vector<EdgeLabel> branches{1, 2, 3, 6};
  const auto cf = fcutset_matrix(cg, branches);
  const std::vector<EdgeLabel> order{1, 2, 3, 6, 4, 5, 7, 8, 9};
  const Eigen::MatrixXi expected = rows_of({
      {1, 0, 0, 0, 0, -1, 1, 0, -1},
      {0, 1, 0, 0, 1, 0, -1, 0, 0},
      {0, 0, 1, 0, -1, 0, 0, -1, 0},
      {0, 0, 0, 1, 0, 0, 1, 0, -1},
  });
  EXPECT_EQ(cf.columns_in_order(order), expected);
  EXPECT_EQ(std::vector<EdgeLabel>(cf.branches().begin(), cf.branches().end()), branches);
}

TEST(GraphModel, FullIncidenceColumnsSumToZero) {
  const auto cg = build_conservation_graph(fixtures::meshed_network());
  const Eigen::MatrixXi full = full_incidence_matrix(cg);
  EXPECT_EQ(full.rows(), 5);
  EXPECT_EQ(full.colwise().sum(), Eigen::RowVectorXi::Zero(9));
  EXPECT_EQ(full.topRows(4), reduced_incidence_matrix(cg).entries);
}

TEST(GraphModel, StarNetwork) {
  const auto net = fixtures::star_network();
  const auto cg = build_conservation_graph(net);
  EXPECT_EQ(reduced_incidence_matrix(cg).entries, rows_of({{1, -1, -1}}));
  const std::vector<EdgeLabel> branch{1};
  const auto cf = fcutset_matrix(cg, branch);
  EXPECT_EQ(cf.entries(), rows_of({{1, -1, -1}}));
  EXPECT_EQ(cf.chords().size(), 2u);
  EXPECT_TRUE(is_arborescence(net));
  EXPECT_EQ(net.sink_edges(), (std::vector<EdgeLabel>{2, 3}));
  EXPECT_EQ(net.non_sink_edges(), (std::vector<EdgeLabel>{1}));
}

TEST(GraphModel, SourcesAndSinksComeFromDegrees) {
  const auto net = fixtures::meshed_network();
  EXPECT_EQ(std::vector<NodeId>(net.sources().begin(), net.sources().end()), (std::vector<NodeId>{8, 9, 10}));
  EXPECT_EQ(std::vector<NodeId>(net.sinks().begin(), net.sinks().end()), (std::vector<NodeId>{4, 6, 7}));
  EXPECT_EQ(net.internal_nodes(), (std::vector<NodeId>{1, 2, 3, 5}));
  EXPECT_FALSE(is_arborescence(net));
}

TEST(GraphModel, RejectsMalformedNetworks) {
  EXPECT_EQ(fixtures::error_code_of([] { FlowNetwork(3, {{1, 1}}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(fixtures::error_code_of([] { FlowNetwork(3, {{1, 4}}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(fixtures::error_code_of([] { FlowNetwork(3, {{1, 2}, {2, 3}}, {1, 1}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(fixtures::error_code_of([] { build_conservation_graph(FlowNetwork(2, {{1, 2}})); }), ErrorCode::NoInternalNodes);
  EXPECT_EQ(fixtures::error_code_of([] { build_conservation_graph(FlowNetwork(6, {{1, 2}, {2, 3}, {4, 5}, {5, 6}})); }),
            ErrorCode::DisconnectedNetwork);
}

TEST(GraphModel, RejectsBranchSetsThatAreNotSpanningTrees) {
  const auto cg = build_conservation_graph(fixtures::meshed_network());
  const std::vector<EdgeLabel> too_few{1, 2, 3};
  const std::vector<EdgeLabel> valid{6, 7, 4, 3};
  EXPECT_EQ(fixtures::error_code_of([&] { fcutset_matrix(cg, too_few); }), ErrorCode::NotASpanningTree);
  const std::vector<EdgeLabel> loop{1, 5, 6, 9};  // 1-E via x1 and x5 closes a cycle
  EXPECT_EQ(fixtures::error_code_of([&] { fcutset_matrix(cg, loop); }), ErrorCode::NotASpanningTree);
  EXPECT_NO_THROW(fcutset_matrix(cg, valid));
}

TEST(GraphModel, CutsetMatrixValidatesForm) {
  Eigen::MatrixXi bad(1, 3);
  bad << 1, 2, 0;
  EXPECT_EQ(fixtures::error_code_of([&] { CutsetMatrix(bad, {1}, {2, 3}); }), ErrorCode::InvalidArgument);
  Eigen::MatrixXi not_identity(1, 2);
  not_identity << -1, 1;
  EXPECT_EQ(fixtures::error_code_of([&] { CutsetMatrix(not_identity, {1}, {2}); }), ErrorCode::InvalidArgument);
}

TEST(GraphModelProperty, SampledFlowsSatisfyConservation) {
  for (Family fam : {Family::Binary, Family::ThinLong, Family::FatShort}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto net = generate_arborescence(ArborescenceSpec::defaults(fam, seed));
      FlowSamplerConfig cfg;
      cfg.samples = 20;
      cfg.seed = seed;
      const auto data = sample_flows(net, cfg);
      const auto a = reduced_incidence_matrix(build_conservation_graph(net));
      const Eigen::MatrixXd residual = a.entries.cast<double>() * data.entries();
      EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-9 * data.entries().cwiseAbs().maxCoeff());
    }
  }
}

TEST(GraphModelProperty, CutsetsMatchComponentOracleAndSpanIncidence) {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Family fam = seed % 2 ? Family::Binary : Family::FatShort;
    const auto net = seed % 5 == 0 ? fixtures::meshed_network() : generate_arborescence(ArborescenceSpec::defaults(fam, seed));
    const auto cg = build_conservation_graph(net);
    const auto a = reduced_incidence_matrix(cg);
    const auto tree = oracle::random_spanning_tree(net, rng);
    ASSERT_EQ(static_cast<int>(tree.size()), cg.internal_node_count());

    const auto cf = fcutset_matrix(cg, tree);
    const auto expected = oracle::fundamental_cutsets(net, tree);
    const auto labels = cf.column_labels();
    for (int r = 0; r < cf.rows(); ++r) {
      for (int j = 0; j < cf.cols(); ++j) {
        const auto& row = expected[static_cast<size_t>(r)];
        const auto it = row.find(labels[static_cast<size_t>(j)]);
        EXPECT_EQ(cf.entries()(r, j), it == row.end() ? 0 : it->second) << "row " << r << " label " << labels[static_cast<size_t>(j)];
      }
    }

    const Eigen::MatrixXd cf_d = cf.columns_in_order(a.edge_labels).cast<double>();
    EXPECT_LT(oracle::subspace_distance(cf_d, a.entries.cast<double>()), 1e-10);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(cf_d);
    EXPECT_EQ(lu.rank(), cg.internal_node_count());
  }
}
