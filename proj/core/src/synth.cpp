#include "flowtopo/synth.hpp"

#include "flowtopo/errors.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

namespace flowtopo {

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::Binary: return "binary";
    case Family::ThinLong: return "thin_long";
    case Family::FatShort: return "fat_short";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "binary") return Family::Binary;
  if (name == "thin_long" || name == "thin-long") return Family::ThinLong;
  if (name == "fat_short" || name == "fat-short") return Family::FatShort;
  throw Error(ErrorCode::ParseError, "unknown network family '" + std::string(name) + "'");
}

ArborescenceSpec ArborescenceSpec::defaults(Family family, std::uint64_t seed) {
  ArborescenceSpec spec;
  spec.family = family;
  spec.seed = seed;
  switch (family) {
    case Family::Binary:
      spec.layers = {2, 7};
      spec.children = {2, 2};
      break;
    case Family::ThinLong:
      spec.layers = {6, 12};
      spec.children = {2, 3};
      spec.expanded_per_layer = IntRange{1, 2};
      break;
    case Family::FatShort:
      spec.layers = {2, 3};
      spec.children = {8, 20};
      spec.expanded_per_layer = IntRange{1, 3};
      break;
  }
  return spec;
}

namespace {

int draw(std::mt19937_64& rng, IntRange range) {
  return std::uniform_int_distribution<int>(range.min, range.max)(rng);
}

// Parent list (node 0 is the root) -> labelled network with shuffled edge labels.
FlowNetwork label_tree(const std::vector<int>& parent, std::mt19937_64& rng) {
  const int e = static_cast<int>(parent.size()) - 1;
  std::vector<int> label(parent.size(), e + 1);  // node -> label
  std::vector<int> perm(static_cast<size_t>(e));
  std::iota(perm.begin(), perm.end(), 1);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (int v = 1; v <= e; ++v) label[static_cast<size_t>(v)] = perm[static_cast<size_t>(v - 1)];

  std::vector<Edge> edges(static_cast<size_t>(e));
  for (int v = 1; v <= e; ++v) {
    edges[static_cast<size_t>(label[static_cast<size_t>(v)] - 1)] = {label[static_cast<size_t>(parent[static_cast<size_t>(v)])],
                                                                    label[static_cast<size_t>(v)]};
  }
  return FlowNetwork(e + 1, std::move(edges));
}

}  // namespace

FlowNetwork generate_arborescence(const ArborescenceSpec& spec) {
  if (spec.layers.max < 1 || spec.layers.min > spec.layers.max || spec.layers.min < 0) {
    throw Error(ErrorCode::EmptySpec, "layer range produces no layers");
  }
  if (spec.children.min < 2 || spec.children.min > spec.children.max) {
    throw Error(ErrorCode::InvalidArgument,
                "children per parent must be a range with min >= 2 (a single child carries its parent's flow)");
  }
  if (spec.family == Family::Binary && (spec.children.min != 2 || spec.children.max != 2)) {
    throw Error(ErrorCode::InvalidArgument, "binary family requires exactly two children per parent");
  }
  if (spec.expanded_per_layer &&
      (spec.expanded_per_layer->min < 1 || spec.expanded_per_layer->min > spec.expanded_per_layer->max)) {
    throw Error(ErrorCode::InvalidArgument, "expanded-per-layer range must have 1 <= min <= max");
  }

  std::mt19937_64 rng(spec.seed);
  const int layers = std::max(1, draw(rng, spec.layers));

  std::vector<int> parent{-1};
  std::vector<int> frontier{0};
  for (int layer = 1; layer <= layers; ++layer) {
    std::vector<int> expand = frontier;
    if (layer > 1 && spec.expanded_per_layer) {
      const int n = static_cast<int>(frontier.size());
      const int count = draw(rng, {std::min(spec.expanded_per_layer->min, n), std::min(spec.expanded_per_layer->max, n)});
      std::shuffle(expand.begin(), expand.end(), rng);
      expand.resize(static_cast<size_t>(count));
      std::sort(expand.begin(), expand.end());
    }
    std::vector<int> next;
    for (int v : expand) {
      const int children = draw(rng, spec.children);
      for (int c = 0; c < children; ++c) {
        next.push_back(static_cast<int>(parent.size()));
        parent.push_back(v);
      }
    }
    frontier = std::move(next);
  }
  return label_tree(parent, rng);
}

FlowNetwork generate_arborescence_with_edges(int edges, std::uint64_t seed) {
  if (edges < 2) throw Error(ErrorCode::EmptySpec, "need at least two edges");
  std::mt19937_64 rng(seed);
  std::vector<int> parent{-1, 0, 0};
  std::vector<int> leaves{1, 2};
  std::vector<int> inner{0};
  while (static_cast<int>(parent.size()) - 1 < edges) {
    const int remaining = edges - (static_cast<int>(parent.size()) - 1);
    if (remaining >= 2 && std::bernoulli_distribution(0.6)(rng)) {
      const size_t pick = std::uniform_int_distribution<size_t>(0, leaves.size() - 1)(rng);
      const int v = leaves[pick];
      leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
      inner.push_back(v);
      for (int c = 0; c < 2; ++c) {
        leaves.push_back(static_cast<int>(parent.size()));
        parent.push_back(v);
      }
    } else {
      const int v = inner[std::uniform_int_distribution<size_t>(0, inner.size() - 1)(rng)];
      leaves.push_back(static_cast<int>(parent.size()));
      parent.push_back(v);
    }
  }
  return label_tree(parent, rng);
}

FlowDataMatrix sample_flows(const FlowNetwork& network, const FlowSamplerConfig& cfg) {
  if (!is_arborescence(network)) throw Error(ErrorCode::NotArborescence, "flow sampling needs an arborescence");
  if (cfg.samples <= 0) throw Error(ErrorCode::InvalidArgument, "sample count must be positive");
  if (cfg.means.empty() || cfg.means.size() != cfg.std_devs.size()) {
    throw Error(ErrorCode::InvalidArgument, "flow components need matching means and standard deviations");
  }
  for (size_t i = 0; i < cfg.means.size(); ++i) {
    if (!(cfg.means[i] > 0.0) || !(cfg.std_devs[i] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "component means and deviations must be positive");
    }
  }

  const int e = network.edge_count();
  const auto edges = network.edges();
  std::mt19937_64 rng(cfg.seed);

  std::vector<int> sink_positions;
  for (int i = 0; i < e; ++i) {
    if (network.is_sink(edges[static_cast<size_t>(i)].target)) sink_positions.push_back(i);
  }
  std::vector<int> component(sink_positions.size());
  if (!cfg.sink_components.empty()) {
    if (cfg.sink_components.size() != sink_positions.size()) {
      throw Error(ErrorCode::InvalidArgument, "sink component list has the wrong length");
    }
    for (size_t i = 0; i < component.size(); ++i) {
      if (cfg.sink_components[i] < 0 || cfg.sink_components[i] >= static_cast<int>(cfg.means.size())) {
        throw Error(ErrorCode::InvalidArgument, "sink component index out of range");
      }
      component[i] = cfg.sink_components[i];
    }
  } else {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(cfg.means.size()) - 1);
    for (auto& c : component) c = pick(rng);
  }

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(e, cfg.samples);
  for (size_t i = 0; i < sink_positions.size(); ++i) {
    const auto c = static_cast<size_t>(component[i]);
    std::normal_distribution<double> flow(cfg.means[c], cfg.std_devs[c]);
    for (int j = 0; j < cfg.samples; ++j) x(sink_positions[i], j) = flow(rng);
  }

  // Each non-sink edge carries the sum of the edges leaving its target, deepest first.
  std::vector<std::vector<int>> out_edges(static_cast<size_t>(network.node_count()) + 1);
  for (int i = 0; i < e; ++i) out_edges[static_cast<size_t>(edges[static_cast<size_t>(i)].source)].push_back(i);
  std::vector<int> bfs;
  bfs.reserve(static_cast<size_t>(e));
  for (int i : out_edges[static_cast<size_t>(network.sources().front())]) bfs.push_back(i);
  for (size_t h = 0; h < bfs.size(); ++h) {
    for (int i : out_edges[static_cast<size_t>(edges[static_cast<size_t>(bfs[h])].target)]) bfs.push_back(i);
  }
  for (auto it = bfs.rbegin(); it != bfs.rend(); ++it) {
    const auto& children = out_edges[static_cast<size_t>(edges[static_cast<size_t>(*it)].target)];
    if (children.empty()) continue;
    for (int child : children) x.row(*it) += x.row(child);
  }

  return FlowDataMatrix(std::move(x), std::vector<EdgeLabel>(network.labels().begin(), network.labels().end()),
                        cfg.samples <= e);
}

std::pair<FlowDataMatrix, NoiseModel> add_noise(const FlowDataMatrix& data, const SnrSetting& snr,
                                                 std::uint64_t seed) {
  if (!(snr.snr > 0.0)) throw Error(ErrorCode::InvalidArgument, "SNR must be positive");
  const Eigen::MatrixXd& x = data.entries();
  const Eigen::VectorXd mean = x.rowwise().mean();
  const Eigen::VectorXd variance = (x.colwise() - mean).rowwise().squaredNorm() / static_cast<double>(x.cols());

  // Constant rows have no signal variance; keep the covariance positive definite anyway.
  constexpr double kFloor = 1e-300;
  Eigen::VectorXd noise_var(variance.size());
  if (snr.kind == NoiseKind::Homoscedastic) {
    noise_var.setConstant(std::max(variance.mean() / snr.snr, kFloor));
  } else {
    noise_var = (variance / snr.snr).cwiseMax(kFloor);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd y = x;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double sd = std::sqrt(noise_var(i));
    for (Eigen::Index j = 0; j < y.cols(); ++j) y(i, j) += sd * unit(rng);
  }

  NoiseModel model = snr.kind == NoiseKind::Homoscedastic
                         ? NoiseModel::homoscedastic(static_cast<int>(noise_var.size()), noise_var(0))
                         : NoiseModel::heteroscedastic(noise_var);
  return {data.with_entries(std::move(y)), std::move(model)};
}

}  // namespace flowtopo
