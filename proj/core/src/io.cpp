#include "flowtopo/io.hpp"

#include "flowtopo/errors.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace flowtopo::io {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> cells;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(sep, start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    const auto line = trim(text.substr(start, pos - start));
    if (!line.empty() && line.front() != '#') lines.push_back(line);
    start = pos + 1;
  }
  return lines;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  // std::from_chars for double rejects a leading '+'.
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

double to_double(std::string_view s) {
  double v = 0.0;
  if (!parse_double(s, v)) throw Error(ErrorCode::ParseError, "not a number: '" + std::string(s) + "'");
  return v;
}

EdgeLabel to_label(std::string_view s) {
  if (!s.empty() && (s.front() == 'x' || s.front() == 'X')) s.remove_prefix(1);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v <= 0) {
    throw Error(ErrorCode::ParseError, "not an edge label: '" + std::string(s) + "'");
  }
  return v;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ParseError, ex.what());
  }
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("field '") + key + "': " + ex.what());
  }
}

std::string header(std::span<const EdgeLabel> labels) {
  std::string out;
  for (size_t j = 0; j < labels.size(); ++j) {
    if (j) out += ',';
    out += 'x' + std::to_string(labels[j]);
  }
  out += '\n';
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

Eigen::MatrixXd parse_real_matrix(std::string_view text) {
  const auto lines = lines_of(text);
  std::vector<std::vector<double>> rows;
  for (const auto line : lines) {
    const auto cells = split(line);
    double probe = 0.0;
    if (rows.empty() && !parse_double(cells.front(), probe)) continue;  // header
    std::vector<double> row;
    for (const auto cell : cells) row.push_back(to_double(cell));
    if (!rows.empty() && row.size() != rows.front().size()) throw Error(ErrorCode::ParseError, "ragged CSV rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, "CSV has no numeric rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << text;
}

// ---------------------------------------------------------------------------
// networks

FlowNetwork parse_network_json(std::string_view text) {
  const json j = parse_json(text);
  const int nodes = field<int>(j, "nodes");
  std::vector<Edge> edges;
  for (const auto& pair : field<std::vector<std::vector<int>>>(j, "edges")) {
    if (pair.size() != 2) throw Error(ErrorCode::ParseError, "each edge must be a [src, dst] pair");
    edges.push_back({pair[0], pair[1]});
  }
  std::vector<EdgeLabel> labels;
  if (j.contains("labels") && !j.at("labels").is_null()) labels = field<std::vector<EdgeLabel>>(j, "labels");
  return FlowNetwork(nodes, std::move(edges), std::move(labels));
}

std::string network_to_json(const FlowNetwork& network) {
  json j;
  j["nodes"] = network.node_count();
  json edges = json::array();
  for (const auto& [s, t] : network.edges()) edges.push_back({s, t});
  j["edges"] = std::move(edges);
  j["labels"] = std::vector<EdgeLabel>(network.labels().begin(), network.labels().end());
  return j.dump(2) + "\n";
}

std::string network_to_dot(const FlowNetwork& network) {
  std::ostringstream os;
  os << "digraph network {\n";
  const auto edges = network.edges();
  const auto labels = network.labels();
  for (size_t i = 0; i < edges.size(); ++i) {
    os << "  \"" << edges[i].source << "\" -> \"" << edges[i].target << "\" [label=\"x" << labels[i] << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// data

FlowDataMatrix parse_data_csv(std::string_view text, bool transposed, bool allow_few_samples) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorCode::ParseError, "empty data file");

  if (transposed) {
    std::vector<EdgeLabel> labels;
    size_t first = 0;
    const auto head = split(lines.front());
    double probe = 0.0;
    if (!parse_double(head.front(), probe)) {
      for (const auto cell : head) labels.push_back(to_label(cell));
      first = 1;
    }
    std::string body;
    for (size_t i = first; i < lines.size(); ++i) {
      body.append(lines[i]);
      body += '\n';
    }
    Eigen::MatrixXd samples = parse_real_matrix(body);
    return FlowDataMatrix(samples.transpose(), std::move(labels), allow_few_samples);
  }

  std::vector<EdgeLabel> labels;
  std::vector<std::vector<double>> rows;
  for (const auto line : lines) {
    const auto cells = split(line);
    if (cells.size() < 2) throw Error(ErrorCode::ParseError, "data row needs a label and at least one sample");
    double probe = 0.0;
    if (rows.empty() && labels.empty() && !parse_double(cells[1], probe)) continue;  // header
    labels.push_back(to_label(cells[0]));
    std::vector<double> row;
    for (size_t j = 1; j < cells.size(); ++j) row.push_back(to_double(cells[j]));
    if (!rows.empty() && row.size() != rows.front().size()) throw Error(ErrorCode::ParseError, "ragged data rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, "no data rows");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return FlowDataMatrix(std::move(x), std::move(labels), allow_few_samples);
}

std::string data_to_csv(const FlowDataMatrix& data, bool transposed) {
  std::string out;
  const auto& x = data.entries();
  if (transposed) {
    out = header(data.edge_labels());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (i) out += ',';
        out += format_double(x(i, j));
      }
      out += '\n';
    }
    return out;
  }
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out += 'x' + std::to_string(data.edge_labels()[static_cast<size_t>(i)]);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out += ',';
      out += format_double(x(i, j));
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// matrices

std::string matrix_to_csv(const Eigen::MatrixXi& entries, std::span<const EdgeLabel> labels) {
  std::string out = header(labels);
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      if (j) out += ',';
      out += std::to_string(entries(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string matrix_to_csv(const Eigen::MatrixXd& entries, std::span<const EdgeLabel> labels) {
  std::string out = header(labels);
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      if (j) out += ',';
      out += format_double(entries(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string cutset_to_csv(const CutsetMatrix& cutset) {
  return matrix_to_csv(cutset.entries(), cutset.column_labels());
}

CutsetMatrix parse_cutset_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.size() < 2) throw Error(ErrorCode::ParseError, "cutset CSV needs a header and at least one row");
  std::vector<EdgeLabel> labels;
  for (const auto cell : split(lines.front())) labels.push_back(to_label(cell));
  const auto m = static_cast<Eigen::Index>(lines.size() - 1);
  const auto e = static_cast<Eigen::Index>(labels.size());
  if (m > e) throw Error(ErrorCode::ParseError, "cutset CSV has more rows than columns");
  Eigen::MatrixXi entries(m, e);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto cells = split(lines[static_cast<size_t>(i + 1)]);
    if (static_cast<Eigen::Index>(cells.size()) != e) throw Error(ErrorCode::ParseError, "ragged cutset rows");
    for (Eigen::Index j = 0; j < e; ++j) {
      const double v = to_double(cells[static_cast<size_t>(j)]);
      if (v != std::round(v)) throw Error(ErrorCode::ParseError, "cutset entries must be integers");
      entries(i, j) = static_cast<int>(v);
    }
  }
  std::vector<EdgeLabel> branches(labels.begin(), labels.begin() + m);
  std::vector<EdgeLabel> chords(labels.begin() + m, labels.end());
  try {
    return CutsetMatrix(std::move(entries), std::move(branches), std::move(chords));
  } catch (const Error& err) {
    throw Error(ErrorCode::ParseError, err.what());
  }
}

// ---------------------------------------------------------------------------
// results

std::string result_to_json(const ReconstructionResult& result, bool with_diagnostics) {
  json j;
  j["root"] = result.root;
  json edges = json::array();
  for (const auto& edge : result.edges) edges.push_back({edge.source, edge.target});
  j["edges"] = std::move(edges);
  if (with_diagnostics) {
    json d;
    d["estimated_m"] = result.diagnostics.estimated_m;
    if (result.diagnostics.partition) {
      d["partition"] = {{"dependent", result.diagnostics.partition->dependent},
                        {"independent", result.diagnostics.partition->independent},
                        {"condition_number", result.diagnostics.partition->condition_number}};
    }
    if (result.diagnostics.canonical) {
      d["canonical"] = {{"branches", std::vector<EdgeLabel>(result.diagnostics.canonical->inner.branches().begin(),
                                                            result.diagnostics.canonical->inner.branches().end())},
                        {"chords", std::vector<EdgeLabel>(result.diagnostics.canonical->inner.chords().begin(),
                                                          result.diagnostics.canonical->inner.chords().end())},
                        {"interchanges", result.diagnostics.canonical->provenance.size()}};
    }
    const auto& sv = result.diagnostics.singular_values;
    d["singular_values"] = std::vector<double>(sv.data(), sv.data() + sv.size());
    if (result.diagnostics.rank_test) d["rank_test"] = json::parse(rank_report_to_json(*result.diagnostics.rank_test));
    j["diagnostics"] = std::move(d);
  }
  return j.dump(2) + "\n";
}

std::string result_to_dot(const ReconstructionResult& result) {
  std::ostringstream os;
  os << "digraph reconstruction {\n";
  os << "  \"" << result.root << "\" [shape=doublecircle];\n";
  for (const auto& edge : result.edges) {
    os << "  \"" << edge.source << "\" -> \"" << edge.target << "\" [label=\"x" << edge.label << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

ReconstructionResult parse_result_json(std::string_view text) {
  const json j = parse_json(text);
  ReconstructionResult result;
  result.root = field<int>(j, "root");
  for (const auto& pair : field<std::vector<std::vector<int>>>(j, "edges")) {
    if (pair.size() != 2) throw Error(ErrorCode::ParseError, "each edge must be a [s, t] pair");
    result.edges.push_back({pair[1], pair[0], pair[1]});
  }
  std::sort(result.edges.begin(), result.edges.end(),
            [](const LabeledEdge& a, const LabeledEdge& b) { return a.label < b.label; });
  for (const auto& edge : result.edges) result.node_labels.emplace(edge.label, edge.target);
  return result;
}

std::string provenance_to_json(const CanonicalCutsetMatrix& canonical) {
  json j = json::array();
  for (const auto& step : canonical.provenance) {
    j.push_back({{"row", step.row}, {"branch_out", step.branch_out}, {"chord_in", step.chord_in}});
  }
  return j.dump(2) + "\n";
}

std::string rank_report_to_json(const RankTestReport& report) {
  json j;
  j["alpha"] = report.alpha;
  j["chosen_m"] = report.chosen_m;
  j["used_m"] = report.used_m;
  j["degenerate_noise"] = report.degenerate_noise;
  j["eigenvalues"] = std::vector<double>(report.eigenvalues.data(), report.eigenvalues.data() + report.eigenvalues.size());
  json candidates = json::array();
  for (const auto& c : report.candidates) {
    candidates.push_back({{"k", c.k},
                          {"statistic", c.statistic},
                          {"dof", c.degrees_of_freedom},
                          {"p_value", c.p_value},
                          {"rejected", c.rejected}});
  }
  j["candidates"] = std::move(candidates);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// noise models

NoiseModel parse_noise_json(std::string_view text, const std::filesystem::path& base_dir) {
  const json j = parse_json(text);
  const auto kind = field<std::string>(j, "kind");
  if (kind == "homo" || kind == "homoscedastic") {
    const double sigma2 = field<double>(j, "sigma2");
    const int edges = j.contains("edges") ? field<int>(j, "edges") : 0;
    if (edges <= 0) {
      // Width is bound later by the caller through NoiseModel::homoscedastic(e, sigma2).
      NoiseModel model;
      model.kind = NoiseKind::Homoscedastic;
      model.covariance = Eigen::MatrixXd::Constant(1, 1, sigma2);
      return model;
    }
    return NoiseModel::homoscedastic(edges, sigma2);
  }
  if (kind == "hetero" || kind == "heteroscedastic") {
    if (j.contains("variances")) {
      const auto v = field<std::vector<double>>(j, "variances");
      return NoiseModel::heteroscedastic(Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))));
    }
    if (j.contains("covariance")) {
      const auto rows = field<std::vector<std::vector<double>>>(j, "covariance");
      Eigen::MatrixXd cov(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
      for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.size()) throw Error(ErrorCode::ParseError, "covariance must be square");
        for (size_t c = 0; c < rows.size(); ++c) cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
      return NoiseModel::heteroscedastic(std::move(cov));
    }
    std::filesystem::path csv = field<std::string>(j, "cov_csv");
    if (csv.is_relative() && !base_dir.empty()) csv = base_dir / csv;
    return NoiseModel::heteroscedastic(parse_real_matrix(read_text(csv)));
  }
  throw Error(ErrorCode::ParseError, "unknown noise kind '" + kind + "'");
}

std::string noise_to_json(const NoiseModel& model) {
  json j;
  const auto& cov = model.covariance;
  if (model.kind == NoiseKind::Homoscedastic) {
    j["kind"] = "homo";
    j["sigma2"] = cov(0, 0);
    j["edges"] = cov.rows();
  } else if (cov.isDiagonal(0.0)) {
    j["kind"] = "hetero";
    const Eigen::VectorXd d = cov.diagonal();
    j["variances"] = std::vector<double>(d.data(), d.data() + d.size());
  } else {
    j["kind"] = "hetero";
    json rows = json::array();
    for (Eigen::Index r = 0; r < cov.rows(); ++r) {
      const Eigen::VectorXd row = cov.row(r).transpose();
      rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
    }
    j["covariance"] = std::move(rows);
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// generator specs

ArborescenceSpec parse_spec_json(std::string_view text) {
  const json j = parse_json(text);
  const Family family = parse_family(field<std::string>(j, "family"));
  ArborescenceSpec spec = ArborescenceSpec::defaults(family, j.contains("seed") ? field<std::uint64_t>(j, "seed") : 0);
  auto range = [&](const char* key) {
    const auto v = field<std::vector<int>>(j, key);
    if (v.size() != 2) throw Error(ErrorCode::ParseError, std::string("'") + key + "' must be [min, max]");
    return IntRange{v[0], v[1]};
  };
  if (j.contains("layers")) spec.layers = range("layers");
  if (j.contains("children")) spec.children = range("children");
  if (j.contains("expanded_per_layer")) {
    if (j.at("expanded_per_layer").is_null()) {
      spec.expanded_per_layer.reset();
    } else {
      spec.expanded_per_layer = range("expanded_per_layer");
    }
  }
  return spec;
}

std::string spec_to_json(const ArborescenceSpec& spec) {
  json j;
  j["family"] = std::string(to_string(spec.family));
  j["layers"] = {spec.layers.min, spec.layers.max};
  j["children"] = {spec.children.min, spec.children.max};
  if (spec.expanded_per_layer) {
    j["expanded_per_layer"] = {spec.expanded_per_layer->min, spec.expanded_per_layer->max};
  } else {
    j["expanded_per_layer"] = nullptr;
  }
  j["seed"] = spec.seed;
  return j.dump(2) + "\n";
}

}  // namespace flowtopo::io
