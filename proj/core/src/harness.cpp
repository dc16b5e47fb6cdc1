#include "flowtopo/harness.hpp"

#include "flowtopo/errors.hpp"
#include "flowtopo/io.hpp"
#include "flowtopo/log.hpp"
#include "flowtopo/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace flowtopo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Restores the previous warning handler on scope exit.
class MutedWarnings {
 public:
  MutedWarnings() : previous_(set_warning_handler([](std::string_view) {})) {}
  ~MutedWarnings() { set_warning_handler(std::move(previous_)); }
  MutedWarnings(const MutedWarnings&) = delete;
  MutedWarnings& operator=(const MutedWarnings&) = delete;

 private:
  WarningHandler previous_;
};

NoiseModel resize_homoscedastic(NoiseModel model, int edges) {
  if (model.kind == NoiseKind::Homoscedastic && model.edge_count() != edges) {
    return NoiseModel::homoscedastic(edges, model.covariance(0, 0));
  }
  return model;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Runs `work(i)` for i in [0, count) on up to `threads` workers.
template <typename Work>
void parallel_for(int count, unsigned threads, Work&& work) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) work(i);
    });
  }
}

// Re-runs `fn` until at least `min_seconds` has elapsed; returns seconds per call.
template <typename Fn>
double time_per_call(Fn&& fn, double min_seconds = 2e-3) {
  int calls = 0;
  const auto start = Clock::now();
  double elapsed = 0.0;
  do {
    fn();
    ++calls;
    elapsed = seconds_since(start);
  } while (elapsed < min_seconds);
  return elapsed / calls;
}

}  // namespace

PipelineMode parse_mode(std::string_view name) {
  if (name == "exact") return PipelineMode::Exact;
  if (name == "noisy") return PipelineMode::Noisy;
  throw Error(ErrorCode::ParseError, "unknown mode '" + std::string(name) + "' (expected exact or noisy)");
}

ReconstructionResult run_pipeline(const PipelineRequest& request) {
  if (request.data_file.has_value() == request.network_file.has_value()) {
    throw Error(ErrorCode::InvalidArgument, "give exactly one of a data file or a network file");
  }

  std::optional<FlowDataMatrix> data;
  std::optional<NoiseModel> noise;
  if (request.data_file) {
    data = io::parse_data_csv(io::read_text(*request.data_file), request.transposed);
  } else {
    const FlowNetwork network = io::parse_network_json(io::read_text(*request.network_file));
    FlowSamplerConfig sampler;
    sampler.samples = request.samples > 0 ? request.samples : 50 * network.edge_count();
    sampler.seed = request.seed;
    data = sample_flows(network, sampler);
    if (request.mode == PipelineMode::Noisy && request.snr) {
      auto [noisy, model] = add_noise(*data, {*request.snr, request.noise_kind}, splitmix64(request.seed));
      data = std::move(noisy);
      noise = std::move(model);
    }
  }

  if (request.mode == PipelineMode::Exact) {
    return reconstruct_exact(*data, request.zero_tol, request.round_tol, request.noisy.canonicalize);
  }

  if (!noise) {
    if (request.noise_file) {
      noise = io::parse_noise_json(io::read_text(*request.noise_file), request.noise_file->parent_path());
    } else if (request.sigma2) {
      noise = NoiseModel::homoscedastic(data->edge_count(), *request.sigma2);
    } else {
      throw Error(ErrorCode::InvalidArgument, "noisy mode needs a noise model file, sigma2, or an SNR");
    }
    noise = resize_homoscedastic(std::move(*noise), data->edge_count());
  }
  return reconstruct_noisy(*data, *noise, request.noisy);
}

std::vector<SweepNetwork> networks_from_families(std::span<const Family> families,
                                                 std::span<const std::uint64_t> seeds) {
  std::vector<SweepNetwork> out;
  for (Family family : families) {
    for (std::uint64_t seed : seeds) out.push_back({family, generate_arborescence(ArborescenceSpec::defaults(family, seed))});
  }
  return out;
}

std::string sweep_to_csv(const SweepResult& result) {
  std::ostringstream os;
  os << kSweepCsvHeader << '\n';
  for (const auto& cell : result.cells) {
    for (size_t i = 0; i < cell.curve.size(); ++i) {
      const auto& p = cell.curve[i];
      std::string flag = "0";
      if (cell.min_z && *cell.min_z == p.z) {
        flag = "1";
      } else if (!cell.min_z && i + 1 == cell.curve.size()) {
        flag = "none";
      }
      os << to_string(cell.family) << ',' << cell.edges << ',' << cell.snr << ',' << p.z << ',' << p.accuracy << ','
         << flag << ',' << cell.network << ',' << p.successes << ',' << p.trials << '\n';
    }
  }
  return os.str();
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t network, std::size_t snr_index, int z, int trial) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ network);
  h = splitmix64(h ^ snr_index);
  h = splitmix64(h ^ static_cast<std::uint64_t>(z));
  return splitmix64(h ^ static_cast<std::uint64_t>(trial));
}

bool run_trial(const FlowNetwork& truth, double snr, int z, NoiseKind kind, const NoisyOptions& options,
               std::uint64_t seed, std::string* failure) {
  try {
    FlowSamplerConfig sampler;
    sampler.samples = z * truth.edge_count();
    sampler.seed = seed;
    const FlowDataMatrix clean = sample_flows(truth, sampler);
    const auto [noisy, noise] = add_noise(clean, {snr, kind}, splitmix64(seed));
    const ReconstructionResult result = reconstruct_noisy(noisy, noise, options);
    if (verify_against_truth(result, truth)) return true;
    if (failure) *failure = "Mismatch";
  } catch (const Error& err) {
    if (failure) *failure = std::string(to_string(err.code()));
  }
  return false;
}

SweepResult run_sweep(const SweepConfig& config) {
  if (config.networks.empty() || config.snr_list.empty()) {
    throw Error(ErrorCode::InvalidArgument, "sweep needs at least one network and one SNR");
  }
  if (config.trials < 1) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one trial per cell");
  std::vector<int> z_list = config.z_list;
  if (z_list.empty()) {
    z_list.resize(50);
    std::iota(z_list.begin(), z_list.end(), 1);
  }
  std::sort(z_list.begin(), z_list.end());
  if (z_list.front() < 1) throw Error(ErrorCode::InvalidArgument, "sample multipliers must be >= 1");

  const unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  MutedWarnings muted;

  std::ofstream out;
  if (config.output) {
    out.open(*config.output, std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + config.output->string());
    out << kSweepCsvHeader << '\n' << std::flush;
  }

  SweepResult result;
  for (size_t n = 0; n < config.networks.size(); ++n) {
    const auto& [family, network] = config.networks[n];
    for (size_t s = 0; s < config.snr_list.size(); ++s) {
      SweepCell cell;
      cell.network = n;
      cell.family = family;
      cell.edges = network.edge_count();
      cell.snr = config.snr_list[s];

      for (int z : z_list) {
        std::vector<char> ok(static_cast<size_t>(config.trials), 0);
        std::vector<double> runtime(static_cast<size_t>(config.trials), 0.0);
        std::vector<std::string> failure(static_cast<size_t>(config.trials));
        parallel_for(config.trials, threads, [&](int t) {
          const auto start = Clock::now();
          ok[static_cast<size_t>(t)] = run_trial(network, cell.snr, z, config.noise_kind, config.noisy,
                                                 trial_seed(config.base_seed, n, s, z, t), &failure[static_cast<size_t>(t)]);
          runtime[static_cast<size_t>(t)] = seconds_since(start);
        });

        SweepPoint point;
        point.z = z;
        point.trials = config.trials;
        point.successes = static_cast<int>(std::count(ok.begin(), ok.end(), 1));
        point.accuracy = static_cast<double>(point.successes) / config.trials;
        point.mean_runtime_s = std::accumulate(runtime.begin(), runtime.end(), 0.0) / config.trials;
        for (size_t t = 0; t < ok.size(); ++t) {
          if (!ok[t]) ++point.failures[failure[t]];
        }
        cell.curve.push_back(std::move(point));

        if (cell.curve.back().successes == config.trials && !cell.min_z) cell.min_z = z;
        if (config.trial_time_budget &&
            *std::max_element(runtime.begin(), runtime.end()) > config.trial_time_budget->count()) {
          cell.aborted = true;
          break;
        }
        if (config.early_stop && cell.min_z) break;
      }

      if (out.is_open()) {
        SweepResult single;
        single.cells.push_back(cell);
        const std::string rows = sweep_to_csv(single);
        out << rows.substr(rows.find('\n') + 1) << std::flush;
      }
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::max(y[i], 1e-12));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / denom;
}

ScalingReport run_scaling_bench(std::span<const int> sizes, int repeats, std::uint64_t seed) {
  if (repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
  if (!std::is_sorted(sizes.begin(), sizes.end())) throw Error(ErrorCode::InvalidArgument, "sizes must be ascending");
  MutedWarnings muted;

  ScalingReport report;
  for (int e : sizes) {
    std::vector<double> svd, rref, alg1, alg2, total;
    StageTimings row;
    row.edges = e;
    row.recovered = true;
    for (int r = 0; r < repeats; ++r) {
      const std::uint64_t s = trial_seed(seed, static_cast<size_t>(e), 0, 0, r);
      const FlowNetwork truth = generate_arborescence_with_edges(e, s);
      FlowSamplerConfig sampler;
      sampler.samples = 2 * e;
      sampler.seed = splitmix64(s);
      const FlowDataMatrix data = sample_flows(truth, sampler);

      auto start = Clock::now();
      const NullBasis basis = estimate_null_basis(data);
      svd.push_back(seconds_since(start));

      start = Clock::now();
      const Partition partition = find_valid_partition(basis);
      const CutsetMatrix cutset = to_fcutset_form(basis, partition);
      rref.push_back(seconds_since(start));

      std::optional<CanonicalCutsetMatrix> canon;
      alg1.push_back(time_per_call([&] { canon.emplace(canonicalize(cutset)); }));
      ReconstructionResult result;
      alg2.push_back(time_per_call([&] { result = realize_topology(*canon); }));

      total.push_back(svd.back() + rref.back() + alg1.back() + alg2.back());
      row.relations = basis.rank_deficiency;
      row.recovered = row.recovered && verify_against_truth(result, truth);
    }
    row.svd_s = median(svd);
    row.rref_s = median(rref);
    row.algorithm1_s = median(alg1);
    row.algorithm2_s = median(alg2);
    row.total_s = median(total);
    const double mean = std::accumulate(total.begin(), total.end(), 0.0) / repeats;
    double var = 0.0;
    for (double t : total) var += (t - mean) * (t - mean);
    row.total_variance = repeats > 1 ? var / (repeats - 1) : 0.0;
    report.rows.push_back(row);
  }

  std::vector<double> e, m, svd, rref, alg1, alg2, total;
  for (const auto& row : report.rows) {
    e.push_back(row.edges);
    m.push_back(row.relations);
    svd.push_back(row.svd_s);
    rref.push_back(row.rref_s);
    alg1.push_back(row.algorithm1_s);
    alg2.push_back(row.algorithm2_s);
    total.push_back(row.total_s);
  }
  report.slope_svd = loglog_slope(e, svd);
  report.slope_rref = loglog_slope(e, rref);
  report.slope_algorithm1 = loglog_slope(e, alg1);
  report.slope_algorithm2_vs_m = loglog_slope(m, alg2);
  report.slope_total = loglog_slope(e, total);
  report.svd_within_bound = std::isnan(report.slope_svd) || report.slope_svd <= 3.5;
  return report;
}

std::string scaling_to_json(const ScalingReport& report) {
  using nlohmann::json;
  auto number = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"e", r.edges},
                    {"m", r.relations},
                    {"svd_s", r.svd_s},
                    {"rref_s", r.rref_s},
                    {"algorithm1_s", r.algorithm1_s},
                    {"algorithm2_s", r.algorithm2_s},
                    {"total_s", r.total_s},
                    {"total_variance", r.total_variance},
                    {"recovered", r.recovered}});
  }
  json j;
  j["rows"] = std::move(rows);
  j["slopes"] = {{"svd", number(report.slope_svd)},
                 {"rref", number(report.slope_rref)},
                 {"algorithm1", number(report.slope_algorithm1)},
                 {"algorithm2_vs_m", number(report.slope_algorithm2_vs_m)},
                 {"total", number(report.slope_total)}};
  j["svd_within_bound"] = report.svd_within_bound;
  return j.dump(2) + "\n";
}

std::string scaling_to_csv(const ScalingReport& report) {
  std::ostringstream os;
  os << "e,m,svd_s,rref_s,algorithm1_s,algorithm2_s,total_s,total_variance,recovered\n";
  for (const auto& r : report.rows) {
    os << r.edges << ',' << r.relations << ',' << r.svd_s << ',' << r.rref_s << ',' << r.algorithm1_s << ','
       << r.algorithm2_s << ',' << r.total_s << ',' << r.total_variance << ',' << (r.recovered ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace flowtopo
