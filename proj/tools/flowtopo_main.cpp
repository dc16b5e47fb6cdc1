// flowtopo: reconstruct arborescence flow networks from steady-state flow samples.
#include "flowtopo/errors.hpp"
#include "flowtopo/harness.hpp"
#include "flowtopo/io.hpp"
#include "flowtopo/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace flowtopo;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";
  double alpha = 0.05;
  std::vector<double> snr;
  int z_max = 50;
  int trials = 100;
  unsigned threads = 0;
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty() || g.out == "-") {
    std::cout << text;
  } else {
    io::write_text(g.out, text);
  }
}

NoiseKind parse_kind(const std::string& kind) {
  if (kind == "homo" || kind == "homoscedastic") return NoiseKind::Homoscedastic;
  if (kind == "hetero" || kind == "heteroscedastic") return NoiseKind::Heteroscedastic;
  throw Error(ErrorCode::ParseError, "unknown noise kind '" + kind + "'");
}

std::string edge_list_csv(const FlowNetwork& network) {
  std::string out = "label,source,target\n";
  const auto edges = network.edges();
  for (size_t i = 0; i < edges.size(); ++i) {
    out += std::to_string(network.labels()[i]) + ',' + std::to_string(edges[i].source) + ',' +
           std::to_string(edges[i].target) + '\n';
  }
  return out;
}

std::string result_csv(const ReconstructionResult& result) {
  std::string out = "label,source,target\n";
  for (const auto& edge : result.edges) {
    out += std::to_string(edge.label) + ',' + std::to_string(edge.source) + ',' + std::to_string(edge.target) + '\n';
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flow network topology reconstruction from flow measurements"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Base random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output file (default: stdout)");
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "dot"}))
      ->capture_default_str();
  app.add_option("--alpha", g.alpha, "Significance level of the model-order test")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--snr", g.snr, "Signal-to-noise ratio(s)")->delimiter(',');
  app.add_option("--z-max", g.z_max, "Largest sample multiplier (n_s = z e)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--trials", g.trials, "Trials per sweep cell")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();

  // generate
  auto* generate = app.add_subcommand("generate", "Generate a random arborescence flow network");
  std::string gen_family = "binary";
  std::optional<int> gen_edges;
  std::string gen_spec;
  generate->add_option("--family", gen_family, "binary | thin_long | fat_short")->capture_default_str();
  generate->add_option("--edges", gen_edges, "Exact edge count (ignores --family)")->check(CLI::Range(2, 1 << 20));
  generate->add_option("--spec", gen_spec, "Shape JSON overriding the family defaults")->check(CLI::ExistingFile);

  // sample
  auto* sample = app.add_subcommand("sample", "Sample steady-state flows from a network, optionally with noise");
  std::string sample_network;
  int sample_z = 0;
  int sample_n = 0;
  std::string sample_kind = "homo";
  std::string sample_noise_out;
  bool sample_transposed = false;
  sample->add_option("--network", sample_network, "Network JSON")->required()->check(CLI::ExistingFile);
  sample->add_option("--z", sample_z, "Samples as a multiple of the edge count (default 50)");
  sample->add_option("--samples", sample_n, "Absolute sample count (overrides --z)");
  sample->add_option("--kind", sample_kind, "Noise kind: homo | hetero")->capture_default_str();
  sample->add_option("--noise-out", sample_noise_out, "Write the noise model JSON here");
  sample->add_flag("--transposed", sample_transposed, "One row per sample instead of one row per edge");

  // reconstruct
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct the topology from flow data");
  PipelineRequest req;
  std::string rec_data, rec_network, rec_noise, rec_mode = "exact", rec_kind = "homo";
  std::optional<double> rec_sigma2;
  bool rec_diag = false;
  reconstruct->add_option("--data", rec_data, "Flow data CSV")->check(CLI::ExistingFile);
  reconstruct->add_option("--network", rec_network, "Network JSON to sample flows from")->check(CLI::ExistingFile);
  reconstruct->add_option("--mode", rec_mode, "exact | noisy")->capture_default_str();
  reconstruct->add_option("--noise", rec_noise, "Noise model JSON (noisy mode)")->check(CLI::ExistingFile);
  reconstruct->add_option("--sigma2", rec_sigma2, "Homoscedastic noise variance (noisy mode)");
  reconstruct->add_option("--kind", rec_kind, "Noise kind when sampling with --snr")->capture_default_str();
  reconstruct->add_option("--samples", req.samples, "Sample count when using --network (default 50 e)");
  reconstruct->add_option("--zero-tol", req.zero_tol, "Relative singular-value threshold (exact mode)")
      ->capture_default_str();
  reconstruct->add_option("--round-tol", req.round_tol, "Integer snapping tolerance (exact mode)")
      ->capture_default_str();
  reconstruct->add_option("--snap-band", req.noisy.snap_band, "Integer snapping tolerance (noisy mode)")
      ->capture_default_str();
  reconstruct->add_flag("--transposed", req.transposed, "Data CSV has one row per sample");
  reconstruct->add_flag("--diagnostics", rec_diag, "Include diagnostics in the JSON output");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "SNR x sample-size accuracy sweep");
  std::vector<std::string> sweep_families{"binary", "thin_long", "fat_short"};
  int sweep_networks = 1;
  std::vector<int> sweep_z;
  std::string sweep_kind = "homo";
  std::optional<double> sweep_budget;
  bool sweep_full = false;
  sweep->add_option("--families", sweep_families, "Network families")->delimiter(',');
  sweep->add_option("--networks", sweep_networks, "Networks per family")->check(CLI::PositiveNumber);
  sweep->add_option("--z-list", sweep_z, "Explicit sample multipliers (default 1..z-max)")->delimiter(',');
  sweep->add_option("--kind", sweep_kind, "Noise kind: homo | hetero")->capture_default_str();
  sweep->add_option("--time-budget", sweep_budget, "Per-trial seconds before a cell is aborted");
  sweep->add_flag("--no-early-stop", sweep_full, "Scan every z even after 100% accuracy");

  // bench
  auto* bench = app.add_subcommand("bench", "Per-stage runtime scaling");
  std::vector<int> bench_sizes{32, 64, 128, 256};
  int bench_repeats = 3;
  bench->add_option("--sizes", bench_sizes, "Edge counts, ascending")->delimiter(',');
  bench->add_option("--repeats", bench_repeats, "Repeats per size")->check(CLI::PositiveNumber);

  // verify
  auto* verify = app.add_subcommand("verify", "Compare a reconstruction with the ground truth");
  std::string ver_result, ver_truth;
  verify->add_option("--result", ver_result, "Result JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--truth", ver_truth, "Ground-truth network JSON")->required()->check(CLI::ExistingFile);

  for (auto* sub : {generate, sample, reconstruct, sweep, bench, verify}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code(ErrorCode::ParseError);
  }

  try {
    if (*generate) {
      ArborescenceSpec spec = gen_spec.empty() ? ArborescenceSpec::defaults(parse_family(gen_family), g.seed)
                                               : io::parse_spec_json(io::read_text(gen_spec));
      spec.seed = g.seed;
      const FlowNetwork network = gen_edges ? generate_arborescence_with_edges(*gen_edges, g.seed)
                                            : generate_arborescence(spec);
      if (g.format == "dot") {
        emit(g, io::network_to_dot(network));
      } else if (g.format == "csv") {
        emit(g, edge_list_csv(network));
      } else {
        emit(g, io::network_to_json(network));
      }
      return 0;
    }

    if (*sample) {
      const FlowNetwork network = io::parse_network_json(io::read_text(sample_network));
      FlowSamplerConfig cfg;
      cfg.seed = g.seed;
      cfg.samples = sample_n > 0 ? sample_n : (sample_z > 0 ? sample_z : 50) * network.edge_count();
      FlowDataMatrix data = sample_flows(network, cfg);
      if (!g.snr.empty()) {
        auto [noisy, model] = add_noise(data, {g.snr.front(), parse_kind(sample_kind)}, ~g.seed);
        data = std::move(noisy);
        if (!sample_noise_out.empty()) io::write_text(sample_noise_out, io::noise_to_json(model));
      }
      emit(g, io::data_to_csv(data, sample_transposed));
      return 0;
    }

    if (*reconstruct) {
      if (!rec_data.empty()) req.data_file = rec_data;
      if (!rec_network.empty()) req.network_file = rec_network;
      req.mode = parse_mode(rec_mode);
      if (!rec_noise.empty()) req.noise_file = rec_noise;
      req.sigma2 = rec_sigma2;
      if (!g.snr.empty()) req.snr = g.snr.front();
      req.noise_kind = parse_kind(rec_kind);
      req.noisy.order.alpha = g.alpha;
      req.seed = g.seed;
      const ReconstructionResult result = run_pipeline(req);
      if (g.format == "dot") {
        emit(g, io::result_to_dot(result));
      } else if (g.format == "csv") {
        emit(g, result_csv(result));
      } else {
        emit(g, io::result_to_json(result, rec_diag));
        // A JSON result written to a file is accompanied by its DOT rendering.
        if (!g.out.empty() && g.out != "-") {
          io::write_text(fs::path(g.out).replace_extension(".dot"), io::result_to_dot(result));
        }
      }
      return 0;
    }

    if (*sweep) {
      SweepConfig cfg;
      std::vector<Family> families;
      for (const auto& f : sweep_families) families.push_back(parse_family(f));
      std::vector<std::uint64_t> seeds(static_cast<size_t>(sweep_networks));
      std::iota(seeds.begin(), seeds.end(), g.seed);
      cfg.networks = networks_from_families(families, seeds);
      if (!g.snr.empty()) cfg.snr_list = g.snr;
      cfg.z_list = sweep_z;
      if (cfg.z_list.empty()) {
        cfg.z_list.resize(static_cast<size_t>(g.z_max));
        std::iota(cfg.z_list.begin(), cfg.z_list.end(), 1);
      }
      cfg.trials = g.trials;
      cfg.noise_kind = parse_kind(sweep_kind);
      cfg.noisy.order.alpha = g.alpha;
      cfg.base_seed = g.seed;
      cfg.threads = g.threads;
      cfg.early_stop = !sweep_full;
      if (sweep_budget) cfg.trial_time_budget = std::chrono::duration<double>(*sweep_budget);
      if (!g.out.empty() && g.out != "-") cfg.output = g.out;
      const SweepResult result = run_sweep(cfg);
      if (!cfg.output) std::cout << sweep_to_csv(result);
      return 0;
    }

    if (*bench) {
      const ScalingReport report = run_scaling_bench(bench_sizes, bench_repeats, g.seed);
      emit(g, g.format == "csv" ? scaling_to_csv(report) : scaling_to_json(report));
      return 0;
    }

    if (*verify) {
      const ReconstructionResult result = io::parse_result_json(io::read_text(ver_result));
      const FlowNetwork truth = io::parse_network_json(io::read_text(ver_truth));
      const bool match = verify_against_truth(result, truth);
      std::cout << (match ? "match" : "mismatch") << '\n';
      return match ? 0 : 1;
    }
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return exit_code(err.code());
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
