// statemap command line: simulate, demo-sim23, demo-twomass, detect, evaluate, sweep.
// Exit codes: 0 success, 2 invalid input or configuration, 3 numerical degeneracy.

#include "statemap/demos.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace statemap;

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

void write_json(const fs::path& path, const ojson& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

KernelScale parse_scale(const std::string& s) {
  if (s == "median") return KernelScale::median();
  if (s == "mean") return KernelScale::mean();
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size() && v > 0.0) return KernelScale::fixed(v);
  } catch (const std::exception&) {
  }
  throw ValidationError("kernel scale must be 'median', 'mean' or a positive number, got '" + s + "'");
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 const std::optional<std::uint64_t>& seed) {
  ScenarioConfig sc = load_scenario(scenario_path);
  if (seed) sc.seed = *seed;
  const Dataset ds = simulate_scenario(sc);
  save_dataset(ds, out_dir);
  std::cout << "wrote " << ds.size() << " states to " << out_dir << "\n";
  return 0;
}

int cmd_demo_sim23(int n_seeds, std::uint64_t first, const std::string& scale, int threads,
                   const std::string& out_dir) {
  ThreeGroupOptions opts;
  opts.seeds = seed_range(first, n_seeds);
  opts.kernel_scale = parse_scale(scale);
  opts.threads = threads;
  const ThreeGroupResult res = run_three_group_demo(opts);

  std::printf("%8s %14s %14s %16s %12s\n", "seed", "|r| mahal", "|r| euclid", "|r| mahal(med)",
              "misassigned");
  for (const auto& s : res.seeds) {
    std::printf("%8llu %14.6f %14.6f %16.6f %12d\n", static_cast<unsigned long long>(s.seed),
                s.corr_mahalanobis, s.corr_euclidean, s.corr_mahalanobis_median_scale,
                s.misassigned);
  }
  std::printf("median |r| mahalanobis (%s scale): %.6f\n", opts.kernel_scale.describe().c_str(),
              res.median_corr_mahalanobis);
  std::printf("median |r| euclidean:                %.6f\n", res.median_corr_euclidean);
  std::printf("median |r| mahalanobis, median scale: %.6f\n",
              res.median_corr_mahalanobis_median_scale);
  std::printf("seeds with 0 misassignments: %d / %zu\n", res.seeds_without_misassignment,
              res.seeds.size());

  if (!out_dir.empty()) {
    ojson j;
    j["kernel_scale"] = opts.kernel_scale.describe();
    j["median_corr_mahalanobis"] = res.median_corr_mahalanobis;
    j["median_corr_euclidean"] = res.median_corr_euclidean;
    j["median_corr_mahalanobis_median_scale"] = res.median_corr_mahalanobis_median_scale;
    j["seeds_without_misassignment"] = res.seeds_without_misassignment;
    ojson per = ojson::array();
    for (const auto& s : res.seeds) {
      per.push_back({{"seed", s.seed},
                     {"corr_mahalanobis", s.corr_mahalanobis},
                     {"corr_euclidean", s.corr_euclidean},
                     {"corr_mahalanobis_median_scale", s.corr_mahalanobis_median_scale},
                     {"misassigned", s.misassigned},
                     {"theta", to_std(s.theta)},
                     {"psi1", to_std(s.psi1)}});
    }
    j["seeds"] = std::move(per);
    write_json(fs::path(out_dir) / "demo_sim23.json", j);
  }
  return 0;
}

int cmd_demo_twomass(int n_seeds, std::uint64_t first, int threads, const std::string& out_dir) {
  TwoMassOptions opts;
  opts.seeds = seed_range(first, n_seeds);
  opts.threads = threads;
  const TwoMassResult res = run_two_mass_demo(opts);

  std::printf("%8s %16s %16s %16s %16s\n", "seed", "rank r mahal", "rank r euclid", "|r| mahal",
              "|r| euclid");
  for (const auto& s : res.seeds) {
    std::printf("%8llu %16.6f %16.6f %16.6f %16.6f\n", static_cast<unsigned long long>(s.seed),
                s.spearman_mahalanobis, s.spearman_euclidean, s.pearson_mahalanobis,
                s.pearson_euclidean);
  }
  std::printf("median rank correlation with m1+m2: mahalanobis %.6f, euclidean %.6f\n",
              res.median_spearman_mahalanobis, res.median_spearman_euclidean);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    ojson j;
    j["median_spearman_mahalanobis"] = res.median_spearman_mahalanobis;
    j["median_spearman_euclidean"] = res.median_spearman_euclidean;
    j["median_pearson_mahalanobis"] = res.median_pearson_mahalanobis;
    j["median_pearson_euclidean"] = res.median_pearson_euclidean;
    ojson per = ojson::array();
    for (const auto& s : res.seeds) {
      per.push_back({{"seed", s.seed},
                     {"spearman_mahalanobis", s.spearman_mahalanobis},
                     {"spearman_euclidean", s.spearman_euclidean},
                     {"pearson_mahalanobis", s.pearson_mahalanobis},
                     {"pearson_euclidean", s.pearson_euclidean}});
      std::ofstream emb(fs::path(out_dir) / ("embedding_seed" + std::to_string(s.seed) + ".csv"));
      emb << "m1,m2,mass_sum,psi1_mahalanobis,psi1_euclidean\n";
      for (Index i = 0; i < s.mass_sum.size(); ++i) {
        emb << format_double(s.m1(i)) << ',' << format_double(s.m2(i)) << ','
            << format_double(s.mass_sum(i)) << ',' << format_double(s.psi1_mahalanobis(i)) << ','
            << format_double(s.psi1_euclidean(i)) << '\n';
      }
    }
    j["seeds"] = std::move(per);
    write_json(fs::path(out_dir) / "demo_twomass.json", j);
  }
  return 0;
}

int cmd_detect(const std::string& config_path, const std::string& dataset, const std::string& out) {
  PipelineConfig cfg = load_pipeline_config(config_path);
  if (!dataset.empty()) {
    cfg.dataset = fs::path(dataset);
    cfg.scenario.reset();
  }
  if (!out.empty()) cfg.output_dir = out;
  const Dataset ds = resolve_input(cfg);
  const PipelineResult res = run_pipeline(ds, cfg);
  save_results(res, cfg.output_dir);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  if (res.detection) {
    const auto& b = res.detection->borders;
    std::cout << "entry " << b.i_en << " (EDT " << b.edt_en << "), exit " << b.i_ex << " (EDT "
              << b.edt_ex << ")";
    if (res.detection->sub.success) {
      std::cout << ", dlor exit " << res.detection->sub.i_d << " (EDT " << res.detection->sub.edt_d
                << ")";
    } else {
      std::cout << ", dlor detection failed";
    }
    std::cout << "\n";
  }
  std::cout << "results written to " << cfg.output_dir.string() << "\n";
  return 0;
}

int cmd_evaluate(const std::string& detection, const std::string& dataset, const std::string& out) {
  const DetectedIndices det = load_detection(detection);
  const Dataset ds = load_dataset(dataset);
  if (!ds.truth) throw ValidationError(dataset + ": manifest has no 'truth' entry");
  const GroundTruth truth{ds.truth->entry_idx, ds.truth->dlor_exit_idx, ds.truth->exit_idx, ds.edt};
  const ErrorReport r = score_indices(det.entry_idx, det.exit_idx, det.dlor_exit_idx, truth);
  const std::string text = report_json(r);
  if (out.empty()) {
    std::cout << text;
  } else {
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    std::ofstream f(out);
    if (!f) throw ValidationError("cannot write " + out);
    f << text;
  }
  return 0;
}

int cmd_sweep(int n_seeds, std::uint64_t first, const std::string& config_path, int tolerance,
              int threads, const std::string& out) {
  SweepOptions opts;
  opts.seeds = seed_range(first, n_seeds);
  opts.tolerance = tolerance;
  opts.threads = threads;
  if (!config_path.empty()) {
    opts.pipeline = load_pipeline_config(config_path);
    if (opts.pipeline.scenario && opts.pipeline.scenario->kind == ScenarioConfig::Kind::Dbs) {
      opts.fixture = opts.pipeline.scenario->dbs;
    }
  }
  const SweepResult res = run_sweep(opts);
  std::printf("%8s %6s %6s %6s   %6s %6s %6s\n", "seed", "entry", "exit", "dlor", "t.en", "t.ex",
              "t.dl");
  for (const auto& s : res.seeds) {
    std::printf("%8llu %6ld %6ld %6ld   %6ld %6ld %6ld\n", static_cast<unsigned long long>(s.seed),
                static_cast<long>(s.entry_idx), static_cast<long>(s.exit_idx),
                static_cast<long>(s.dlor_exit_idx), static_cast<long>(s.truth.entry_idx),
                static_cast<long>(s.truth.exit_idx), static_cast<long>(s.truth.dlor_exit_idx));
  }
  std::printf("within +-%d states: entry %.2f, exit %.2f, dlor exit %.2f; monotone violations %d\n",
              tolerance, res.entry_rate, res.exit_rate, res.dlor_rate, res.monotone_violations);
  if (!out.empty()) {
    ojson j;
    j["tolerance"] = tolerance;
    j["entry_rate"] = res.entry_rate;
    j["exit_rate"] = res.exit_rate;
    j["dlor_rate"] = res.dlor_rate;
    j["dlor_successes"] = res.dlor_successes;
    j["monotone_violations"] = res.monotone_violations;
    ojson per = ojson::array();
    for (const auto& s : res.seeds) {
      per.push_back({{"seed", s.seed},
                     {"entry_idx", s.entry_idx},
                     {"exit_idx", s.exit_idx},
                     {"dlor_exit_idx", s.dlor_success ? ojson(s.dlor_exit_idx) : ojson(nullptr)},
                     {"stn_overall_err", s.report.stn_overall_err},
                     {"dlor_overall_err", s.report.dlor_overall_err}});
    }
    j["seeds"] = std::move(per);
    write_json(out, j);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intrinsic state recovery with diffusion maps and border detection"};
  app.require_subcommand(1);

  std::string scenario, out, config, dataset, detection, scale = "mean";
  std::optional<std::uint64_t> seed;
  int n_seeds = 20;
  std::uint64_t first_seed = 1;
  int threads = 0;
  int tolerance = 1;

  auto* sim = app.add_subcommand("simulate", "Simulate a scenario into a dataset directory");
  sim->add_option("--scenario", scenario, "Scenario JSON")->required();
  sim->add_option("--out", out, "Output dataset directory")->required();
  sim->add_option("--seed", seed, "Override the scenario seed");

  auto* sim23 = app.add_subcommand("demo-sim23", "Three-group simulation over many seeds");
  sim23->add_option("--seeds", n_seeds, "Number of seeds")->capture_default_str();
  sim23->add_option("--first-seed", first_seed, "First seed")->capture_default_str();
  sim23->add_option("--kernel-scale", scale, "median, mean or a number")->capture_default_str();
  sim23->add_option("--threads", threads, "Worker threads (0 = all cores)");
  sim23->add_option("--out", out, "Directory for demo_sim23.json");

  auto* tm = app.add_subcommand("demo-twomass", "Two-mass grid experiment");
  tm->add_option("--seeds", n_seeds, "Number of seeds")->capture_default_str();
  tm->add_option("--first-seed", first_seed, "First seed")->capture_default_str();
  tm->add_option("--threads", threads, "Worker threads (0 = all cores)");
  tm->add_option("--out", out, "Directory for the correlation table and embeddings");

  auto* det = app.add_subcommand("detect", "Run the full pipeline on a dataset or scenario");
  det->add_option("--config", config, "Pipeline config JSON")->required();
  det->add_option("--dataset", dataset, "Dataset directory (overrides the config)");
  det->add_option("--out", out, "Output directory (overrides the config)");

  auto* ev = app.add_subcommand("evaluate", "Score a detection.json against dataset truth");
  ev->add_option("--detection", detection, "detection.json")->required();
  ev->add_option("--dataset", dataset, "Dataset directory with truth in its manifest")->required();
  ev->add_option("--out", out, "report.json path (stdout if omitted)");

  auto* sw = app.add_subcommand("sweep", "Detection accuracy over seeds of the four-region fixture");
  sw->add_option("--seeds", n_seeds, "Number of seeds")->capture_default_str();
  sw->add_option("--first-seed", first_seed, "First seed")->capture_default_str();
  sw->add_option("--config", config, "Pipeline config (a 'dbs' scenario sets the fixture)");
  sw->add_option("--tolerance", tolerance, "Hit tolerance in states")->capture_default_str();
  sw->add_option("--threads", threads, "Worker threads (0 = all cores)");
  sw->add_option("--out", out, "Summary JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(scenario, out, seed);
    if (*sim23) return cmd_demo_sim23(n_seeds, first_seed, scale, threads, out);
    if (*tm) return cmd_demo_twomass(n_seeds, first_seed, threads, out);
    if (*det) return cmd_detect(config, dataset, out);
    if (*ev) return cmd_evaluate(detection, dataset, out);
    if (*sw) return cmd_sweep(n_seeds, first_seed, config, tolerance, threads, out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
