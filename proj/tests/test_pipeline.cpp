#include "statemap/demos.hpp"
#include "statemap/pipeline.hpp"
#include "statemap/stats.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace statemap;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("statemap_test_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// embedding.csv: header line, then index,edt,psi1,...
Matrix read_embedding(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("index,edt,psi1", 0), 0u) << line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(parse_double(tok));
    rows.push_back(row);
  }
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

const std::string kThreeGroupConfig = R"({
  "scenario": {"kind": "three_group", "seed": 3},
  "spectral": {"kernel_scale": "mean"}
})";

const std::string kDbsConfig = R"({
  "scenario": {"kind": "dbs", "seed": 5}
})";

std::string cli() {
  const char* p = std::getenv("STATEMAP_CLI");
  return p ? p : "";
}

int run_cli(const std::string& args, const fs::path& stderr_file) {
  const std::string cmd = "\"" + cli() + "\" " + args + " > /dev/null 2> \"" + stderr_file.string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Pipeline, ThreeGroupEmbeddingTracksBaseline) {
  const PipelineConfig cfg = parse_pipeline_config(kThreeGroupConfig);
  const PipelineResult res = run_pipeline(resolve_input(cfg), cfg);
  const fs::path dir = fresh_dir("three_group");
  save_results(res, dir);

  const Matrix emb = read_embedding(dir / "embedding.csv");
  ASSERT_EQ(emb.rows(), 30);
  const SimulatedTrajectory truth = build_three_group_scenario(3);
  Vector theta(30);
  for (Index i = 0; i < 30; ++i) theta(i) = truth.baselines[static_cast<std::size_t>(i)](0);
  EXPECT_GT(std::abs(pearson(emb.col(2), theta)), 0.99);
  EXPECT_EQ(emb.col(1), truth.edt);
  for (const char* f : {"eigenvalues.json", "distances.csv", "kernel.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
}

TEST(Pipeline, FourRegionScenarioEmitsReport) {
  const PipelineConfig cfg = parse_pipeline_config(kDbsConfig);
  const PipelineResult res = run_pipeline(resolve_input(cfg), cfg);
  ASSERT_TRUE(res.detection.has_value());
  ASSERT_TRUE(res.report.has_value());
  const fs::path dir = fresh_dir("dbs");
  save_results(res, dir);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  for (const char* k : {"stn_entry_err", "stn_exit_err", "stn_overall_err", "dlor_entry_err",
                        "dlor_exit_err", "dlor_overall_err", "failed_dlor"}) {
    EXPECT_TRUE(report.contains(k)) << k;
  }
  EXPECT_TRUE(fs::exists(dir / "temporal_kernel.csv"));
  const auto det = nlohmann::json::parse(slurp(dir / "detection.json"));
  EXPECT_EQ(det["index_base"], 0);
  const DetectedIndices idx = load_detection(dir / "detection.json");
  EXPECT_EQ(idx.entry_idx, res.detection->borders.i_en);
  EXPECT_EQ(idx.exit_idx, res.detection->borders.i_ex);
}

TEST(Pipeline, OperatorRowSums) {
  const PipelineConfig cfg = parse_pipeline_config(kDbsConfig);
  const PipelineResult res = run_pipeline(resolve_input(cfg), cfg);
  const Index n = res.plain.size();
  EXPECT_LE((res.plain.k.rowwise().sum() - Vector::Ones(n)).cwiseAbs().maxCoeff(), 1e-10);
  const Matrix& kt = res.detection->temporal.k;
  EXPECT_LE((kt.rowwise().sum() - Vector::Constant(n, 2.0)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Pipeline, RerunIsByteIdentical) {
  const PipelineConfig cfg = parse_pipeline_config(kDbsConfig);
  const fs::path a = fresh_dir("rerun_a");
  const fs::path b = fresh_dir("rerun_b");
  save_results(run_pipeline(resolve_input(cfg), cfg), a);
  save_results(run_pipeline(resolve_input(cfg), cfg), b);
  for (const char* f : {"detection.json", "report.json", "embedding.csv", "distances.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Pipeline, MissingDatasetIsStageTagged) {
  PipelineConfig cfg;
  cfg.dataset = fs::temp_directory_path() / "statemap_no_such_dataset";
  try {
    resolve_input(cfg);
    FAIL() << "expected a ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("input: ", 0), 0u) << e.what();
  }
}

TEST(Pipeline, SeriesWithoutPreprocessIsStageTagged) {
  Dataset ds;
  ds.sample_kind = SampleKind::Series;
  ds.edt = Vector{{0.0, 1.0, 2.0}};
  for (int i = 0; i < 3; ++i) ds.states.push_back(Matrix::Random(50, 1));
  try {
    run_pipeline(ds, PipelineConfig{});
    FAIL() << "expected a ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("preprocess: ", 0), 0u) << e.what();
  }
}

TEST(PipelineConfigParsing, UnknownKeysRejected) {
  EXPECT_THROW(parse_pipeline_config(R"({"scenario": {"kind": "three_group"}, "spectral": {"kernel": 1}})"),
               ValidationError);
  EXPECT_THROW(parse_pipeline_config(R"({"scenario": {"kind": "three_group"}, "bogus": 1})"),
               ValidationError);
  EXPECT_THROW(parse_pipeline_config("{not json"), ValidationError);
}

TEST(PipelineConfigParsing, DefaultsAndOverrides) {
  const PipelineConfig cfg = parse_pipeline_config(R"({
    "dataset": "data",
    "features": {"rel_tol": 1e-8},
    "geometry": {"metric": "euclidean"},
    "spectral": {"kernel_scale": 2.5, "temporal_scale": 0.3, "n_coords": 4},
    "detect": {"median_window": 4}
  })", "/base");
  EXPECT_EQ(*cfg.dataset, fs::path("/base/data"));
  EXPECT_EQ(cfg.features.rel_tol, 1e-8);
  EXPECT_EQ(cfg.metric, Metric::Euclidean);
  EXPECT_EQ(cfg.spectral.kernel_scale.rule, KernelScale::Rule::Fixed);
  EXPECT_EQ(cfg.spectral.kernel_scale.value, 2.5);
  EXPECT_EQ(*cfg.spectral.temporal_scale, 0.3);
  EXPECT_EQ(cfg.spectral.n_coords, 4);
  EXPECT_EQ(cfg.detect.transition.median_window, 4);
  EXPECT_EQ(cfg.detect.transition.ma_window, 3);
  EXPECT_EQ(cfg.output_dir, fs::path("out"));
}

TEST(Sweep, FixtureDlorExitWithinOneState) {
  const SweepResult r = run_sweep();
  int hits = 0;
  for (const auto& s : r.seeds) hits += s.dlor_ok;
  EXPECT_GE(hits, 16);
  EXPECT_EQ(r.monotone_violations, 0);
}

// ---------------------------------------------------------------------------

TEST(Cli, SimulateDetectEvaluate) {
  ASSERT_FALSE(cli().empty()) << "STATEMAP_CLI not set";
  const fs::path dir = fresh_dir("cli");
  {
    std::ofstream(dir / "scenario.json") << R"({"kind": "dbs", "seed": 2})";
    std::ofstream(dir / "config.json") << R"({"dataset": "data"})";
  }
  const fs::path err = dir / "stderr.txt";
  ASSERT_EQ(run_cli("simulate --scenario " + (dir / "scenario.json").string() + " --out " +
                        (dir / "data").string(), err), 0) << slurp(err);
  ASSERT_EQ(run_cli("detect --config " + (dir / "config.json").string() + " --out " +
                        (dir / "out").string(), err), 0) << slurp(err);
  ASSERT_EQ(run_cli("evaluate --detection " + (dir / "out" / "detection.json").string() +
                        " --dataset " + (dir / "data").string() + " --out " +
                        (dir / "eval.json").string(), err), 0) << slurp(err);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "eval.json")),
            nlohmann::json::parse(slurp(dir / "out" / "report.json")));
}

TEST(Cli, MissingDatasetExitsNonzero) {
  ASSERT_FALSE(cli().empty()) << "STATEMAP_CLI not set";
  const fs::path dir = fresh_dir("cli_missing");
  std::ofstream(dir / "config.json") << R"({"dataset": "nowhere"})";
  const fs::path err = dir / "stderr.txt";
  EXPECT_EQ(run_cli("detect --config " + (dir / "config.json").string(), err), 2);
  EXPECT_NE(slurp(err).find("input: "), std::string::npos) << slurp(err);
}

TEST(Cli, UnknownSubcommandExitsNonzero) {
  ASSERT_FALSE(cli().empty()) << "STATEMAP_CLI not set";
  const fs::path dir = fresh_dir("cli_bad");
  EXPECT_NE(run_cli("frobnicate", dir / "stderr.txt"), 0);
}
