#include "statemap/pipeline.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace statemap {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

template <typename F>
auto in_stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(name) + ": " + e.what());
  }
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw ValidationError("write failed: " + path.string());
}

}  // namespace

Dataset resolve_input(const PipelineConfig& config) {
  return in_stage("input", [&] {
    if (config.dataset) return load_dataset(*config.dataset);
    if (config.scenario) return simulate_scenario(*config.scenario);
    throw ValidationError("no dataset or scenario given");
  });
}

PipelineResult run_pipeline(const Dataset& dataset, const PipelineConfig& config) {
  in_stage("input", [&] { dataset.validate(); });
  PipelineResult res;
  res.edt = dataset.edt;

  const std::vector<Matrix> frames = in_stage("preprocess", [&] {
    if (!config.preprocess.enabled) {
      if (dataset.sample_kind == SampleKind::Series) {
        throw ValidationError("series dataset needs a preprocess kind (spectrogram or scattering)");
      }
      return dataset.states;
    }
    std::vector<Matrix> out;
    out.reserve(dataset.states.size());
    for (std::size_t i = 0; i < dataset.states.size(); ++i) {
      const Matrix& s = dataset.states[i];
      if (s.cols() != 1) {
        std::ostringstream os;
        os << "state " << i << ": preprocessing needs a single-column series, got " << s.cols()
           << " columns";
        throw ValidationError(os.str());
      }
      try {
        out.push_back(frame_features(s.col(0), config.preprocess.spec));
      } catch (const ValidationError& e) {
        std::ostringstream os;
        os << "state " << i << ": " << e.what();
        throw ValidationError(os.str());
      }
    }
    return out;
  });

  res.features = in_stage("features", [&] { return compute_all_features(frames, config.features); });
  res.distances = in_stage("geometry", [&] { return pairwise_distances(res.features, config.metric); });
  in_stage("spectral", [&] {
    const Affinity a = build_affinity(res.distances, config.spectral.kernel_scale);
    res.plain = normalize(a);
    res.embedding = eigen_embed(res.plain, config.spectral.n_coords);
  });
  if (!res.embedding.trivial_checked) res.warnings.push_back("leading eigenvector is not constant");
  if (res.embedding.degenerate_gap) res.warnings.push_back("eigenvalue gap after the last coordinate is degenerate");

  if (!config.detect.enabled) return res;

  DetectionOutcome det;
  in_stage("detect", [&] {
    det.borders = detect_borders(res.embedding.coords.col(0), dataset.edt, config.detect.transition);
  });
  in_stage("spectral", [&] {
    const DiffusionOperator ks = build_temporal_kernel(dataset.edt, config.spectral.temporal_scale);
    det.temporal = combine(res.plain, ks);
    det.temporal_embedding = eigen_embed(det.temporal, 3);
  });
  in_stage("detect", [&] {
    const Index len = det.borders.i_ex - det.borders.i_en + 1;
    if (len < 4) {
      det.sub.range_begin = det.borders.i_en;
      det.sub.failure_reason = "fewer than 4 states between entry and exit";
      return;
    }
    det.sub = detect_subregion(det.temporal_embedding.coords.col(1),
                               det.temporal_embedding.coords.col(2), dataset.edt, det.borders,
                               config.detect.subregion);
  });
  if (det.borders.no_exit) res.warnings.push_back("exit rule never fired; exit set to the last state");
  if (det.borders.sign_tie) res.warnings.push_back("sign rule tie; positive sign kept");
  if (det.temporal_embedding.degenerate_gap) {
    res.warnings.push_back("temporal operator eigenvalue gap is degenerate");
  }
  if (!det.sub.success) res.warnings.push_back("sub-region detection failed: " + det.sub.failure_reason);
  res.detection = std::move(det);

  if (dataset.truth) {
    res.report = in_stage("score", [&] {
      GroundTruth t{dataset.truth->entry_idx, dataset.truth->dlor_exit_idx, dataset.truth->exit_idx,
                    dataset.edt};
      return score(res.detection->borders, res.detection->sub, t);
    });
  }
  return res;
}

std::string detection_json(const PipelineResult& result) {
  if (!result.detection) throw ValidationError("detection_json: no detection in result");
  const auto& b = result.detection->borders;
  const auto& s = result.detection->sub;
  ojson j;
  j["index_base"] = 0;
  j["entry_idx"] = b.i_en;
  j["exit_idx"] = b.i_ex;
  j["entry_edt"] = b.edt_en;
  j["exit_edt"] = b.edt_ex;
  j["no_exit"] = b.no_exit;
  j["sign_flipped"] = b.sign_flipped;
  j["sign_tie"] = b.sign_tie;
  ojson sub;
  sub["success"] = s.success;
  if (s.success) {
    sub["dlor_exit_idx"] = s.i_d;
    sub["dlor_exit_edt"] = s.edt_d;
  } else {
    sub["dlor_exit_idx"] = nullptr;
    sub["failure_reason"] = s.failure_reason;
  }
  sub["range_begin"] = s.range_begin;
  sub["cluster_labels"] = s.cluster_labels;
  j["subregion"] = std::move(sub);
  j["psi1"] = to_std(b.psi1);
  j["psi1_smoothed"] = to_std(b.psi1_smoothed);
  j["warnings"] = result.warnings;
  return j.dump(2) + "\n";
}

std::string report_json(const ErrorReport& r) {
  ojson j;
  j["stn_entry_err"] = r.stn_entry_err;
  j["stn_exit_err"] = r.stn_exit_err;
  j["stn_overall_err"] = r.stn_overall_err;
  j["dlor_entry_err"] = r.dlor_entry_err;
  j["dlor_exit_err"] = r.dlor_exit_err;
  j["dlor_overall_err"] = r.dlor_overall_err;
  j["failed_dlor"] = r.failed_dlor;
  return j.dump(2) + "\n";
}

void save_results(const PipelineResult& result, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create " + dir.string() + ": " + ec.message());

  const Matrix& c = result.embedding.coords;
  std::ostringstream emb;
  emb << "index,edt";
  for (Index k = 0; k < c.cols(); ++k) emb << ",psi" << (k + 1);
  emb << '\n';
  for (Index i = 0; i < c.rows(); ++i) {
    emb << i << ',' << format_double(result.edt(i));
    for (Index k = 0; k < c.cols(); ++k) emb << ',' << format_double(c(i, k));
    emb << '\n';
  }
  write_text(dir / "embedding.csv", emb.str());

  ojson eig;
  eig["kernel_scale"] = result.plain.kernel_scale;
  eig["metric"] = to_string(result.distances.kind);
  eig["plain"] = to_std(result.embedding.spectrum);
  eig["trivial_checked"] = result.embedding.trivial_checked;
  eig["degenerate_gap"] = result.embedding.degenerate_gap;
  if (result.detection) {
    eig["temporal"] = to_std(result.detection->temporal_embedding.spectrum);
    eig["temporal_degenerate_gap"] = result.detection->temporal_embedding.degenerate_gap;
  }
  write_text(dir / "eigenvalues.json", eig.dump(2) + "\n");

  write_csv(dir / "distances.csv", result.distances.d);
  write_csv(dir / "kernel.csv", result.plain.k);
  if (result.detection) {
    write_csv(dir / "temporal_kernel.csv", result.detection->temporal.k);
    write_text(dir / "detection.json", detection_json(result));
  }
  if (result.report) write_text(dir / "report.json", report_json(*result.report));
}

DetectedIndices load_detection(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    DetectedIndices d;
    d.entry_idx = j.at("entry_idx").get<Index>();
    d.exit_idx = j.at("exit_idx").get<Index>();
    const auto& sub = j.at("subregion");
    const auto& dl = sub.at("dlor_exit_idx");
    d.dlor_exit_idx = dl.is_null() ? Index{-1} : dl.get<Index>();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace statemap
