#include "statemap/dataset_io.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>

namespace statemap {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

void Dataset::validate() const {
  const Index n = size();
  if (n < 1) throw ValidationError("dataset: no states");
  if (edt.size() != n) {
    std::ostringstream os;
    os << "dataset: " << n << " states but " << edt.size() << " EDT values";
    throw ValidationError(os.str());
  }
  const Index s = states.front().cols();
  for (Index i = 0; i < n; ++i) {
    const Matrix& b = states[static_cast<std::size_t>(i)];
    if (b.rows() == 0 || b.cols() == 0) {
      std::ostringstream os;
      os << "dataset: state " << i << " is empty";
      throw ValidationError(os.str());
    }
    if (b.cols() != s) {
      std::ostringstream os;
      os << "dataset: state " << i << " has " << b.cols() << " columns, expected " << s;
      throw ValidationError(os.str());
    }
  }
  if (sample_kind == SampleKind::Series && s != 1) {
    throw ValidationError("dataset: series datasets need exactly one column per state");
  }
  if (n >= 2) {
    const bool inc = edt(1) > edt(0);
    for (Index i = 1; i < n; ++i) {
      const double g = edt(i) - edt(i - 1);
      if (inc ? !(g > 0.0) : !(g < 0.0)) {
        std::ostringstream os;
        os << "dataset: EDT is not strictly monotone at state " << i;
        throw ValidationError(os.str());
      }
    }
  }
  if (!labels.empty() && static_cast<Index>(labels.size()) != n) {
    throw ValidationError("dataset: label count does not match state count");
  }
  if (!seeds.empty() && static_cast<Index>(seeds.size()) != n) {
    throw ValidationError("dataset: seed count does not match state count");
  }
  if (!latent_baselines.empty() && static_cast<Index>(latent_baselines.size()) != n) {
    throw ValidationError("dataset: baseline count does not match state count");
  }
  if (truth) {
    const auto& t = *truth;
    if (t.entry_idx < 0 || !(t.entry_idx < t.dlor_exit_idx) || !(t.dlor_exit_idx <= t.exit_idx) ||
        t.exit_idx >= n) {
      throw ValidationError("dataset: truth indices must satisfy 0 <= entry < dlor_exit <= exit < N");
    }
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw ValidationError("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r')) {
    token.remove_suffix(1);
  }
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw ValidationError("cannot parse '" + std::string(token) + "' as a number");
  }
  return v;
}

void write_csv(const fs::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw ValidationError("write failed: " + path.string());
}

Matrix read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Index count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view tok = rest.substr(0, comma);
      double v = 0.0;
      try {
        v = parse_double(tok);
      } catch (const ValidationError& e) {
        std::ostringstream os;
        os << path.string() << ":" << line_no << ": " << e.what();
        throw ValidationError(os.str());
      }
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << path.string() << ":" << line_no << ": non-finite value";
        throw ValidationError(os.str());
      }
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols < 0) {
      cols = count;
    } else if (count != cols) {
      std::ostringstream os;
      os << path.string() << ":" << line_no << ": row has " << count << " fields, expected "
         << cols;
      throw ValidationError(os.str());
    }
    ++rows;
  }
  if (rows == 0) return Matrix(0, 0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  }
  return m;
}

namespace {

std::string state_file(Index i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "state_%04ld.csv", static_cast<long>(i));
  return buf;
}

const json& require(const json& obj, const char* key, const fs::path& file,
                    const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    std::ostringstream os;
    os << file.string() << ": missing key '" << key << "'";
    if (!where.empty()) os << " in " << where;
    throw ValidationError(os.str());
  }
  return obj.at(key);
}

}  // namespace

void save_dataset(const Dataset& ds, const fs::path& dir) {
  ds.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create " + dir.string() + ": " + ec.message());

  json manifest;
  manifest["format"] = "statemap-dataset";
  manifest["version"] = 1;
  manifest["n_states"] = ds.size();
  manifest["dim"] = ds.states.front().cols();
  manifest["sample_kind"] = ds.sample_kind == SampleKind::Series ? "series" : "frames";
  json states = json::array();
  for (Index i = 0; i < ds.size(); ++i) {
    const std::string file = state_file(i);
    write_csv(dir / file, ds.states[static_cast<std::size_t>(i)]);
    json s;
    s["index"] = i;
    s["file"] = file;
    s["edt"] = ds.edt(i);
    if (!ds.labels.empty()) s["label"] = ds.labels[static_cast<std::size_t>(i)];
    if (!ds.seeds.empty()) s["seed"] = ds.seeds[static_cast<std::size_t>(i)];
    states.push_back(std::move(s));
  }
  manifest["states"] = std::move(states);
  if (ds.truth) {
    manifest["truth"] = {{"entry_idx", ds.truth->entry_idx},
                         {"dlor_exit_idx", ds.truth->dlor_exit_idx},
                         {"exit_idx", ds.truth->exit_idx}};
  }
  if (!ds.latent_baselines.empty()) {
    json bl = json::array();
    for (const auto& b : ds.latent_baselines) {
      bl.push_back(std::vector<double>(b.data(), b.data() + b.size()));
    }
    manifest["latent_baselines"] = std::move(bl);
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw ValidationError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

Dataset load_dataset(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  std::ifstream in(mpath);
  if (!in) throw ValidationError("cannot open " + mpath.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(mpath.string() + ": invalid JSON: " + e.what());
  }

  Dataset ds;
  try {
    const auto& fmt = require(manifest, "format", mpath, "");
    if (fmt.get<std::string>() != "statemap-dataset") {
      throw ValidationError(mpath.string() + ": unexpected format '" + fmt.get<std::string>() + "'");
    }
    const Index n = require(manifest, "n_states", mpath, "").get<Index>();
    const Index dim = require(manifest, "dim", mpath, "").get<Index>();
    const std::string kind = require(manifest, "sample_kind", mpath, "").get<std::string>();
    if (kind == "frames") {
      ds.sample_kind = SampleKind::Frames;
    } else if (kind == "series") {
      ds.sample_kind = SampleKind::Series;
    } else {
      throw ValidationError(mpath.string() + ": sample_kind must be 'frames' or 'series'");
    }
    const auto& states = require(manifest, "states", mpath, "");
    if (!states.is_array() || static_cast<Index>(states.size()) != n) {
      throw ValidationError(mpath.string() + ": 'states' must be an array of n_states entries");
    }
    ds.edt.resize(n);
    bool has_labels = true;
    bool has_seeds = true;
    std::vector<int> labels;
    std::vector<std::uint64_t> seeds;
    for (Index i = 0; i < n; ++i) {
      const json& s = states[static_cast<std::size_t>(i)];
      const std::string where = "states[" + std::to_string(i) + "]";
      const Index idx = require(s, "index", mpath, where).get<Index>();
      if (idx != i) {
        std::ostringstream os;
        os << mpath.string() << ": " << where << " has index " << idx << ", states must be listed in order";
        throw ValidationError(os.str());
      }
      const std::string file = require(s, "file", mpath, where).get<std::string>();
      ds.edt(i) = require(s, "edt", mpath, where).get<double>();
      if (s.contains("label")) {
        labels.push_back(s.at("label").get<int>());
      } else {
        has_labels = false;
      }
      if (s.contains("seed")) {
        seeds.push_back(s.at("seed").get<std::uint64_t>());
      } else {
        has_seeds = false;
      }
      Matrix block = read_csv(dir / file);
      if (block.rows() == 0) {
        std::ostringstream os;
        os << (dir / file).string() << ": state " << i << " is empty";
        throw ValidationError(os.str());
      }
      if (block.cols() != dim) {
        std::ostringstream os;
        os << (dir / file).string() << ": state " << i << " has " << block.cols()
           << " columns, manifest dim is " << dim;
        throw ValidationError(os.str());
      }
      ds.states.push_back(std::move(block));
    }
    if (has_labels) ds.labels = std::move(labels);
    if (has_seeds) ds.seeds = std::move(seeds);
    if (manifest.contains("truth")) {
      const auto& t = manifest.at("truth");
      TruthIndices ti;
      ti.entry_idx = require(t, "entry_idx", mpath, "truth").get<Index>();
      ti.dlor_exit_idx = require(t, "dlor_exit_idx", mpath, "truth").get<Index>();
      ti.exit_idx = require(t, "exit_idx", mpath, "truth").get<Index>();
      ds.truth = ti;
    }
    if (manifest.contains("latent_baselines")) {
      for (const auto& b : manifest.at("latent_baselines")) {
        const auto v = b.get<std::vector<double>>();
        ds.latent_baselines.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(mpath.string() + ": " + e.what());
  }
  try {
    ds.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(mpath.string() + ": " + e.what());
  }
  return ds;
}

}  // namespace statemap
