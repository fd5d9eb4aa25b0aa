#pragma once

// On-disk datasets: one headerless CSV per state plus manifest.json.
//
// manifest.json
//   format        "statemap-dataset"
//   version       1
//   n_states, dim
//   sample_kind   "frames" (rows are feature vectors) or "series" (one raw
//                 scalar series per state, to be framed by preprocessing)
//   states        [{index, file, edt, label?, seed?}, ...] in trajectory order
//   truth?        {entry_idx, dlor_exit_idx, exit_idx}, 0-based
//   latent_baselines?  [[...], ...] one vector per state

#include "statemap/common.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace statemap {

enum class SampleKind { Frames, Series };

struct TruthIndices {
  Index entry_idx = 0;
  Index dlor_exit_idx = 0;
  Index exit_idx = 0;
};

struct Dataset {
  std::vector<Matrix> states;
  Vector edt;
  std::vector<int> labels;              // empty when unlabelled
  std::vector<std::uint64_t> seeds;     // empty when unknown
  SampleKind sample_kind = SampleKind::Frames;
  std::optional<TruthIndices> truth;
  std::vector<Vector> latent_baselines;  // empty when unknown

  Index size() const { return static_cast<Index>(states.size()); }
  /// Same number of columns in every state, EDT strictly monotone, sizes agree.
  void validate() const;
};

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);
/// Parses a whole token as a double; throws ValidationError on junk.
double parse_double(std::string_view token);

void write_csv(const std::filesystem::path& path, const Matrix& m);
/// Errors name the file and 1-based line.
Matrix read_csv(const std::filesystem::path& path);

void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace statemap
