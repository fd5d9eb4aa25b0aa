#include "statemap/dataset_io.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <random>

using namespace statemap;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("statemap_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Dataset random_dataset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1e3);
  Dataset ds;
  const Index n = 7;
  ds.edt.resize(n);
  for (Index i = 0; i < n; ++i) {
    Matrix b(5 + i, 3);
    for (Index k = 0; k < b.size(); ++k) b.data()[k] = g(rng) * std::pow(10.0, static_cast<double>(k % 7) - 3.0);
    ds.states.push_back(b);
    ds.edt(i) = 10.0 - 0.1 * static_cast<double>(i) + 1e-13 * g(rng);
    ds.labels.push_back(static_cast<int>(i % 3));
    ds.seeds.push_back(std::uint64_t{1} << (i * 9));
  }
  ds.truth = TruthIndices{1, 3, 5};
  return ds;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  std::ofstream out(p);
  out << j.dump(2);
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint64_t> bits;
  int checked = 0;
  while (checked < 2000) {
    const std::uint64_t b = bits(rng);
    double v = 0.0;
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    EXPECT_EQ(parse_double(format_double(v)), v);
    ++checked;
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(parse_double(format_double(std::numeric_limits<double>::denorm_min())),
            std::numeric_limits<double>::denorm_min());
}

TEST(ParseDouble, RejectsGarbage) {
  EXPECT_THROW(parse_double("1.5x"), ValidationError);
  EXPECT_THROW(parse_double(""), ValidationError);
  EXPECT_DOUBLE_EQ(parse_double(" +2.5\r"), 2.5);
}

TEST(Dataset, RoundTripIsBitExact) {
  const fs::path dir = fresh_dir("roundtrip");
  const Dataset ds = random_dataset(1);
  save_dataset(ds, dir);
  const Dataset back = load_dataset(dir);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.states.size(); ++i) EXPECT_EQ(back.states[i], ds.states[i]);
  EXPECT_EQ(back.edt, ds.edt);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.seeds, ds.seeds);
  ASSERT_TRUE(back.truth.has_value());
  EXPECT_EQ(back.truth->entry_idx, 1);
  EXPECT_EQ(back.truth->dlor_exit_idx, 3);
  EXPECT_EQ(back.truth->exit_idx, 5);
  EXPECT_EQ(back.sample_kind, SampleKind::Frames);
}

TEST(Dataset, SeriesWithBaselinesRoundTrip) {
  const fs::path dir = fresh_dir("series");
  Dataset ds;
  ds.sample_kind = SampleKind::Series;
  ds.edt = Vector{{0.0, 1.0, 2.0}};
  for (int i = 0; i < 3; ++i) {
    ds.states.push_back(Matrix::Constant(20, 1, 0.25 * i));
    ds.latent_baselines.push_back(Vector{{1.0 + i, 3.0 / (i + 1)}});
  }
  save_dataset(ds, dir);
  const Dataset back = load_dataset(dir);
  EXPECT_EQ(back.sample_kind, SampleKind::Series);
  ASSERT_EQ(back.latent_baselines.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back.latent_baselines[i], ds.latent_baselines[i]);
}

TEST(Dataset, NonMonotoneEdtRejectedAtLoad) {
  const fs::path dir = fresh_dir("edt");
  save_dataset(random_dataset(2), dir);
  auto m = read_json(dir / "manifest.json");
  m["states"][3]["edt"] = 50.0;
  write_json(dir / "manifest.json", m);
  const std::string msg = message_of([&] { load_dataset(dir); });
  EXPECT_NE(msg.find("monotone"), std::string::npos) << msg;
}

TEST(Dataset, EmptyStateNamedByIndex) {
  const fs::path dir = fresh_dir("empty");
  save_dataset(random_dataset(3), dir);
  write_text(dir / "state_0004.csv", "");
  const std::string msg = message_of([&] { load_dataset(dir); });
  EXPECT_NE(msg.find("state 4"), std::string::npos) << msg;
}

TEST(Dataset, RowLengthMismatchReportsFileAndLine) {
  const fs::path dir = fresh_dir("ragged");
  save_dataset(random_dataset(4), dir);
  write_text(dir / "state_0002.csv", "1,2,3\n4,5,6\n7,8\n");
  const std::string msg = message_of([&] { load_dataset(dir); });
  EXPECT_NE(msg.find("state_0002.csv:3"), std::string::npos) << msg;
}

TEST(Dataset, MissingKeyNamed) {
  const fs::path dir = fresh_dir("missing");
  save_dataset(random_dataset(5), dir);
  auto m = read_json(dir / "manifest.json");
  m["states"][1].erase("edt");
  write_json(dir / "manifest.json", m);
  const std::string msg = message_of([&] { load_dataset(dir); });
  EXPECT_NE(msg.find("'edt'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("states[1]"), std::string::npos) << msg;
}

TEST(Dataset, MissingManifest) {
  const fs::path dir = fresh_dir("nomanifest");
  EXPECT_THROW(load_dataset(dir), ValidationError);
}

TEST(Csv, RejectsNonFinite) {
  const fs::path dir = fresh_dir("nan");
  write_text(dir / "x.csv", "1,2\n3,nan\n");
  const std::string msg = message_of([&] { read_csv(dir / "x.csv"); });
  EXPECT_NE(msg.find("x.csv:2"), std::string::npos) << msg;
}

TEST(DatasetValidate, Mismatches) {
  Dataset ds = random_dataset(6);
  ds.edt.conservativeResize(6);
  EXPECT_THROW(ds.validate(), ValidationError);
  ds = random_dataset(6);
  ds.truth = TruthIndices{3, 3, 5};
  EXPECT_THROW(ds.validate(), ValidationError);
  ds = random_dataset(6);
  ds.labels.pop_back();
  EXPECT_THROW(ds.validate(), ValidationError);
}
