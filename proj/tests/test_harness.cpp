// SPDX-License-Identifier: Apache-2.0
//
// ttradar: tensor-train denoising and parameter estimation for FMCW MIMO radar
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "test_util.hpp"
#include "ttradar/decomp.hpp"
#include "ttradar/errors.hpp"
#include "ttradar/harness.hpp"

using namespace ttradar;
using namespace ttradar::testing;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kC = 299792458.0;

RadarConfig desk() {
  RadarConfig c = RadarConfig::desk();
  c.range_zone = 2;
  return c;
}

std::vector<TargetParams> coherent_pair() {
  return {{24.0, 12.0, 17.5 * kDeg, 56.3 * kDeg, 1.0}, {24.0, -13.0, -36.8 * kDeg, 36.9 * kDeg, 0.6}};
}

// Fftshifted bin of a normalized frequency on a K-point grid, from first principles.
Eigen::Index oracle_bin(double nu, std::size_t k) {
  const double frac = nu - std::floor(nu);  // [0, 1)
  auto b = static_cast<long>(std::lround(frac * static_cast<double>(k))) % static_cast<long>(k);
  return static_cast<Eigen::Index>((b + static_cast<long>(k / 2)) % static_cast<long>(k));
}

double eta_of(const RadarConfig& c, double range) { return 2.0 * c.slope * c.sample_interval * range / kC; }
double mu_of(const RadarConfig& c, double vel) { return 2.0 * vel * c.chirp_duration / (kC / c.f_c); }

std::pair<Eigen::Index, Eigen::Index> argmax(const RMatrix& m) {
  Eigen::Index r = 0, c = 0;
  m.maxCoeff(&r, &c);
  return {r, c};
}

bool local_max(const RMatrix& m, Eigen::Index r, Eigen::Index c) {
  for (Eigen::Index dr = -1; dr <= 1; ++dr)
    for (Eigen::Index dc = -1; dc <= 1; ++dc) {
      const Eigen::Index rr = (r + dr + m.rows()) % m.rows(), cc = (c + dc + m.cols()) % m.cols();
      if (m(rr, cc) > m(r, c)) return false;
    }
  return true;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ttradar_harness_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

Scenario desk_scenario() {
  Scenario s;
  s.radar = desk();
  s.targets = coherent_pair();
  return s;
}

}  // namespace

// ------------------------------------------------------------------ output SNR

TEST(OutputSnr, IdenticalIsCapped) {
  std::mt19937_64 g(1);
  auto y = rand_tensor(g, {3, 4, 5});
  EXPECT_EQ(output_snr_db(y, y), kOutputSnrCapDb);
}

TEST(OutputSnr, ZeroDbNoiseIsZeroDb) {
  const auto clean = synthesize(desk(), coherent_pair());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto n = add_noise(clean, {0.0, seed});
    EXPECT_NEAR(output_snr_db(clean, n.noisy), 0.0, 0.1);
  }
}

TEST(OutputSnr, KnownScaling) {
  std::mt19937_64 g(2);
  auto y = rand_tensor(g, {4, 4, 4});
  EXPECT_NEAR(output_snr_db(y, cplx(1.1, 0.0) * y), 20.0, 1e-9);
}

TEST(OutputSnr, DimsMismatchThrows) {
  EXPECT_THROW(output_snr_db(ComplexTensor({2, 3}), ComplexTensor({3, 2})), InvalidArgument);
}

// -------------------------------------------------------------------- profiles

TEST(Profile, BinHelperMatchesOracle) {
  for (double nu : {-0.49, -0.25, -0.001, 0.0, 0.1, 0.37, 0.499, 2.3, -1.7})
    EXPECT_EQ(static_cast<Eigen::Index>(profile_bin(nu, 256)), oracle_bin(nu, 256)) << nu;
}

TEST(Profile, SingleStaticTargetPeaksAtEtaBin) {
  const auto cfg = desk();
  const TargetParams t{24.0, 0.0, 10.0 * kDeg, 70.0 * kDeg, 1.0};
  const auto p = rd_profile(synthesize(cfg, {t}), cfg);
  ASSERT_EQ(p.db.rows(), 256);
  ASSERT_EQ(p.db.cols(), 256);
  const auto [r, c] = argmax(p.db);
  EXPECT_EQ(r, oracle_bin(eta_of(cfg, 24.0), 256));
  EXPECT_EQ(c, oracle_bin(0.0, 256));
  EXPECT_EQ(p.db.maxCoeff(), 0.0);
  EXPECT_GE(p.db.minCoeff(), kProfileFloorDb);
  EXPECT_NEAR(p.row_axis[static_cast<std::size_t>(r)], 24.0, 0.5 * (p.row_axis[1] - p.row_axis[0]) + 1e-9);
}

TEST(Profile, AllZeroIsFloor) {
  const auto cfg = desk();
  const auto p = rd_profile(ComplexTensor(cfg.dims()), cfg);
  EXPECT_EQ(p.db.maxCoeff(), kProfileFloorDb);
  EXPECT_EQ(p.db.minCoeff(), kProfileFloorDb);
  const auto a = ra_profile(ComplexTensor(cfg.dims()), cfg, AngleAxis::Elevation);
  EXPECT_EQ(a.db.maxCoeff(), kProfileFloorDb);
}

TEST(Profile, TwoTargetsTwoPeaks) {
  const auto cfg = desk();
  const std::vector<TargetParams> ts{{20.0, 10.0, 0.0, 60.0 * kDeg, 1.0}, {27.0, -8.0, 0.0, 60.0 * kDeg, 0.8}};
  const auto p = rd_profile(synthesize(cfg, ts), cfg);
  for (const auto& t : ts) {
    const Eigen::Index r = oracle_bin(eta_of(cfg, t.range_m), 256), c = oracle_bin(mu_of(cfg, t.vel_mps), 256);
    EXPECT_TRUE(local_max(p.db, r, c)) << t.range_m;
    EXPECT_GT(p.db(r, c), 20.0 * std::log10(0.8) - 0.5);
  }
}

TEST(Profile, RangeAngleAzimuthBin) {
  const auto cfg = desk();
  const TargetParams t{22.0, 3.0, 20.0 * kDeg, 50.0 * kDeg, 1.0};
  const auto p = ra_profile(synthesize(cfg, {t}), cfg, AngleAxis::Azimuth);
  const double theta = 0.5 * std::cos(t.az_rad) * std::sin(t.el_rad);  // half-wavelength spacing
  const auto [r, c] = argmax(p.db);
  EXPECT_EQ(r, oracle_bin(eta_of(cfg, 22.0), 256));
  EXPECT_EQ(c, oracle_bin(theta, 256));
  EXPECT_EQ(p.col_label, "azimuth_deg");
}

TEST(Profile, CsvGridShape) {
  const auto cfg = desk();
  const auto p = rd_profile(synthesize(cfg, coherent_pair()), cfg, 64);
  const auto dir = scratch("csv");
  write_profile_csv(dir / "rd.csv", p);
  std::ifstream f(dir / "rd.csv");
  std::string line;
  std::size_t lines = 0;
  std::getline(f, line);
  EXPECT_EQ(line.rfind("range_m\\velocity_mps,", 0), 0u);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 64);
  while (std::getline(f, line)) {
    ++lines;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 64);
  }
  EXPECT_EQ(lines, 64u);
}

// ---------------------------------------------------------------- FFT baseline

TEST(FftBaseline, SeparatedTargetsWithinOneBin) {
  const auto cfg = desk();
  const std::vector<TargetParams> ts{{20.0, 10.0, 15.0 * kDeg, 60.0 * kDeg, 1.0},
                                     {27.0, -8.0, -30.0 * kDeg, 40.0 * kDeg, 0.9}};
  const auto r = fft_estimate(synthesize(cfg, ts), cfg, 2);
  ASSERT_EQ(r.targets.size(), 2u);
  const double range_bin = kC / (2.0 * cfg.slope * cfg.sample_interval * 256.0);
  const double vel_bin = (kC / cfg.f_c) / (2.0 * cfg.chirp_duration * 256.0);
  const auto nm = joint_nmse(r, ts);
  EXPECT_FALSE(nm.penalized);
  for (const auto& t : ts) {
    bool found = false;
    for (const auto& e : r.targets)
      found |= std::abs(e.range_m - t.range_m) <= range_bin && std::abs(e.vel_mps - t.vel_mps) <= vel_bin;
    EXPECT_TRUE(found) << t.range_m;
  }
  EXPECT_LT(nm.mean(), 1e-3);
}

// -------------------------------------------------------------------- scenario

TEST(Scenario, ParseAndRoundTrip) {
  const auto s = parse_scenario(R"({"version":1,"radar":{"preset":"desk","range_zone":2},
    "targets":[{"range_m":24,"vel_mps":12,"az_deg":17.5,"el_deg":56.3,"amplitude":[0.5,0.25]}],
    "noise":{"input_snr_db":-10,"seed":9}})");
  EXPECT_EQ(s.radar.dims(), (Dims{4, 4, 64, 32}));
  ASSERT_EQ(s.targets.size(), 1u);
  EXPECT_NEAR(s.targets[0].az_rad, 17.5 * kDeg, 1e-15);
  EXPECT_EQ(s.targets[0].amplitude, cplx(0.5, 0.25));
  EXPECT_EQ(s.noise.input_snr_db, -10.0);
  EXPECT_EQ(s.noise.seed, 9u);
  const auto back = parse_scenario(scenario_to_json(s));
  EXPECT_EQ(back.radar.dims(), s.radar.dims());
  EXPECT_EQ(back.radar.range_zone, 2);
  EXPECT_EQ(back.targets[0].el_rad, s.targets[0].el_rad);
  EXPECT_EQ(back.targets[0].amplitude, s.targets[0].amplitude);
  EXPECT_EQ(scenario_to_json(back), scenario_to_json(s));
}

TEST(Scenario, NoiselessSpellings) {
  for (const char* v : {"\"inf\"", "null"}) {
    const auto s = parse_scenario(std::string(R"({"targets":[{"range_m":3}],"noise":{"input_snr_db":)") + v + "}}");
    EXPECT_TRUE(std::isinf(s.noise.input_snr_db));
  }
}

TEST(Scenario, Errors) {
  EXPECT_THROW(parse_scenario("{not json"), InvalidArgument);
  EXPECT_THROW(parse_scenario(R"({"version":2})"), InvalidArgument);
  EXPECT_THROW(parse_scenario(R"({"radar":{"preset":"huge"}})"), InvalidArgument);
  EXPECT_THROW(parse_scenario(R"({"targets":[{"vel_mps":1}]})"), InvalidArgument);
  // 24 m lies outside range zone 0 on the desk waveform.
  EXPECT_THROW(parse_scenario(R"({"targets":[{"range_m":24}]})"), ScenarioInvalid);
}

TEST(Scenario, ShippedFilesLoad) {
  const std::filesystem::path dir = TTRADAR_SOURCE_DIR "/scenarios";
  const auto d = load_scenario(dir / "desk.json");
  EXPECT_EQ(d.radar.dims(), (Dims{4, 4, 64, 32}));
  EXPECT_EQ(d.targets.size(), 2u);
  const auto t = load_scenario(dir / "table1.json");
  EXPECT_EQ(t.radar.dims(), (Dims{9, 25, 256, 128}));
  const auto b = load_benchmark(dir / "bench_desk.json");
  EXPECT_EQ(b.scenario, dir / "desk.json");
  EXPECT_EQ(b.trials, 100u);
}

TEST(EstimationJson, Shape) {
  const auto cfg = desk();
  const auto r = estimate(synthesize(cfg, coherent_pair()), cfg, {1, 2, 2, 2, 1});
  const auto nm = joint_nmse(r, coherent_pair());
  const auto j = nlohmann::json::parse(estimation_to_json(r, &nm));
  ASSERT_EQ(j.at("targets").size(), 2u);
  for (const char* k : {"range_m", "vel_mps", "az_rad", "el_rad", "flags"}) EXPECT_TRUE(j["targets"][0].contains(k));
  EXPECT_EQ(j.at("nmse").size(), 2u);
  EXPECT_EQ(j.at("diagnostics").at("rank"), 2);
}

// ------------------------------------------------------------------- benchmark

TEST(Benchmark, SpecValidation) {
  BenchmarkSpec b;
  b.methods = {"none"};
  b.snr_db = {0};
  EXPECT_NO_THROW(b.validate());
  auto bad = b;
  bad.trials = 0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = b;
  bad.methods = {};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = b;
  bad.methods = {"music"};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = b;
  bad.snr_db = {0, 0};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = b;
  bad.snr_db = {0, -10};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  EXPECT_THROW(parse_benchmark(R"({"scenario":"x.json","methods":["none"],"snr_db":[0],"metric":"db"})", "."),
               InvalidArgument);
  EXPECT_THROW(parse_benchmark(R"({"methods":["none"],"snr_db":[0]})", "."), InvalidArgument);
}

TEST(Benchmark, IdentityMethodKeepsInputSnr) {
  BenchmarkSpec b;
  b.methods = {"none"};
  b.snr_db = {-10, 5};
  b.trials = 1;
  const auto rows = run_benchmark(b, desk_scenario());
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.trials, 1u);
    EXPECT_NEAR(r.output_snr_db_mean, r.input_snr_db, 0.1);
    EXPECT_EQ(r.output_snr_db_std, 0.0);
  }
}

TEST(Benchmark, RowsSortedAndCsvDeterministic) {
  BenchmarkSpec b;
  b.methods = {"tt_mdl", "none", "fft_baseline"};
  b.snr_db = {-10, 0};
  b.trials = 2;
  b.base_seed = 7;
  b.timings = false;
  const auto rows = run_benchmark(b, desk_scenario());
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_TRUE(std::make_pair(rows[i - 1].method, rows[i - 1].input_snr_db) <
                std::make_pair(rows[i].method, rows[i].input_snr_db));
  const std::string csv = metrics_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
  EXPECT_EQ(metrics_csv(run_benchmark(b, desk_scenario())), csv);
  for (const auto& r : rows) {
    EXPECT_EQ(r.denoise_ms + r.smooth_ms + r.estimate_ms, 0.0);
    EXPECT_GE(r.output_snr_db_std, 0.0);
    EXPECT_EQ(r.failures, 0u);
  }
}

TEST(Benchmark, PairedNoiseAcrossMethods) {
  // none and fft_baseline both score the raw noisy tensor, so their output SNR
  // agrees to the last bit only if they saw the same realization.
  BenchmarkSpec b;
  b.methods = {"none", "fft_baseline"};
  b.snr_db = {-5};
  b.trials = 3;
  b.base_seed = 11;
  const auto rows = run_benchmark(b, desk_scenario());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].output_snr_db, rows[1].output_snr_db);
}

TEST(Benchmark, TtMdlAtLeastAlsAtMinus20) {
  BenchmarkSpec b;
  b.methods = {"tt_mdl", "cpd_als"};
  b.snr_db = {-20};
  b.trials = 3;
  b.base_seed = 1;
  const auto rows = run_benchmark(b, desk_scenario());
  ASSERT_EQ(rows.size(), 2u);
  const auto& als = rows[0];
  const auto& tt = rows[1];
  ASSERT_EQ(tt.method, "tt_mdl");
  EXPECT_GE(tt.output_snr_db_mean, als.output_snr_db_mean);
  EXPECT_EQ(tt.worse_than_input, 0u);
  EXPECT_LE(tt.max_energy_residual, 1e-8);
}

TEST(Benchmark, TimingTableShape) {
  BenchmarkSpec b;
  b.methods = {"none", "tt_mdl"};
  b.snr_db = {0};
  b.trials = 1;
  const auto t = timing_table(run_benchmark(b, desk_scenario()));
  EXPECT_EQ(t.substr(0, t.find('\n')), "stage,none,tt_mdl");
  EXPECT_NE(t.find("\ndenoise_ms,"), std::string::npos);
  EXPECT_NE(t.find("\nsmooth_ms,"), std::string::npos);
  EXPECT_NE(t.find("\nestimate_ms,"), std::string::npos);
}
