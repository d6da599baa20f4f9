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


#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "ttradar/estimate.hpp"
#include "ttradar/signal_sim.hpp"
#include "ttradar/tensor.hpp"

namespace ttradar {

// ---------------------------------------------------------------- metrics

inline constexpr double kOutputSnrCapDb = 300.0;

// 10 log10(||clean||^2 / ||processed - clean||^2), capped at 300 dB.
double output_snr_db(const ComplexTensor& clean, const ComplexTensor& processed);

// ---------------------------------------------------------------- profiles

inline constexpr std::size_t kProfileBins = 256;
inline constexpr double kProfileFloorDb = -120.0;

// Power map in dB normalized to its maximum and clamped at -120 dB. Rows and
// columns are fftshifted DFT bins: bin k holds nu = (k - K/2) / K.
struct Profile {
  RMatrix db;
  RMatrix power;  // linear, before normalization
  std::vector<double> row_axis;
  std::vector<double> col_axis;
  std::string row_label;
  std::string col_label;
};

// Centered DFT bin of a normalized frequency on a K-point grid.
std::size_t profile_bin(double nu, std::size_t bins = kProfileBins);

// Range x Doppler, incoherently averaged over the antenna modes.
Profile rd_profile(const ComplexTensor& y, const RadarConfig& cfg, std::size_t bins = kProfileBins);

enum class AngleAxis { Azimuth, Elevation };

// Range x angle (mode 1 or mode 2), averaged over the remaining modes.
Profile ra_profile(const ComplexTensor& y, const RadarConfig& cfg, AngleAxis axis,
                   std::size_t bins = kProfileBins);

// CSV grid: header row "<row_label>\<col_label>,c_0,...", then one row per
// row-axis value.
void write_profile_csv(const std::filesystem::path& path, const Profile& p);

// Mean true-target power on the rd profile of `processed` over the mean power
// of the rd profile of (processed - clean).
double peak_snr_db(const ComplexTensor& clean, const ComplexTensor& processed, const RadarConfig& cfg,
                   const std::vector<TargetParams>& targets);

// ------------------------------------------------------------- FFT baseline

// Range-Doppler FFT, the strongest `count` local maxima, then a zero-padded
// 2D angle FFT of each detected cell.
EstimationResult fft_estimate(const ComplexTensor& y, const RadarConfig& cfg, std::size_t count,
                              std::size_t bins = kProfileBins);

// ---------------------------------------------------------------- scenario

struct Scenario {
  RadarConfig radar;
  std::vector<TargetParams> targets;
  NoiseSpec noise{std::numeric_limits<double>::infinity(), 0};
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& s);

std::string estimation_to_json(const EstimationResult& r, const NmseResult* nmse);

// --------------------------------------------------------------- benchmark

inline const std::vector<std::string> kMethods{"cpd_als", "cpd_recompress", "fft_baseline", "none", "tt_mdl"};

enum class SnrMetric { Tensor, Peak };

struct BenchmarkSpec {
  std::filesystem::path scenario;
  std::vector<std::string> methods;
  std::vector<double> snr_db;
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  std::filesystem::path out_dir;
  bool timings = true;
  SnrMetric metric = SnrMetric::Tensor;
  std::size_t cpd_extra_rank = 2;     // cpd_recompress fits rank K + extra
  double recompress_epsilon = 0.05;
  std::size_t als_max_iters = 200;

  void validate() const;
};

BenchmarkSpec parse_benchmark(const std::string& json_text, const std::filesystem::path& base_dir);
BenchmarkSpec load_benchmark(const std::filesystem::path& path);

struct MetricsRow {
  std::string method;
  double input_snr_db = 0.0;
  double output_snr_db_mean = 0.0;
  double output_snr_db_std = 0.0;
  double nmse_mean = 0.0;
  double nmse_std = 0.0;
  double denoise_ms = 0.0;
  double smooth_ms = 0.0;
  double estimate_ms = 0.0;
  std::size_t trials = 0;  // successful trials

  std::size_t failures = 0;
  std::vector<std::string> errors;
  std::vector<double> output_snr_db;  // per successful trial
  std::vector<double> nmse;           // per successful trial, mean over targets
  std::size_t worse_than_input = 0;   // trials where processing raised the error
  double max_energy_residual = 0.0;   // tt_mdl truncation-energy identity
  std::size_t empty_signal = 0;       // tt_mdl found no signal subspace
  std::size_t not_converged = 0;      // ALS stopped at max_iters
  std::size_t regularized = 0;        // ALS ridge used
};

inline const char* const kCsvHeader =
    "method,input_snr_db,output_snr_db_mean,output_snr_db_std,nmse_mean,nmse_std,denoise_ms,smooth_ms,"
    "estimate_ms,trials";

// Rows sorted by (method, input SNR). Trial failures are recorded per row.
std::vector<MetricsRow> run_benchmark(const BenchmarkSpec& spec, const Scenario& scenario);
std::vector<MetricsRow> run_benchmark(const BenchmarkSpec& spec);

std::string metrics_csv(const std::vector<MetricsRow>& rows);
// Stage timings per method in the shape of a time-consumption table.
std::string timing_table(const std::vector<MetricsRow>& rows);
std::string metrics_json(const std::vector<MetricsRow>& rows);

}  // namespace ttradar
