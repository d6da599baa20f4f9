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
#include <vector>

#include "ttradar/tensor.hpp"

namespace ttradar {

inline constexpr double kSpeedOfLight = 299792458.0;

// FMCW MIMO radar configuration. The virtual array is an I_1 x I_2 URA with
// I_1 = K_Ta K_Ra and I_2 = K_Te K_Re.
struct RadarConfig {
  double f_c = 77e9;               // Hz
  double slope = 85.17e12;         // Hz/s
  double bandwidth = 2.51e9;       // Hz
  double chirp_duration = 2.51e9 / 85.17e12;  // s
  double sample_interval = 1.0 / 6.3e6;       // s
  double spacing = 0.0;            // m, 0 selects lambda / 2
  std::size_t k_ta = 3, k_te = 5, k_ra = 3, k_re = 5;
  std::size_t samples_per_chirp = 256;
  std::size_t chirps_per_frame = 128;
  // Integer number of full fast-time phase cycles folded away: a target at
  // range R produces eta in (zone - 1/2, zone + 1/2).
  int range_zone = 0;

  double wavelength() const { return kSpeedOfLight / f_c; }
  double element_spacing() const { return spacing > 0.0 ? spacing : 0.5 * wavelength(); }
  Dims dims() const { return {k_ta * k_ra, k_te * k_re, samples_per_chirp, chirps_per_frame}; }

  void validate() const;

  static RadarConfig table1();
  // 4 x 4 x 64 x 32 reduction of table1 with the same waveform.
  static RadarConfig desk();
};

struct TargetParams {
  double range_m = 0.0;
  double vel_mps = 0.0;
  double az_rad = 0.0;
  double el_rad = 0.0;
  cplx amplitude{1.0, 0.0};
};

// Normalized frequencies (cycles per index step). eta keeps its integer zone.
struct SpatialFrequencies {
  double theta = 0.0;  // mode 1
  double phi = 0.0;    // mode 2
  double eta = 0.0;    // mode 3
  double mu = 0.0;     // mode 4
};

struct NoiseSpec {
  double input_snr_db = 0.0;
  std::uint64_t seed = 0;
};

SpatialFrequencies spatial_frequencies(const RadarConfig& cfg, const TargetParams& tgt);

// Entry m (0-based) is exp(-j 2 pi nu (m + phase_offset)).
CVector steering_vector(double nu, std::size_t len, int phase_offset);

// Factor matrices U_1..U_4 of the clean tensor, one steering column per target.
std::vector<CMatrix> steering_factors(const RadarConfig& cfg, const std::vector<TargetParams>& targets);

ComplexTensor synthesize(const RadarConfig& cfg, const std::vector<TargetParams>& targets);

struct NoisyTensor {
  ComplexTensor noisy;
  ComplexTensor noise;
};

// Circular Gaussian noise scaled so that ||clean||^2 / ||noise||^2 equals the
// requested SNR exactly. An infinite SNR yields an all-zero noise tensor.
NoisyTensor add_noise(const ComplexTensor& clean, const NoiseSpec& spec);

}  // namespace ttradar
