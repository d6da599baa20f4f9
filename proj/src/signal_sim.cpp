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

#include "ttradar/signal_sim.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ttradar/errors.hpp"
#include "ttradar/rng.hpp"

namespace ttradar {

void RadarConfig::validate() const {
  if (!(f_c > 0 && slope > 0 && bandwidth > 0 && chirp_duration > 0 && sample_interval > 0))
    throw ScenarioInvalid("radar: f_c, slope, bandwidth, chirp_duration and sample_interval must be > 0");
  if (spacing < 0) throw ScenarioInvalid("radar: element spacing must be >= 0");
  if (slope * chirp_duration > bandwidth * (1 + 1e-9))
    throw ScenarioInvalid("radar: slope * chirp_duration exceeds bandwidth");
  if (k_ta < 1 || k_te < 1 || k_ra < 1 || k_re < 1 || samples_per_chirp < 1 || chirps_per_frame < 1)
    throw ScenarioInvalid("radar: all element and sample counts must be >= 1");
}

RadarConfig RadarConfig::table1() { return RadarConfig{}; }

RadarConfig RadarConfig::desk() {
  RadarConfig c;
  c.k_ta = 2;
  c.k_ra = 2;
  c.k_te = 2;
  c.k_re = 2;
  c.samples_per_chirp = 64;
  c.chirps_per_frame = 32;
  return c;
}

SpatialFrequencies spatial_frequencies(const RadarConfig& cfg, const TargetParams& tgt) {
  cfg.validate();
  if (!(tgt.range_m > 0)) throw ScenarioInvalid("target range must be > 0 m");
  const double lambda = cfg.wavelength();
  const double dl = cfg.element_spacing() / lambda;
  SpatialFrequencies f;
  f.theta = dl * std::cos(tgt.az_rad) * std::sin(tgt.el_rad);
  f.phi = dl * std::sin(tgt.az_rad) * std::sin(tgt.el_rad);
  f.eta = 2.0 * cfg.slope * tgt.range_m * cfg.sample_interval / kSpeedOfLight;
  f.mu = 2.0 * tgt.vel_mps * cfg.chirp_duration / lambda;

  auto fail = [](const char* name, double v, const char* bound) {
    std::ostringstream os;
    os << "aliasing: " << name << " = " << v << " violates " << bound;
    throw ScenarioInvalid(os.str());
  };
  if (!(std::abs(f.theta) < 0.5)) fail("Theta", f.theta, "|Theta| < 0.5");
  if (!(std::abs(f.phi) < 0.5)) fail("Phi", f.phi, "|Phi| < 0.5");
  if (!(std::abs(f.eta - cfg.range_zone) < 0.5)) fail("eta", f.eta, "|eta - range_zone| < 0.5");
  if (!(std::abs(f.mu) < 0.5)) fail("mu", f.mu, "|mu| < 0.5");
  return f;
}

CVector steering_vector(double nu, std::size_t len, int phase_offset) {
  if (len < 1) throw InvalidArgument("steering_vector: len must be >= 1");
  if (phase_offset != 0 && phase_offset != 1) throw InvalidArgument("steering_vector: phase_offset must be 0 or 1");
  CVector v(static_cast<Eigen::Index>(len));
  for (std::size_t m = 0; m < len; ++m)
    v(static_cast<Eigen::Index>(m)) =
        std::polar(1.0, -2.0 * std::numbers::pi * nu * static_cast<double>(m + phase_offset));
  return v;
}

std::vector<CMatrix> steering_factors(const RadarConfig& cfg, const std::vector<TargetParams>& targets) {
  if (targets.empty()) throw InvalidArgument("synthesize: at least one target is required");
  const Dims d = cfg.dims();
  const auto r = static_cast<Eigen::Index>(targets.size());
  std::vector<CMatrix> u;
  for (std::size_t n = 0; n < 4; ++n) u.emplace_back(static_cast<Eigen::Index>(d[n]), r);
  for (Eigen::Index k = 0; k < r; ++k) {
    const auto f = spatial_frequencies(cfg, targets[static_cast<std::size_t>(k)]);
    u[0].col(k) = steering_vector(f.theta, d[0], 0);
    u[1].col(k) = steering_vector(f.phi, d[1], 0);
    u[2].col(k) = steering_vector(f.eta, d[2], 1);
    u[3].col(k) = steering_vector(f.mu, d[3], 0);
  }
  return u;
}

ComplexTensor synthesize(const RadarConfig& cfg, const std::vector<TargetParams>& targets) {
  const auto u = steering_factors(cfg, targets);
  const Dims d = cfg.dims();
  ComplexTensor y(d);
  const std::size_t n12 = d[0] * d[1];
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    // Antenna plane a_1 a_2^T scaled by alpha, then swept over (i_3, i_4).
    const CMatrix plane = targets[k].amplitude * u[0].col(r) * u[1].col(r).transpose();
    std::size_t off = 0;
    for (std::size_t i4 = 0; i4 < d[3]; ++i4)
      for (std::size_t i3 = 0; i3 < d[2]; ++i3) {
        const cplx s = u[2](static_cast<Eigen::Index>(i3), r) * u[3](static_cast<Eigen::Index>(i4), r);
        for (std::size_t e = 0; e < n12; ++e) y[off + e] += s * plane.data()[e];
        off += n12;
      }
  }
  return y;
}

NoisyTensor add_noise(const ComplexTensor& clean, const NoiseSpec& spec) {
  if (std::isnan(spec.input_snr_db)) throw InvalidArgument("add_noise: SNR is NaN");
  for (const auto& v : clean.data())
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InvalidArgument("add_noise: non-finite input");
  ComplexTensor noise(clean.dims());
  if (spec.input_snr_db == std::numeric_limits<double>::infinity()) return {clean, noise};

  const CounterRng rng(spec.seed);
  for (std::size_t i = 0; i < noise.size(); ++i) {
    const auto [a, b] = rng.normal_pair(i);
    noise[i] = {a, b};
  }
  const double target = clean.norm() * std::pow(10.0, -spec.input_snr_db / 20.0);
  const double have = noise.norm();
  if (have > 0) noise *= cplx(target / have, 0.0);

  ComplexTensor noisy = clean + noise;
  return {std::move(noisy), std::move(noise)};
}

}  // namespace ttradar
