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


#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>

#include "ttradar/errors.hpp"
#include "ttradar/harness.hpp"

namespace ttradar {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place 2D backward DFT of a column-major rows x cols buffer.
class Fft2 {
 public:
  Fft2(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    buf_ = fftw_alloc_complex(rows * cols);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_2d(static_cast<int>(cols), static_cast<int>(rows), buf_, buf_, FFTW_BACKWARD,
                             FFTW_ESTIMATE);
  }
  ~Fft2() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(buf_);
  }
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  cplx* data() { return reinterpret_cast<cplx*>(buf_); }
  void clear() { std::fill(data(), data() + rows_ * cols_, cplx{}); }
  void run() { fftw_execute(plan_); }

 private:
  std::size_t rows_, cols_;
  fftw_complex* buf_ = nullptr;
  fftw_plan plan_ = nullptr;
};

double bin_nu(std::size_t k, std::size_t bins) {
  return (static_cast<double>(k) - static_cast<double>(bins / 2)) / static_cast<double>(bins);
}

std::size_t shifted(std::size_t k, std::size_t bins) { return (k + bins / 2) % bins; }

// Incoherent power of the zero-padded 2D DFT over (row_mode, col_mode),
// summed over the other two modes and divided by their count. Output is
// fftshifted.
RMatrix two_axis_power(const ComplexTensor& y, std::size_t row_mode, std::size_t col_mode, std::size_t bins) {
  if (y.order() != 4) throw InvalidArgument("profile: expected a 4-order tensor");
  if (bins < 2) throw InvalidArgument("profile: need at least 2 bins");
  const Dims& d = y.dims();
  if (d[row_mode] > bins || d[col_mode] > bins) throw InvalidArgument("profile: DFT length shorter than the data");
  std::array<std::size_t, 2> other{};
  for (std::size_t n = 0, k = 0; n < 4; ++n)
    if (n != row_mode && n != col_mode) other[k++] = n;
  const std::array<std::size_t, 4> stride{1, d[0], d[0] * d[1], d[0] * d[1] * d[2]};

  Fft2 fft(bins, bins);
  RMatrix acc = RMatrix::Zero(static_cast<Eigen::Index>(bins), static_cast<Eigen::Index>(bins));
  for (std::size_t b = 0; b < d[other[1]]; ++b)
    for (std::size_t a = 0; a < d[other[0]]; ++a) {
      fft.clear();
      cplx* buf = fft.data();
      const std::size_t base = a * stride[other[0]] + b * stride[other[1]];
      for (std::size_t c = 0; c < d[col_mode]; ++c)
        for (std::size_t r = 0; r < d[row_mode]; ++r) buf[r + bins * c] = y[base + r * stride[row_mode] + c * stride[col_mode]];
      fft.run();
      for (std::size_t c = 0; c < bins; ++c)
        for (std::size_t r = 0; r < bins; ++r)
          acc(static_cast<Eigen::Index>(shifted(r, bins)), static_cast<Eigen::Index>(shifted(c, bins))) +=
              std::norm(buf[r + bins * c]);
    }
  acc /= static_cast<double>(d[other[0]] * d[other[1]]);
  return acc;
}

RMatrix to_db(const RMatrix& p) {
  const double mx = p.maxCoeff();
  RMatrix out(p.rows(), p.cols());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double v = mx > 0 ? 10.0 * std::log10(p.data()[i] / mx) : kProfileFloorDb;
    out.data()[i] = std::isfinite(v) ? std::max(v, kProfileFloorDb) : kProfileFloorDb;
  }
  return out;
}

double range_of(double nu, const RadarConfig& cfg) {
  return (nu + cfg.range_zone) * kSpeedOfLight / (2.0 * cfg.slope * cfg.sample_interval);
}
double velocity_of(double nu, const RadarConfig& cfg) { return nu * cfg.wavelength() / (2.0 * cfg.chirp_duration); }
double angle_deg_of(double nu, const RadarConfig& cfg) {
  return std::asin(std::clamp(nu * cfg.wavelength() / cfg.element_spacing(), -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

std::vector<double> axis(std::size_t bins, auto&& f) {
  std::vector<double> a(bins);
  for (std::size_t k = 0; k < bins; ++k) a[k] = f(bin_nu(k, bins));
  return a;
}

}  // namespace

double output_snr_db(const ComplexTensor& clean, const ComplexTensor& processed) {
  if (clean.dims() != processed.dims()) throw InvalidArgument("output_snr_db: dims differ");
  const double err = (processed - clean).squared_norm();
  if (err == 0.0) return kOutputSnrCapDb;
  const double v = 10.0 * std::log10(clean.squared_norm() / err);
  return std::clamp(v, -kOutputSnrCapDb, kOutputSnrCapDb);
}

std::size_t profile_bin(double nu, std::size_t bins) {
  const auto k = static_cast<long long>(std::llround(nu * static_cast<double>(bins)));
  const auto b = static_cast<long long>(bins);
  return shifted(static_cast<std::size_t>(((k % b) + b) % b), bins);
}

Profile rd_profile(const ComplexTensor& y, const RadarConfig& cfg, std::size_t bins) {
  Profile p;
  p.power = two_axis_power(y, 2, 3, bins);
  p.db = to_db(p.power);
  p.row_label = "range_m";
  p.col_label = "velocity_mps";
  p.row_axis = axis(bins, [&](double nu) { return range_of(nu, cfg); });
  p.col_axis = axis(bins, [&](double nu) { return velocity_of(nu, cfg); });
  return p;
}

Profile ra_profile(const ComplexTensor& y, const RadarConfig& cfg, AngleAxis ax, std::size_t bins) {
  Profile p;
  p.power = two_axis_power(y, 2, ax == AngleAxis::Azimuth ? 0 : 1, bins);
  p.db = to_db(p.power);
  p.row_label = "range_m";
  p.col_label = ax == AngleAxis::Azimuth ? "azimuth_deg" : "elevation_deg";
  p.row_axis = axis(bins, [&](double nu) { return range_of(nu, cfg); });
  p.col_axis = axis(bins, [&](double nu) { return angle_deg_of(nu, cfg); });
  return p;
}

void write_profile_csv(const std::filesystem::path& path, const Profile& p) {
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot open " + path.string() + " for writing");
  char buf[64];
  f << p.row_label << '\\' << p.col_label;
  for (double c : p.col_axis) {
    std::snprintf(buf, sizeof buf, ",%.6f", c);
    f << buf;
  }
  f << '\n';
  for (Eigen::Index r = 0; r < p.db.rows(); ++r) {
    std::snprintf(buf, sizeof buf, "%.6f", p.row_axis[static_cast<std::size_t>(r)]);
    f << buf;
    for (Eigen::Index c = 0; c < p.db.cols(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.4f", p.db(r, c));
      f << buf;
    }
    f << '\n';
  }
  if (!f) throw InvalidArgument("write failed: " + path.string());
}

double peak_snr_db(const ComplexTensor& clean, const ComplexTensor& processed, const RadarConfig& cfg,
                   const std::vector<TargetParams>& targets) {
  if (targets.empty()) throw InvalidArgument("peak_snr_db: no targets");
  const RMatrix sig = rd_profile(processed, cfg).power;
  const RMatrix err = rd_profile(processed - clean, cfg).power;
  double s = 0.0;
  for (const auto& t : targets) {
    const auto f = spatial_frequencies(cfg, t);
    s += sig(static_cast<Eigen::Index>(profile_bin(f.eta - cfg.range_zone)),
             static_cast<Eigen::Index>(profile_bin(f.mu)));
  }
  s /= static_cast<double>(targets.size());
  const double n = err.mean();
  if (n == 0.0) return kOutputSnrCapDb;
  if (s == 0.0) return -kOutputSnrCapDb;
  return std::clamp(10.0 * std::log10(s / n), -kOutputSnrCapDb, kOutputSnrCapDb);
}

EstimationResult fft_estimate(const ComplexTensor& y, const RadarConfig& cfg, std::size_t count, std::size_t bins) {
  const RMatrix p = two_axis_power(y, 2, 3, bins);
  const auto nb = static_cast<Eigen::Index>(bins);

  // Local maxima over the 8-neighbourhood with wraparound.
  std::vector<std::pair<double, std::pair<Eigen::Index, Eigen::Index>>> peaks;
  for (Eigen::Index c = 0; c < nb; ++c)
    for (Eigen::Index r = 0; r < nb; ++r) {
      const double v = p(r, c);
      if (!(v > 0)) continue;
      bool is_max = true;
      for (int dc = -1; dc <= 1 && is_max; ++dc)
        for (int dr = -1; dr <= 1; ++dr) {
          if (dr == 0 && dc == 0) continue;
          const double w = p((r + dr + nb) % nb, (c + dc + nb) % nb);
          // Ties break toward the lower flat index so a plateau yields one peak.
          if (w > v || (w == v && (dc < 0 || (dc == 0 && dr < 0)))) {
            is_max = false;
            break;
          }
        }
      if (is_max) peaks.push_back({v, {r, c}});
    }
  std::stable_sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  if (peaks.size() > count) peaks.resize(count);

  const Dims& d = y.dims();
  JointEigs eigs;
  eigs.converged = true;
  Fft2 fft(bins, bins);
  for (const auto& pk : peaks) {
    const double nu_r = bin_nu(static_cast<std::size_t>(pk.second.first), bins);
    const double nu_d = bin_nu(static_cast<std::size_t>(pk.second.second), bins);
    // Antenna snapshot at the detected range-Doppler cell.
    const CVector wr = steering_vector(-nu_r, d[2], 0);
    const CVector wd = steering_vector(-nu_d, d[3], 0);
    fft.clear();
    cplx* buf = fft.data();
    const std::size_t n12 = d[0] * d[1];
    for (std::size_t i4 = 0; i4 < d[3]; ++i4)
      for (std::size_t i3 = 0; i3 < d[2]; ++i3) {
        const cplx w = wr(static_cast<Eigen::Index>(i3)) * wd(static_cast<Eigen::Index>(i4));
        const cplx* src = y.data().data() + n12 * (i3 + d[2] * i4);
        for (std::size_t i2 = 0; i2 < d[1]; ++i2)
          for (std::size_t i1 = 0; i1 < d[0]; ++i1) buf[i1 + bins * i2] += w * src[i1 + d[0] * i2];
      }
    fft.run();
    std::size_t best = 0;
    for (std::size_t k = 1; k < bins * bins; ++k)
      if (std::norm(buf[k]) > std::norm(buf[best])) best = k;
    const double nu_t = bin_nu(shifted(best % bins, bins), bins);
    const double nu_p = bin_nu(shifted(best / bins, bins), bins);
    auto tn = [](double nu) { return std::tan(std::numbers::pi * nu); };
    eigs.tuples.push_back({tn(nu_t), tn(nu_p), tn(nu_r), tn(nu_d)});
  }
  EstimationResult res = invert_parameters(eigs, cfg);
  res.diagnostics.rank = peaks.size();
  res.diagnostics.notes.push_back("fft peak picking on a " + std::to_string(bins) + "-point grid");
  return res;
}

}  // namespace ttradar
