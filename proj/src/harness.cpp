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


#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ttradar/decomp.hpp"
#include "ttradar/errors.hpp"
#include "ttradar/harness.hpp"

namespace ttradar {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string(what) + ": " + e.what());
  }
}

void check_version(const json& j, const char* what) {
  if (j.value("version", 1) != 1) throw InvalidArgument(std::string(what) + ": unsupported version");
}

double angle(const json& t, const char* deg, const char* rad) {
  if (t.contains(rad)) return t.at(rad).get<double>();
  if (t.contains(deg)) return t.at(deg).get<double>() * kDeg;
  return 0.0;
}

double snr_value(const json& v) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "noiseless") return std::numeric_limits<double>::infinity();
    throw InvalidArgument("scenario: input_snr_db must be a number or \"inf\"");
  }
  return v.get<double>();
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return v.empty() ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

using Clock = std::chrono::steady_clock;
double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct TrialOutcome {
  ComplexTensor processed;
  EstimationResult est;
  double denoise_ms = 0.0;
  double energy_residual = 0.0;
  bool empty_signal = false;
  bool not_converged = false;
  bool regularized = false;
};

EstimateOptions fixed_plan(const Dims& dims, std::size_t k) {
  EstimateOptions o;
  SmoothingPlan p;
  for (std::size_t n = 0; n < 4; ++n) p.sub_dims[n] = std::clamp<std::size_t>(k, 1, dims[n]);
  o.plan = p;
  o.rank = k;
  return o;
}

TrialOutcome run_method(const std::string& method, const ComplexTensor& noisy, const Scenario& sc,
                        const BenchmarkSpec& spec, std::uint64_t seed) {
  const std::size_t k = sc.targets.size();
  TrialOutcome out;
  if (method == "none") {
    out.processed = noisy;
    out.est = estimate(noisy, sc.radar, {}, fixed_plan(noisy.dims(), k));
  } else if (method == "fft_baseline") {
    out.processed = noisy;
    const auto t0 = Clock::now();
    out.est = fft_estimate(noisy, sc.radar, k);
    out.est.estimate_ms = ms_since(t0);
  } else if (method == "tt_mdl") {
    const auto t0 = Clock::now();
    auto dn = tt_mdl(noisy);
    out.denoise_ms = ms_since(t0);
    double kept = dn.denoised.squared_norm();
    for (double e : dn.truncation_energy) kept += e;
    const double total = noisy.squared_norm();
    out.energy_residual = total > 0 ? std::abs(total - kept) / total : 0.0;
    out.empty_signal = dn.empty_signal;
    out.processed = std::move(dn.denoised);
    if (!dn.empty_signal) out.est = estimate(out.processed, sc.radar, dn.model.ranks);
  } else if (method == "cpd_als") {
    const auto t0 = Clock::now();
    CpdAlsOptions o;
    o.max_iters = spec.als_max_iters;
    o.seed = seed;
    auto als = cpd_als(noisy, k, o);
    out.processed = reconstruct(als.model);
    out.denoise_ms = ms_since(t0);
    out.not_converged = !als.converged;
    out.regularized = als.regularized;
    out.est = estimate(out.processed, sc.radar, {}, fixed_plan(noisy.dims(), k));
  } else if (method == "cpd_recompress") {
    const auto t0 = Clock::now();
    CpdAlsOptions o;
    o.max_iters = spec.als_max_iters;
    o.seed = seed;
    auto als = cpd_als(noisy, k + spec.cpd_extra_rank, o);
    const TTModel tt = tt_recompress(cpd_to_tt(als.model), spec.recompress_epsilon);
    out.processed = reconstruct(tt);
    out.denoise_ms = ms_since(t0);
    out.not_converged = !als.converged;
    out.regularized = als.regularized;
    out.est = estimate(out.processed, sc.radar, tt.ranks);
  } else {
    throw InvalidArgument("unknown method " + method);
  }
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

// ---------------------------------------------------------------- scenario

Scenario parse_scenario(const std::string& text) {
  const json j = parse_json(text, "scenario");
  Scenario s;
  try {
    check_version(j, "scenario");
    const json r = j.value("radar", json::object());
    const std::string preset = r.value("preset", "desk");
    if (preset == "desk")
      s.radar = RadarConfig::desk();
    else if (preset == "table1")
      s.radar = RadarConfig::table1();
    else
      throw InvalidArgument("scenario: unknown radar preset " + preset);
    auto& c = s.radar;
    c.f_c = r.value("f_c", c.f_c);
    c.slope = r.value("slope", c.slope);
    c.bandwidth = r.value("bandwidth", c.bandwidth);
    c.chirp_duration = r.value("chirp_duration", c.chirp_duration);
    c.sample_interval = r.value("sample_interval", c.sample_interval);
    c.spacing = r.value("spacing", c.spacing);
    c.k_ta = r.value("k_ta", c.k_ta);
    c.k_te = r.value("k_te", c.k_te);
    c.k_ra = r.value("k_ra", c.k_ra);
    c.k_re = r.value("k_re", c.k_re);
    c.samples_per_chirp = r.value("samples_per_chirp", c.samples_per_chirp);
    c.chirps_per_frame = r.value("chirps_per_frame", c.chirps_per_frame);
    c.range_zone = r.value("range_zone", c.range_zone);
    c.validate();

    for (const auto& t : j.value("targets", json::array())) {
      TargetParams p;
      p.range_m = t.at("range_m").get<double>();
      p.vel_mps = t.value("vel_mps", 0.0);
      p.az_rad = angle(t, "az_deg", "az_rad");
      p.el_rad = angle(t, "el_deg", "el_rad");
      if (t.contains("amplitude")) {
        const auto& a = t.at("amplitude");
        p.amplitude = a.is_array() ? cplx(a.at(0).get<double>(), a.at(1).get<double>()) : cplx(a.get<double>(), 0.0);
      }
      spatial_frequencies(c, p);
      s.targets.push_back(p);
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      if (n.contains("input_snr_db")) s.noise.input_snr_db = snr_value(n.at("input_snr_db"));
      s.noise.seed = n.value("seed", std::uint64_t{0});
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("scenario: ") + e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_text(path)); }

std::string scenario_to_json(const Scenario& s) {
  const auto& c = s.radar;
  json j;
  j["version"] = 1;
  j["radar"] = {{"f_c", c.f_c},
                {"slope", c.slope},
                {"bandwidth", c.bandwidth},
                {"chirp_duration", c.chirp_duration},
                {"sample_interval", c.sample_interval},
                {"spacing", c.spacing},
                {"k_ta", c.k_ta},
                {"k_te", c.k_te},
                {"k_ra", c.k_ra},
                {"k_re", c.k_re},
                {"samples_per_chirp", c.samples_per_chirp},
                {"chirps_per_frame", c.chirps_per_frame},
                {"range_zone", c.range_zone}};
  j["targets"] = json::array();
  for (const auto& t : s.targets)
    j["targets"].push_back({{"range_m", t.range_m},
                            {"vel_mps", t.vel_mps},
                            {"az_rad", t.az_rad},
                            {"el_rad", t.el_rad},
                            {"amplitude", {t.amplitude.real(), t.amplitude.imag()}}});
  j["noise"] = {{"input_snr_db", std::isfinite(s.noise.input_snr_db) ? json(s.noise.input_snr_db) : json("inf")},
                {"seed", s.noise.seed}};
  return j.dump(2);
}

std::string estimation_to_json(const EstimationResult& r, const NmseResult* nmse) {
  json j;
  j["targets"] = json::array();
  for (const auto& t : r.targets)
    j["targets"].push_back({{"range_m", num(t.range_m)},
                            {"vel_mps", num(t.vel_mps)},
                            {"az_rad", num(t.az_rad)},
                            {"el_rad", num(t.el_rad)},
                            {"az_deg", num(t.az_rad / kDeg)},
                            {"el_deg", num(t.el_rad / kDeg)},
                            {"flags", t.flags}});
  j["nmse"] = nmse ? json(nmse->per_target) : json(nullptr);
  const auto& d = r.diagnostics;
  json dg;
  dg["sub_dims"] = d.plan.sub_dims;
  dg["rank"] = d.rank;
  dg["observable"] = d.observable;
  dg["upsilon_residual"] = d.upsilon_residual;
  dg["upsilon_regularized"] = d.upsilon_regularized;
  dg["ssd_converged"] = d.ssd_converged;
  dg["ssd_sweeps"] = d.ssd_sweeps;
  dg["ssd_residual"] = d.ssd_residual;
  dg["rank_deficient"] = d.rank_deficient;
  dg["route"] = d.route == SubspaceRoute::Gram ? "gram" : "direct";
  dg["fba_residue"] = d.fba_residue;
  dg["notes"] = d.notes;
  if (nmse) {
    dg["nmse_penalized"] = nmse->penalized;
    dg["matched"] = nmse->matched;
  }
  dg["smooth_ms"] = r.smooth_ms;
  dg["estimate_ms"] = r.estimate_ms;
  j["diagnostics"] = dg;
  return j.dump(2);
}

// --------------------------------------------------------------- benchmark

void BenchmarkSpec::validate() const {
  if (trials < 1) throw InvalidArgument("benchmark: trials must be >= 1");
  if (methods.empty()) throw InvalidArgument("benchmark: methods must be non-empty");
  for (const auto& m : methods)
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end())
      throw InvalidArgument("benchmark: unknown method " + m);
  if (std::set<std::string>(methods.begin(), methods.end()).size() != methods.size())
    throw InvalidArgument("benchmark: duplicate method");
  if (snr_db.empty()) throw InvalidArgument("benchmark: SNR grid must be non-empty");
  for (std::size_t i = 0; i < snr_db.size(); ++i) {
    if (!std::isfinite(snr_db[i])) throw InvalidArgument("benchmark: SNR grid must be finite");
    if (i > 0 && !(snr_db[i] > snr_db[i - 1])) throw InvalidArgument("benchmark: SNR grid must be strictly increasing");
  }
  if (!(recompress_epsilon >= 0.0 && recompress_epsilon < 1.0))
    throw InvalidArgument("benchmark: recompress_epsilon must be in [0, 1)");
  if (als_max_iters < 1) throw InvalidArgument("benchmark: als_max_iters must be >= 1");
}

BenchmarkSpec parse_benchmark(const std::string& text, const std::filesystem::path& base_dir) {
  const json j = parse_json(text, "benchmark");
  BenchmarkSpec b;
  try {
    check_version(j, "benchmark");
    const std::filesystem::path sc = j.at("scenario").get<std::string>();
    b.scenario = sc.is_absolute() ? sc : base_dir / sc;
    b.methods = j.at("methods").get<std::vector<std::string>>();
    b.snr_db = j.at("snr_db").get<std::vector<double>>();
    b.trials = j.value("trials", b.trials);
    b.base_seed = j.value("base_seed", b.base_seed);
    if (j.contains("out_dir")) b.out_dir = j.at("out_dir").get<std::string>();
    b.timings = j.value("timings", b.timings);
    const std::string metric = j.value("metric", "tensor");
    if (metric == "tensor")
      b.metric = SnrMetric::Tensor;
    else if (metric == "peak")
      b.metric = SnrMetric::Peak;
    else
      throw InvalidArgument("benchmark: metric must be \"tensor\" or \"peak\"");
    b.cpd_extra_rank = j.value("cpd_extra_rank", b.cpd_extra_rank);
    b.recompress_epsilon = j.value("recompress_epsilon", b.recompress_epsilon);
    b.als_max_iters = j.value("als_max_iters", b.als_max_iters);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("benchmark: ") + e.what());
  }
  b.validate();
  return b;
}

BenchmarkSpec load_benchmark(const std::filesystem::path& path) {
  return parse_benchmark(read_text(path), path.parent_path());
}

std::vector<MetricsRow> run_benchmark(const BenchmarkSpec& spec) { return run_benchmark(spec, load_scenario(spec.scenario)); }

std::vector<MetricsRow> run_benchmark(const BenchmarkSpec& spec, const Scenario& sc) {
  spec.validate();
  if (sc.targets.empty()) throw InvalidArgument("benchmark: scenario has no targets");
  const ComplexTensor clean = synthesize(sc.radar, sc.targets);

  std::map<std::pair<std::string, double>, MetricsRow> rows;
  std::map<std::pair<std::string, double>, std::array<std::vector<double>, 3>> times;
  for (double snr : spec.snr_db)
    for (const auto& m : spec.methods) {
      auto& r = rows[{m, snr}];
      r.method = m;
      r.input_snr_db = snr;
    }

  for (double snr : spec.snr_db) {
    for (std::size_t trial = 0; trial < spec.trials; ++trial) {
      const std::uint64_t seed = spec.base_seed + trial;
      const NoisyTensor nt = add_noise(clean, {snr, seed});
      const double input_err = (nt.noisy - clean).norm();
      for (const auto& m : spec.methods) {
        auto& row = rows[{m, snr}];
        try {
          TrialOutcome o = run_method(m, nt.noisy, sc, spec, seed);
          const double osnr = spec.metric == SnrMetric::Tensor ? output_snr_db(clean, o.processed)
                                                               : peak_snr_db(clean, o.processed, sc.radar, sc.targets);
          const NmseResult nm = joint_nmse(o.est, sc.targets);
          row.output_snr_db.push_back(osnr);
          row.nmse.push_back(nm.mean());
          if ((o.processed - clean).norm() > input_err) ++row.worse_than_input;
          row.max_energy_residual = std::max(row.max_energy_residual, o.energy_residual);
          row.empty_signal += o.empty_signal;
          row.not_converged += o.not_converged;
          row.regularized += o.regularized;
          auto& tm = times[{m, snr}];
          tm[0].push_back(o.denoise_ms);
          tm[1].push_back(o.est.smooth_ms);
          tm[2].push_back(o.est.estimate_ms);
        } catch (const std::exception& e) {
          ++row.failures;
          if (row.errors.size() < 5) row.errors.push_back("trial " + std::to_string(trial) + ": " + e.what());
        }
      }
    }
  }

  std::vector<MetricsRow> out;
  for (auto& [key, r] : rows) {
    r.trials = r.output_snr_db.size();
    r.output_snr_db_mean = mean_of(r.output_snr_db);
    r.output_snr_db_std = std_of(r.output_snr_db);
    r.nmse_mean = mean_of(r.nmse);
    r.nmse_std = std_of(r.nmse);
    if (spec.timings && r.trials > 0) {
      const auto& tm = times[key];
      r.denoise_ms = mean_of(tm[0]);
      r.smooth_ms = mean_of(tm[1]);
      r.estimate_ms = mean_of(tm[2]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string s = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows)
    s += r.method + "," + fmt(r.input_snr_db) + "," + fmt(r.output_snr_db_mean) + "," + fmt(r.output_snr_db_std) + "," +
         fmt(r.nmse_mean) + "," + fmt(r.nmse_std) + "," + fmt(r.denoise_ms) + "," + fmt(r.smooth_ms) + "," +
         fmt(r.estimate_ms) + "," + std::to_string(r.trials) + "\n";
  return s;
}

std::string timing_table(const std::vector<MetricsRow>& rows) {
  std::vector<std::string> methods;
  std::map<std::string, std::array<double, 4>> acc;  // sums of 3 stages + row count
  for (const auto& r : rows) {
    if (!acc.count(r.method)) methods.push_back(r.method);
    auto& a = acc[r.method];
    if (r.trials == 0) continue;
    a[0] += r.denoise_ms;
    a[1] += r.smooth_ms;
    a[2] += r.estimate_ms;
    a[3] += 1.0;
  }
  std::string s = "stage";
  for (const auto& m : methods) s += "," + m;
  s += "\n";
  const char* names[3] = {"denoise_ms", "smooth_ms", "estimate_ms"};
  for (int k = 0; k < 3; ++k) {
    s += names[k];
    for (const auto& m : methods) {
      const auto& a = acc[m];
      s += "," + fmt(a[3] > 0 ? a[static_cast<std::size_t>(k)] / a[3] : std::numeric_limits<double>::quiet_NaN());
    }
    s += "\n";
  }
  return s;
}

std::string metrics_json(const std::vector<MetricsRow>& rows) {
  json j = json::array();
  for (const auto& r : rows)
    j.push_back({{"method", r.method},
                 {"input_snr_db", r.input_snr_db},
                 {"output_snr_db_mean", num(r.output_snr_db_mean)},
                 {"output_snr_db_std", num(r.output_snr_db_std)},
                 {"nmse_mean", num(r.nmse_mean)},
                 {"nmse_std", num(r.nmse_std)},
                 {"denoise_ms", r.denoise_ms},
                 {"smooth_ms", r.smooth_ms},
                 {"estimate_ms", r.estimate_ms},
                 {"trials", r.trials},
                 {"failures", r.failures},
                 {"errors", r.errors},
                 {"worse_than_input", r.worse_than_input},
                 {"max_energy_residual", r.max_energy_residual},
                 {"empty_signal", r.empty_signal},
                 {"als_not_converged", r.not_converged},
                 {"als_regularized", r.regularized}});
  return j.dump(2);
}

}  // namespace ttradar
