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

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttradar/adc.hpp"
#include "ttradar/cli.hpp"
#include "ttradar/cten_io.hpp"
#include "ttradar/decomp.hpp"
#include "ttradar/errors.hpp"
#include "ttradar/estimate.hpp"
#include "ttradar/harness.hpp"

namespace ttradar {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

void add_common(CLI::App* app, Common& c, bool config_required, const std::string& config_help) {
  app->add_option("--seed", c.seed, "RNG seed");
  auto* cfg = app->add_option("--config", c.config, config_help);
  if (config_required) cfg->required();
  app->add_option("--out", c.out, "output directory")->required();
}

fs::path out_dir(const std::string& d) {
  fs::path p(d);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw InvalidArgument("write failed: " + path.string());
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

json dims_json(const Dims& d) { return json(std::vector<std::size_t>(d.begin(), d.end())); }

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
  Common c;
  std::optional<double> snr;
};

void simulate(const SimulateArgs& a, std::ostream& out) {
  Scenario sc = load_scenario(a.c.config);
  if (a.snr) sc.noise.input_snr_db = *a.snr;
  if (a.c.seed) sc.noise.seed = *a.c.seed;
  if (sc.targets.empty()) throw InvalidArgument("simulate: scenario has no targets");
  const auto dir = out_dir(a.c.out);
  const ComplexTensor clean = synthesize(sc.radar, sc.targets);
  const NoisyTensor n = add_noise(clean, sc.noise);
  write_cten(dir / "clean.cten", clean);
  write_cten(dir / "noisy.cten", n.noisy);
  json m;
  m["version"] = 1;
  m["dims"] = dims_json(clean.dims());
  m["input_snr_db"] = std::isfinite(sc.noise.input_snr_db) ? json(sc.noise.input_snr_db) : json("inf");
  m["seed"] = sc.noise.seed;
  m["files"] = {{"clean", "clean.cten"}, {"noisy", "noisy.cten"}};
  m["scenario"] = json::parse(scenario_to_json(sc));
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  out << "wrote " << (dir / "noisy.cten").string() << " dims";
  for (auto d : clean.dims()) out << ' ' << d;
  out << '\n';
}

// ------------------------------------------------------------------- denoise

struct DenoiseArgs {
  Common c;
  std::string in;
  std::string method = "tt_mdl";
  std::optional<std::size_t> rank;
  std::size_t extra_rank = 2;
  double epsilon = 0.05;
  std::size_t max_iters = 500;
};

void denoise(const DenoiseArgs& a, std::ostream& out) {
  const ComplexTensor y = read_cten(a.in);
  const auto dir = out_dir(a.c.out);
  json rep;
  rep["method"] = a.method;
  const auto t0 = std::chrono::steady_clock::now();
  ComplexTensor den;
  if (a.method == "tt_mdl") {
    auto r = tt_mdl(y);
    rep["ranks"] = r.model.ranks;
    rep["truncation_energy"] = r.truncation_energy;
    rep["warnings"] = r.warnings;
    rep["empty_signal"] = r.empty_signal;
    save_model(dir / "model", r.model);
    den = std::move(r.denoised);
  } else if (a.method == "cpd_als" || a.method == "cpd_recompress") {
    std::size_t rank = 0;
    if (a.rank) {
      rank = *a.rank;
    } else if (!a.c.config.empty()) {
      rank = load_scenario(a.c.config).targets.size();
    } else {
      throw InvalidArgument("denoise: " + a.method + " needs --rank or a scenario --config");
    }
    CpdAlsOptions o;
    o.max_iters = a.max_iters;
    o.seed = a.c.seed.value_or(0);
    const bool recompress = a.method == "cpd_recompress";
    auto als = cpd_als(y, recompress ? rank + a.extra_rank : rank, o);
    rep["als_iterations"] = als.iterations;
    rep["als_converged"] = als.converged;
    rep["als_regularized"] = als.regularized;
    rep["als_residual"] = als.residual_history.empty() ? json(nullptr) : json(als.residual_history.back());
    if (recompress) {
      const TTModel tt = tt_recompress(cpd_to_tt(als.model), a.epsilon);
      rep["ranks"] = tt.ranks;
      save_model(dir / "model", tt);
      den = reconstruct(tt);
    } else {
      save_model(dir / "model", als.model);
      den = reconstruct(als.model);
    }
  } else {
    throw InvalidArgument("denoise: unknown method " + a.method);
  }
  rep["denoise_ms"] = ms_since(t0);
  rep["dims"] = dims_json(y.dims());
  write_cten(dir / "denoised.cten", den);
  write_text(dir / "denoise.json", rep.dump(2) + "\n");
  out << a.method;
  if (rep.contains("ranks")) out << " ranks " << rep["ranks"].dump();
  out << '\n';
}

// ------------------------------------------------------------------ estimate

struct EstimateArgs {
  Common c;
  std::string in;
  std::vector<std::size_t> tt_ranks;
  std::vector<std::size_t> plan;
  std::optional<std::size_t> rank;
  std::string route = "auto";
  bool no_denoise = false;
};

void estimate_cmd(const EstimateArgs& a, std::ostream& out) {
  const Scenario sc = load_scenario(a.c.config);
  ComplexTensor y = read_cten(a.in);
  if (y.dims() != sc.radar.dims()) throw InvalidArgument("estimate: tensor dims do not match the radar config");
  EstimateOptions o;
  if (a.route == "direct")
    o.route = SubspaceRoute::Direct;
  else if (a.route == "gram")
    o.route = SubspaceRoute::Gram;
  else if (a.route != "auto")
    throw InvalidArgument("estimate: --route must be auto, direct or gram");
  if (!a.plan.empty()) {
    if (a.plan.size() != 4) throw InvalidArgument("estimate: --plan takes 4 subarray sizes");
    o.plan = SmoothingPlan{{a.plan[0], a.plan[1], a.plan[2], a.plan[3]}};
  }
  o.rank = a.rank;

  std::vector<std::size_t> ranks = a.tt_ranks;
  json pre;
  if (!a.no_denoise) {
    auto dn = tt_mdl(y);
    pre["ranks"] = dn.model.ranks;
    pre["empty_signal"] = dn.empty_signal;
    if (dn.empty_signal) throw NumericFailure("estimate: TT-MDL found no signal subspace");
    if (ranks.empty()) ranks = dn.model.ranks;
    y = std::move(dn.denoised);
  } else if (ranks.empty() && !o.plan) {
    throw InvalidArgument("estimate: --no-denoise needs --tt-ranks or --plan");
  }

  const EstimationResult r = estimate(y, sc.radar, ranks, o);
  std::optional<NmseResult> nm;
  if (!sc.targets.empty()) nm = joint_nmse(r, sc.targets);
  json j = json::parse(estimation_to_json(r, nm ? &*nm : nullptr));
  if (!a.no_denoise) j["denoise"] = pre;
  const auto dir = out_dir(a.c.out);
  write_text(dir / "estimate.json", j.dump(2) + "\n");
  for (const auto& t : r.targets)
    out << "range_m " << t.range_m << " vel_mps " << t.vel_mps << " az_deg " << t.az_rad * 180.0 / std::numbers::pi
        << " el_deg " << t.el_rad * 180.0 / std::numbers::pi << '\n';
  if (nm) out << "nmse " << nm->mean() << (nm->penalized ? " (cardinality penalty)" : "") << '\n';
}

// ------------------------------------------------------------------- profile

struct ProfileArgs {
  Common c;
  std::string in;
  std::string kind = "all";
  std::size_t bins = kProfileBins;
};

void profile_cmd(const ProfileArgs& a, std::ostream& out) {
  const Scenario sc = load_scenario(a.c.config);
  const ComplexTensor y = read_cten(a.in);
  if (y.dims() != sc.radar.dims()) throw InvalidArgument("profile: tensor dims do not match the radar config");
  if (a.kind != "all" && a.kind != "rd" && a.kind != "ra-az" && a.kind != "ra-el")
    throw InvalidArgument("profile: --kind must be rd, ra-az, ra-el or all");
  const auto dir = out_dir(a.c.out);
  auto emit = [&](const char* name, const Profile& p) {
    write_profile_csv(dir / name, p);
    out << "wrote " << (dir / name).string() << '\n';
  };
  if (a.kind == "all" || a.kind == "rd") emit("rd.csv", rd_profile(y, sc.radar, a.bins));
  if (a.kind == "all" || a.kind == "ra-az") emit("ra_azimuth.csv", ra_profile(y, sc.radar, AngleAxis::Azimuth, a.bins));
  if (a.kind == "all" || a.kind == "ra-el")
    emit("ra_elevation.csv", ra_profile(y, sc.radar, AngleAxis::Elevation, a.bins));
}

// --------------------------------------------------------------------- bench

struct BenchArgs {
  Common c;
  std::optional<std::size_t> trials;
  std::vector<std::string> methods;
  bool no_timings = false;
};

void bench(const BenchArgs& a, std::ostream& out) {
  BenchmarkSpec spec = load_benchmark(a.c.config);
  if (a.c.seed) spec.base_seed = *a.c.seed;
  if (a.trials) spec.trials = *a.trials;
  if (!a.methods.empty()) spec.methods = a.methods;
  if (a.no_timings) spec.timings = false;
  spec.out_dir = a.c.out;
  spec.validate();
  const auto rows = run_benchmark(spec);
  const auto dir = out_dir(a.c.out);
  const std::string csv = metrics_csv(rows);
  write_text(dir / "bench.csv", csv);
  write_text(dir / "bench.json", metrics_json(rows) + "\n");
  write_text(dir / "timings.csv", timing_table(rows));
  out << csv;
  for (const auto& r : rows)
    if (r.failures > 0) out << r.method << " @ " << r.input_snr_db << " dB: " << r.failures << " failed trials\n";
}

// -------------------------------------------------------------------- ingest

struct IngestArgs {
  Common c;
  std::string raw;
};

void ingest(const IngestArgs& a, std::ostream& out) {
  const ComplexTensor t = ingest_adc(a.raw, a.c.config);
  const auto dir = out_dir(a.c.out);
  write_cten(dir / "tensor.cten", t);
  json m;
  m["version"] = 1;
  m["dims"] = dims_json(t.dims());
  m["source"] = fs::path(a.raw).filename().string();
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  out << "wrote " << (dir / "tensor.cten").string() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ttradar: FMCW MIMO radar tensor denoising and parameter estimation"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "synthesize clean and noisy CTEN1 tensors from a scenario");
  add_common(s, sim.c, true, "scenario JSON");
  s->add_option("--snr", sim.snr, "input SNR in dB (overrides the scenario)");

  DenoiseArgs dn;
  auto* d = app.add_subcommand("denoise", "denoise a CTEN1 tensor");
  add_common(d, dn.c, false, "scenario JSON (CPD rank defaults to its target count)");
  d->add_option("--in", dn.in, "input CTEN1 tensor")->required();
  d->add_option("--method", dn.method, "tt_mdl, cpd_als or cpd_recompress");
  d->add_option("--rank", dn.rank, "CPD rank");
  d->add_option("--extra-rank", dn.extra_rank, "over-rank for cpd_recompress");
  d->add_option("--epsilon", dn.epsilon, "relative tolerance of TT recompression");
  d->add_option("--max-iters", dn.max_iters, "ALS iteration cap");

  EstimateArgs es;
  auto* e = app.add_subcommand("estimate", "estimate range, velocity, azimuth and elevation");
  add_common(e, es.c, true, "scenario JSON (radar config; targets enable NMSE scoring)");
  e->add_option("--in", es.in, "input CTEN1 tensor")->required();
  e->add_option("--tt-ranks", es.tt_ranks, "TT ranks used to size the smoothing windows")->delimiter(',');
  e->add_option("--plan", es.plan, "explicit subarray sizes J1,J2,J3,J4")->delimiter(',');
  e->add_option("--rank", es.rank, "model order R");
  e->add_option("--route", es.route, "subspace route: auto, direct or gram");
  e->add_flag("--no-denoise", es.no_denoise, "skip TT-MDL and estimate on the input");

  ProfileArgs pr;
  auto* p = app.add_subcommand("profile", "range-Doppler and range-angle profiles as CSV grids");
  add_common(p, pr.c, true, "scenario JSON (radar config for the axes)");
  p->add_option("--in", pr.in, "input CTEN1 tensor")->required();
  p->add_option("--kind", pr.kind, "rd, ra-az, ra-el or all");
  p->add_option("--bins", pr.bins, "DFT length per axis");

  BenchArgs bn;
  auto* b = app.add_subcommand("bench", "Monte-Carlo benchmark of the denoising methods");
  add_common(b, bn.c, true, "benchmark JSON");
  b->add_option("--trials", bn.trials, "trials per grid point (overrides the benchmark file)");
  b->add_option("--methods", bn.methods, "methods (overrides the benchmark file)")->delimiter(',');
  b->add_flag("--no-timings", bn.no_timings, "write zero timings for byte-stable output");

  IngestArgs ig;
  auto* g = app.add_subcommand("ingest", "convert a raw int16 ADC capture to CTEN1");
  add_common(g, ig.c, true, "ADC sidecar JSON");
  g->add_option("--raw", ig.raw, "raw capture file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (s->parsed()) simulate(sim, out);
    if (d->parsed()) denoise(dn, out);
    if (e->parsed()) estimate_cmd(es, out);
    if (p->parsed()) profile_cmd(pr, out);
    if (b->parsed()) bench(bn, out);
    if (g->parsed()) ingest(ig, out);
  } catch (const NumericFailure& ex) {
    err << "numeric failure: " << ex.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace ttradar
