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

#include "ttradar/adc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "ttradar/errors.hpp"

namespace ttradar {

namespace {

using nlohmann::json;

std::size_t positive(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 1)
    throw IngestError(std::string("sidecar: '") + key + "' must be a positive integer", 0);
  return j[key].get<std::size_t>();
}

}  // namespace

std::uint64_t AdcSidecar::frame_bytes() const {
  return std::uint64_t{4} * n_tx * n_rx * samples_per_chirp * chirps_per_frame;
}

AdcSidecar read_sidecar(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IngestError("cannot open sidecar " + path.string(), 0);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw IngestError(std::string("sidecar: ") + e.what(), e.byte);
  }
  AdcSidecar sc;
  sc.version = j.value("version", 1);
  if (sc.version != 1) throw IngestError("sidecar: unsupported version " + std::to_string(sc.version), 0);
  sc.n_tx = positive(j, "n_tx");
  sc.n_rx = positive(j, "n_rx");
  sc.samples_per_chirp = positive(j, "samples_per_chirp");
  sc.chirps_per_frame = positive(j, "chirps_per_frame");
  if (!j.contains("frame_index") || !j["frame_index"].is_number_integer() || j["frame_index"].get<long long>() < 0)
    throw IngestError("sidecar: 'frame_index' must be a non-negative integer", 0);
  sc.frame_index = j["frame_index"].get<std::size_t>();
  sc.iq_order = j.value("iq_order", std::string("IQ"));
  if (sc.iq_order != "IQ" && sc.iq_order != "QI")
    throw IngestError("sidecar: unknown iq_order '" + sc.iq_order + "'", 0);
  sc.scale = j.value("scale", 1.0);
  if (!(sc.scale > 0)) throw IngestError("sidecar: scale must be > 0", 0);
  return sc;
}

void write_sidecar(const std::filesystem::path& path, const AdcSidecar& sc) {
  json j = {{"version", sc.version},
            {"n_tx", sc.n_tx},
            {"n_rx", sc.n_rx},
            {"samples_per_chirp", sc.samples_per_chirp},
            {"chirps_per_frame", sc.chirps_per_frame},
            {"frame_index", sc.frame_index},
            {"iq_order", sc.iq_order},
            {"scale", sc.scale}};
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot open " + path.string() + " for writing");
  f << j.dump(2) << "\n";
}

ComplexTensor ingest_adc(const std::filesystem::path& raw_path, const std::filesystem::path& sidecar_path) {
  const AdcSidecar sc = read_sidecar(sidecar_path);
  std::ifstream f(raw_path, std::ios::binary | std::ios::ate);
  if (!f) throw IngestError("cannot open raw file " + raw_path.string(), 0);
  const auto file_size = static_cast<std::uint64_t>(f.tellg());
  const std::uint64_t fb = sc.frame_bytes();
  const std::uint64_t start = fb * sc.frame_index;
  if (file_size < start + fb)
    throw IngestError("raw file truncated: frame " + std::to_string(sc.frame_index) + " needs bytes [" +
                          std::to_string(start) + ", " + std::to_string(start + fb) + ")",
                      std::min(file_size, start + fb));

  std::vector<std::int16_t> raw(fb / 2);
  f.seekg(static_cast<std::streamoff>(start));
  f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(fb));
  if (!f) throw IngestError("short read", start + static_cast<std::uint64_t>(f.gcount()));

  const bool iq = sc.iq_order == "IQ";
  const std::size_t nv = sc.n_tx * sc.n_rx, ns = sc.samples_per_chirp, nc = sc.chirps_per_frame;
  ComplexTensor t({nv, 1, ns, nc});
  std::size_t p = 0;
  for (std::size_t blk = 0; blk < nc; ++blk)
    for (std::size_t tx = 0; tx < sc.n_tx; ++tx)
      for (std::size_t rx = 0; rx < sc.n_rx; ++rx)
        for (std::size_t s = 0; s < ns; ++s, p += 2) {
          const double a = raw[p], b = raw[p + 1];
          const cplx v = iq ? cplx(a, b) : cplx(b, a);
          t({tx * sc.n_rx + rx, 0, s, blk}) = sc.scale * v;
        }
  return t;
}

void export_adc(const ComplexTensor& t, const AdcSidecar& sc, const std::filesystem::path& raw_path,
                const std::filesystem::path& sidecar_path) {
  const std::size_t nv = sc.n_tx * sc.n_rx;
  if (t.dims() != Dims{nv, 1, sc.samples_per_chirp, sc.chirps_per_frame})
    throw InvalidArgument("export_adc: tensor dims do not match the sidecar geometry");
  if (sc.iq_order != "IQ" && sc.iq_order != "QI") throw InvalidArgument("export_adc: unknown iq_order");
  auto q = [&](double v) {
    const double r = std::round(v / sc.scale);
    return static_cast<std::int16_t>(std::clamp(r, -32768.0, 32767.0));
  };
  const bool iq = sc.iq_order == "IQ";
  std::vector<std::int16_t> frame(sc.frame_bytes() / 2);
  std::size_t p = 0;
  for (std::size_t blk = 0; blk < sc.chirps_per_frame; ++blk)
    for (std::size_t tx = 0; tx < sc.n_tx; ++tx)
      for (std::size_t rx = 0; rx < sc.n_rx; ++rx)
        for (std::size_t s = 0; s < sc.samples_per_chirp; ++s, p += 2) {
          const cplx v = t({tx * sc.n_rx + rx, 0, s, blk});
          frame[p] = q(iq ? v.real() : v.imag());
          frame[p + 1] = q(iq ? v.imag() : v.real());
        }
  std::ofstream f(raw_path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open " + raw_path.string() + " for writing");
  const std::vector<char> zeros(sc.frame_bytes(), 0);
  for (std::size_t k = 0; k < sc.frame_index; ++k) f.write(zeros.data(), static_cast<std::streamsize>(zeros.size()));
  f.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(sc.frame_bytes()));
  write_sidecar(sidecar_path, sc);
}

}  // namespace ttradar
