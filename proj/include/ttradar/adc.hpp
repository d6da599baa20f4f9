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
#include <string>

#include "ttradar/tensor.hpp"

namespace ttradar {

// JSON sidecar describing a raw capture of interleaved LE int16 I/Q pairs.
// Per frame the layout is chirp slot (block * n_tx + tx) -> rx -> sample.
// One TDM block holds n_tx chirp slots; chirps_per_frame counts blocks.
struct AdcSidecar {
  int version = 1;
  std::size_t n_tx = 1;
  std::size_t n_rx = 1;
  std::size_t samples_per_chirp = 1;
  std::size_t chirps_per_frame = 1;
  std::size_t frame_index = 0;
  std::string iq_order = "IQ";  // "IQ" or "QI"
  double scale = 1.0;           // volts (or any unit) per LSB

  std::uint64_t frame_bytes() const;
};

AdcSidecar read_sidecar(const std::filesystem::path& path);
void write_sidecar(const std::filesystem::path& path, const AdcSidecar& sc);

// Returns [n_tx * n_rx, 1, samples_per_chirp, chirps_per_frame] with virtual
// element index tx * n_rx + rx.
ComplexTensor ingest_adc(const std::filesystem::path& raw_path, const std::filesystem::path& sidecar_path);

// Writes frames 0..frame_index, the last holding `t` and the rest zero.
// Values are quantized to round(v / scale) and saturated to int16.
void export_adc(const ComplexTensor& t, const AdcSidecar& sc, const std::filesystem::path& raw_path,
                const std::filesystem::path& sidecar_path);

}  // namespace ttradar
