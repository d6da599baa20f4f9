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
#include <iosfwd>
#include <vector>

#include "ttradar/tensor.hpp"

namespace ttradar {

// CTEN1 container: "CTEN", u8 version (1), u8 order, order x u32 LE dims,
// then interleaved LE float64 (re, im) in column-major element order.
std::vector<std::uint8_t> encode_cten(const ComplexTensor& t);
ComplexTensor decode_cten(const std::vector<std::uint8_t>& bytes);

void write_cten(const std::filesystem::path& path, const ComplexTensor& t);
ComplexTensor read_cten(const std::filesystem::path& path);

}  // namespace ttradar
