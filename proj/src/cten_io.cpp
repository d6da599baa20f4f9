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

#include "ttradar/cten_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "ttradar/errors.hpp"

namespace ttradar {

namespace {

static_assert(std::endian::native == std::endian::little,
              "CTEN1 encoding assumes a little-endian host");

constexpr char kMagic[4] = {'C', 'T', 'E', 'N'};
constexpr std::uint8_t kVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw InvalidArgument("CTEN1: truncated at byte " + std::to_string(pos));
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_cten(const ComplexTensor& t) {
  if (t.order() == 0 || t.order() > 255) throw InvalidArgument("CTEN1: order must be in [1, 255]");
  std::vector<std::uint8_t> out;
  out.reserve(6 + 4 * t.order() + 16 * t.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put<std::uint8_t>(out, kVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(t.order()));
  for (auto d : t.dims()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("CTEN1: dim exceeds u32");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  }
  for (const auto& v : t.data()) {
    put<double>(out, v.real());
    put<double>(out, v.imag());
  }
  return out;
}

ComplexTensor decode_cten(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 6 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw InvalidArgument("CTEN1: bad magic");
  std::size_t pos = 4;
  const auto version = get<std::uint8_t>(bytes, pos);
  if (version != kVersion) throw InvalidArgument("CTEN1: unsupported version " + std::to_string(version));
  const auto order = get<std::uint8_t>(bytes, pos);
  if (order == 0) throw InvalidArgument("CTEN1: order 0");
  Dims dims(order);
  for (auto& d : dims) d = get<std::uint32_t>(bytes, pos);
  const std::size_t n = product(dims);
  if (bytes.size() - pos != 16 * n)
    throw InvalidArgument("CTEN1: payload is " + std::to_string(bytes.size() - pos) +
                          " bytes, expected " + std::to_string(16 * n));
  std::vector<cplx> data(n);
  for (auto& v : data) {
    const double re = get<double>(bytes, pos);
    const double im = get<double>(bytes, pos);
    v = {re, im};
  }
  return ComplexTensor(std::move(dims), std::move(data));
}

void write_cten(const std::filesystem::path& path, const ComplexTensor& t) {
  const auto bytes = encode_cten(t);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw InvalidArgument("write failed: " + path.string());
}

ComplexTensor read_cten(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_cten(bytes);
}

}  // namespace ttradar
