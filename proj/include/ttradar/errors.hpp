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
#include <stdexcept>
#include <string>

namespace ttradar {

// Shape, range or contract violation by the caller.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A scenario violates a physical invariant (aliasing, non-positive range).
class ScenarioInvalid : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// A smoothing plan does not fit the tensor it is applied to.
class PlanInvalid : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// A numerical routine failed to converge or produced an inconsistent result.
class NumericFailure : public std::runtime_error {
 public:
  explicit NumericFailure(const std::string& what, long iterations = -1)
      : std::runtime_error(what), iterations_(iterations) {}

  long iterations() const noexcept { return iterations_; }

 private:
  long iterations_;
};

// Raw ADC ingestion failure. The byte offset points at the first byte that
// could not be consumed.
class IngestError : public std::runtime_error {
 public:
  IngestError(const std::string& what, std::uint64_t byte_offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::uint64_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::uint64_t byte_offset_;
};

}  // namespace ttradar
