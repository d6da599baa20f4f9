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
#include <vector>

#include "ttradar/tensor.hpp"

namespace ttradar {

// Tensor train: cores[n] has dims [T_n, I_{n+1}, T_{n+1}] (0-based n) with
// ranks = [T_0 = 1, T_1, ..., T_N = 1].
struct TTModel {
  std::vector<ComplexTensor> cores;
  std::vector<std::size_t> ranks;

  std::size_t order() const { return cores.size(); }
  Dims dims() const;
  void validate() const;
};

// Sum of R rank-1 terms alpha_r u_{1,r} o ... o u_{N,r}.
struct CpdModel {
  CVector weights;
  std::vector<CMatrix> factors;

  std::size_t rank() const { return static_cast<std::size_t>(weights.size()); }
  Dims dims() const;
  void validate() const;
};

// ------------------------------------------------------------------- MDL

enum class MdlVariant {
  Classical,  // geometric mean over the M - t trailing eigenvalues
  Printed,    // exponent 1/M on every trailing eigenvalue
};

struct MdlDiagnostics {
  RVector eigenvalues;  // descending, floored
  std::vector<double> curve;  // MDL(t), t = 0 .. size - 1
  std::size_t rank = 0;
  std::size_t variables = 0;  // M after orientation
  std::size_t snapshots = 0;  // N after orientation
  bool transposed = false;
  bool degenerate = false;  // all-zero input
};

struct MdlResult {
  std::size_t rank = 0;
  MdlDiagnostics diag;
};

// Rank of the dominant subspace of C by minimum description length. C is
// centered by subtracting its mean column; when C has more rows than columns
// it is transposed first so that variables <= snapshots.
MdlResult mdl_rank(const CMatrix& c, MdlVariant variant = MdlVariant::Classical);

// ---------------------------------------------------------------- TT-SVD

struct TtMdlResult {
  TTModel model;
  ComplexTensor denoised;
  std::vector<MdlDiagnostics> mdl;        // one per sweep
  std::vector<double> truncation_energy;  // ||E_n||_F^2 per sweep
  std::vector<std::string> warnings;
  bool empty_signal = false;
};

struct TtMdlOptions {
  MdlVariant variant = MdlVariant::Classical;
};

TtMdlResult tt_mdl(const ComplexTensor& y, const TtMdlOptions& opts = {});

// TT-SVD with prescribed bond ranks T_1..T_{N-1}, capped by the unfolding size.
TtMdlResult tt_svd(const ComplexTensor& y, const std::vector<std::size_t>& bond_ranks);

// ------------------------------------------------------------------ CPD

struct CpdAlsOptions {
  std::size_t max_iters = 500;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  std::size_t restarts = 5;
  std::size_t restart_iters = 15;
};

struct CpdAlsResult {
  CpdModel model;
  std::vector<double> residual_history;  // ||Y - X||_F / ||Y||_F per iteration
  std::size_t iterations = 0;
  bool converged = false;
  bool regularized = false;  // a ridge was added to ill-conditioned normal equations
  std::size_t best_start = 0;
};

CpdAlsResult cpd_als(const ComplexTensor& y, std::size_t rank, const CpdAlsOptions& opts = {});

// Exact TT representation of a CPD with ranks min(R^n, R^{N-n}). N >= 3.
TTModel cpd_to_tt(const CpdModel& m);

// Left-orthogonalize with QR, then truncate right to left. Each bond keeps the
// fewest singular values whose discarded tail is <= epsilon * ||sigma||.
TTModel tt_recompress(const TTModel& model, double epsilon);

ComplexTensor reconstruct(const TTModel& model);
ComplexTensor reconstruct(const CpdModel& model);

// One entry by the product of lateral slices, 0-based index.
cplx tt_element(const TTModel& model, std::span<const std::size_t> index);

// Directory with manifest.json and one CTEN1 file per core or factor.
void save_model(const std::filesystem::path& dir, const TTModel& model);
void save_model(const std::filesystem::path& dir, const CpdModel& model);
TTModel load_tt_model(const std::filesystem::path& dir);
CpdModel load_cpd_model(const std::filesystem::path& dir);

}  // namespace ttradar
