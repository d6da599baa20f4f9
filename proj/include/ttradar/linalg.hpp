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

#include <cstddef>
#include <vector>

#include "ttradar/tensor.hpp"

namespace ttradar {

// Thin SVD, A = U diag(sigma) V^H with sigma descending. The first nonzero
// entry of every column of U is real-positive; V carries the matching phase.
struct SvdResult {
  CMatrix U;
  RVector sigma;
  CMatrix V;
};

struct RealSvdResult {
  RMatrix U;
  RVector sigma;
  RMatrix V;
};

struct QrResult {
  CMatrix Q;  // orthonormal columns
  CMatrix R;  // upper triangular, real non-negative diagonal
};

struct EigResult {
  RVector values;  // descending
  CMatrix vectors;
};

SvdResult svd(const CMatrix& a);
RealSvdResult svd(const RMatrix& a);
SvdResult truncated_svd(const CMatrix& a, std::size_t k);
RealSvdResult truncated_svd(const RMatrix& a, std::size_t k);

QrResult qr(const CMatrix& a);

EigResult herm_eig(const CMatrix& a);

// Simultaneous Schur decomposition of real square matrices by Jacobi sweeps.
struct SsdResult {
  RMatrix Q;
  std::vector<RMatrix> Ts;  // Q^T M_k Q
  // eigen_tuples[r][k] = Ts[k](r, r)
  std::vector<std::vector<double>> eigen_tuples;
  bool converged = false;
  int sweeps = 0;
  double residual = 0.0;                  // summed squared strictly-lower mass
  std::vector<double> objective_history;  // residual after the Schur start and after each sweep
};

// Summed squared strictly-lower-triangular entries over all matrices.
double lower_mass(const std::vector<RMatrix>& ms);

// Converged when the lower mass drops to tol * sum ||M_k||_F^2, or when a full
// sweep finds no rotation that lowers it.
SsdResult ssd(const std::vector<RMatrix>& ms, double tol = 1e-24, int max_sweeps = 100);

}  // namespace ttradar
