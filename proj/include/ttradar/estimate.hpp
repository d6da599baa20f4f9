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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ttradar/signal_sim.hpp"
#include "ttradar/tensor.hpp"

namespace ttradar {

// ------------------------------------------------------------- smoothing

// Subarray sizes J_n = T_n per mode and shift counts L_n = I_n - T_n + 1.
struct SmoothingPlan {
  std::array<std::size_t, 4> sub_dims{};

  std::array<std::size_t, 4> shifts(const Dims& dims) const;
  std::size_t snapshots(const Dims& dims) const;  // J_5 = prod L_n
  std::size_t subarray_size() const;              // prod J_n
  void validate(const Dims& dims) const;

  // J_n = T_n for n = 1..3 and J_4 = T_3, each capped at I_n.
  static SmoothingPlan from_tt_ranks(const std::vector<std::size_t>& ranks, const Dims& dims);
  // J_n = I_n: no smoothing, one snapshot.
  static SmoothingPlan identity(const Dims& dims);
};

// 5-order [J_1, J_2, J_3, J_4, J_5]; block (l_1..l_4), l_1 fastest, is the
// window starting at (l_1 - 1, ..., l_4 - 1).
ComplexTensor spatial_smooth(const ComplexTensor& y, const SmoothingPlan& plan);

// ------------------------------------------------------------------- FBA

CMatrix exchange_matrix(std::size_t n);

// Left-Pi-real unitary matrix; J_n Q_n = conj(Q_n) for both parities.
CMatrix unitary_q(std::size_t n);

// Real tensor J_1 x J_2 x J_3 x J_4 x 2J_5 kept as its <4> unfolding.
struct FbaTensor {
  Dims dims;
  RMatrix unfolding;      // (prod J_n) x 2J_5
  double residue = 0.0;   // ||Im|| / ||.|| before the real cast
};

inline constexpr double kFbaResidueLimit = 1e-10;

FbaTensor fba(const ComplexTensor& y_ss);

// ------------------------------------------------------------- subspace

enum class SubspaceRoute { Auto, Direct, Gram };

// Orthonormal basis of the dominant R-dimensional column space of the real
// <4> unfolding; basis.col(r) is the vectorized J_1 x J_2 x J_3 x J_4 tensor
// G(:, :, :, :, r).
struct SignalSubspace {
  std::array<std::size_t, 4> sub_dims{};
  RMatrix basis;
  RVector sigma;  // all singular values of the <4> unfolding, descending
  bool rank_deficient = false;  // sigma_R <= 1e-8 sigma_1
  SubspaceRoute route = SubspaceRoute::Direct;
  double residue = 0.0;
};

SignalSubspace signal_subspace(const FbaTensor& yfb, std::size_t rank);

// Same subspace from the Gram matrix Q^H (C + Pi conj(C) Pi) Q with
// C = sum over windows of w w^H, streamed from y without forming y_ss.
SignalSubspace signal_subspace_gram(const ComplexTensor& y, const SmoothingPlan& plan, std::size_t rank);

// ------------------------------------------------------------- invariance

// K1 = Re{Q_{n-1}^H S1 Q_n}, K2 = Im{Q_{n-1}^H S1 Q_n}.
RMatrix invariance_k1(std::size_t n);
RMatrix invariance_k2(std::size_t n);

struct UpsilonSet {
  std::array<RMatrix, 4> upsilon;
  std::array<bool, 4> observable{};
  std::array<bool, 4> regularized{};
  std::array<double, 4> residual{};  // ||K1 E Y^T - K2 E|| / ||K2 E||
};

UpsilonSet solve_upsilon(const SignalSubspace& g);

struct JointEigs {
  // tuples[r][n] = lambda_n(r); 0 for unobservable modes.
  std::vector<std::array<double, 4>> tuples;
  bool converged = false;
  int sweeps = 0;
  double residual = 0.0;
};

JointEigs joint_eigs(const UpsilonSet& u);

// ------------------------------------------------------------- inversion

struct EstimatedTarget {
  double range_m = 0.0;
  double vel_mps = 0.0;
  double az_rad = 0.0;
  double el_rad = 0.0;
  SpatialFrequencies freqs;
  std::vector<std::string> flags;
};

struct EstimationDiagnostics {
  SmoothingPlan plan;
  std::size_t rank = 0;
  std::array<bool, 4> observable{};
  std::array<double, 4> upsilon_residual{};
  std::array<bool, 4> upsilon_regularized{};
  bool ssd_converged = false;
  int ssd_sweeps = 0;
  double ssd_residual = 0.0;
  bool rank_deficient = false;
  SubspaceRoute route = SubspaceRoute::Direct;
  double fba_residue = 0.0;
  std::vector<std::string> notes;
};

struct EstimationResult {
  std::vector<EstimatedTarget> targets;
  EstimationDiagnostics diagnostics;
  double smooth_ms = 0.0;
  double estimate_ms = 0.0;
};

// nu = arctan(lambda) / pi per mode, then the exact inverse of the simulator's
// frequency maps. eta gets cfg.range_zone added back.
EstimationResult invert_parameters(const JointEigs& eigs, const RadarConfig& cfg,
                                   const std::array<bool, 4>& observable = {true, true, true, true});

// Auto picks Direct when the unfolding is tall, or when it has at most
// direct_limit entries and fewer than 8x as many columns as rows; else Gram.
struct EstimateOptions {
  std::optional<SmoothingPlan> plan;
  std::optional<std::size_t> rank;
  SubspaceRoute route = SubspaceRoute::Auto;
  std::size_t direct_limit = std::size_t{1} << 23;  // max entries of the explicit FBA unfolding
};

// smooth -> fba -> subspace -> upsilon -> ssd -> invert. Without an explicit
// plan, tt_ranks = [1, T_1, T_2, T_3, 1] selects it.
EstimationResult estimate(const ComplexTensor& y, const RadarConfig& cfg, const std::vector<std::size_t>& tt_ranks,
                          const EstimateOptions& opts = {});

// ------------------------------------------------------------------ NMSE

// Sum of the four squared relative errors. A zero true value falls back to
// the absolute error for that term.
double nmse_term(const EstimatedTarget& est, const TargetParams& truth);

// Optimal assignment on a rectangular cost matrix; result[i] is the column
// for row i, or -1 when the row is left unassigned.
std::vector<int> hungarian(const RMatrix& cost);

inline constexpr double kUnmatchedPenalty = 4.0;

struct NmseResult {
  std::vector<double> per_target;  // indexed like truth
  std::vector<int> matched;        // estimate index per truth, -1 if none
  bool penalized = false;          // cardinality mismatch
  double mean() const;
};

NmseResult joint_nmse(const EstimationResult& est, const std::vector<TargetParams>& truth);

}  // namespace ttradar
