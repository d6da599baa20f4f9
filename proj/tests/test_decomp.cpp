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

#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>

#include "test_util.hpp"
#include "ttradar/decomp.hpp"
#include "ttradar/errors.hpp"
#include "ttradar/linalg.hpp"
#include "ttradar/signal_sim.hpp"

using namespace ttradar;
using namespace ttradar::testing;

namespace {

CpdModel random_cpd(std::mt19937_64& g, const Dims& dims, std::size_t r) {
  CpdModel m;
  m.weights = rand_mat(g, static_cast<Eigen::Index>(r), 1);
  for (auto d : dims) m.factors.push_back(rand_mat(g, static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(r)));
  return m;
}

// Noiseless tensor of R targets with generators drawn uniformly on the circle.
ComplexTensor vandermonde_cpd(std::mt19937_64& g, const Dims& dims, std::size_t r) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  CpdModel m;
  m.weights = rand_mat(g, static_cast<Eigen::Index>(r), 1);
  for (auto d : dims) {
    CMatrix f(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(r));
    for (std::size_t k = 0; k < r; ++k) f.col(static_cast<Eigen::Index>(k)) = steering_vector(u(g), d, 0);
    m.factors.push_back(f);
  }
  return reconstruct(m);
}

CMatrix noise_mat(std::mt19937_64& g, Eigen::Index m, Eigen::Index n) { return rand_mat(g, m, n) / std::sqrt(2.0); }

}  // namespace

TEST(Mdl, RankOneAt40dB) {
  std::mt19937_64 g(1);
  const CMatrix s = rand_mat(g, 8, 1) * rand_mat(g, 1, 256) / std::sqrt(2.0);
  const CMatrix c = s + 0.01 * noise_mat(g, 8, 256);
  EXPECT_EQ(mdl_rank(c).rank, 1u);
}

TEST(Mdl, PureNoiseGivesZero) {
  std::mt19937_64 g(2);
  int zero = 0;
  for (int t = 0; t < 200; ++t) zero += mdl_rank(noise_mat(g, 8, 256)).rank == 0;
  EXPECT_GE(zero, 190);
}

TEST(Mdl, ThreeSourcesAt20dB) {
  std::mt19937_64 g(3);
  const CMatrix a = qr(rand_mat(g, 8, 3)).Q * std::sqrt(8.0);
  const CMatrix s = a * noise_mat(g, 3, 256);
  const CMatrix c = s + 0.1 * noise_mat(g, 8, 256);
  auto r = mdl_rank(c);
  EXPECT_EQ(r.rank, 3u);
  const auto it = std::min_element(r.diag.curve.begin(), r.diag.curve.end());
  EXPECT_EQ(static_cast<std::size_t>(it - r.diag.curve.begin()), r.rank);
  for (Eigen::Index i = 1; i < r.diag.eigenvalues.size(); ++i)
    EXPECT_GE(r.diag.eigenvalues(i - 1), r.diag.eigenvalues(i));
}

TEST(Mdl, ZeroMatrixIsDegenerate) {
  auto r = mdl_rank(CMatrix::Zero(4, 10));
  EXPECT_EQ(r.rank, 0u);
  EXPECT_TRUE(r.diag.degenerate);
  EXPECT_THROW(mdl_rank(CMatrix::Zero(4, 1)), InvalidArgument);
}

TEST(Mdl, TallInputIsTransposed) {
  std::mt19937_64 g(4);
  const CMatrix c = (rand_mat(g, 1, 128).transpose() * rand_mat(g, 1, 6)) + 0.01 * noise_mat(g, 128, 6);
  auto r = mdl_rank(c);
  EXPECT_TRUE(r.diag.transposed);
  EXPECT_EQ(r.diag.variables, 6u);
  EXPECT_EQ(r.rank, 1u);
}

TEST(Mdl, PrintedVariantIsSelectable) {
  std::mt19937_64 g(5);
  const CMatrix c = rand_mat(g, 8, 1) * rand_mat(g, 1, 256) + 0.01 * noise_mat(g, 8, 256);
  auto a = mdl_rank(c, MdlVariant::Classical), b = mdl_rank(c, MdlVariant::Printed);
  EXPECT_EQ(a.diag.curve.size(), b.diag.curve.size());
  EXPECT_NE(a.diag.curve[2], b.diag.curve[2]);
}

TEST(TtMdl, SingleTargetRankOne) {
  auto cfg = RadarConfig::desk();
  cfg.range_zone = 2;
  auto y = synthesize(cfg, {{24.0, 12.0, 0.3, 0.9, {1.0, 0.0}}});
  auto r = tt_mdl(y);
  EXPECT_EQ(r.model.ranks, (std::vector<std::size_t>{1, 1, 1, 1, 1}));
  EXPECT_LE(relative_error(r.denoised, y), 1e-10);
}

TEST(TtMdl, TwoGenericTargets) {
  auto cfg = RadarConfig::desk();
  cfg.range_zone = 2;
  auto y = synthesize(cfg, {{23.0, 5.0, 0.3, 0.6, {1.0, 0.2}}, {25.0, -7.0, -0.4, 0.9, {0.5, -0.1}}});
  auto r = tt_mdl(y);
  EXPECT_EQ(r.model.ranks, (std::vector<std::size_t>{1, 2, 2, 2, 1}));
  EXPECT_LE(relative_error(r.denoised, y), 1e-10);
  for (std::size_t n = 0; n + 1 < 4; ++n) {
    const CMatrix l = r.model.cores[n].as_matrix(r.model.ranks[n] * r.model.cores[n].dims()[1], r.model.ranks[n + 1]);
    EXPECT_LE((l.adjoint() * l - CMatrix::Identity(l.cols(), l.cols())).norm(), 1e-12);
  }
}

TEST(TtMdl, TheoremTwoRanks) {
  std::mt19937_64 g(6);
  const Dims dims = {4, 4, 16, 8};
  int hits = 0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t r = 2 + t % 2;
    auto res = tt_mdl(vandermonde_cpd(g, dims, r));
    hits += res.model.ranks == std::vector<std::size_t>{1, r, r, r, 1};
  }
  EXPECT_GE(hits, 20);
}

TEST(TtMdl, EnergyBookkeepingAndPhaseInvariance) {
  auto cfg = RadarConfig::desk();
  cfg.range_zone = 2;
  auto clean = synthesize(cfg, {{24.0, 12.0, 17.5 * std::numbers::pi / 180, 56.3 * std::numbers::pi / 180, 1.0},
                                {24.0, -13.0, -36.8 * std::numbers::pi / 180, 36.9 * std::numbers::pi / 180, 0.6}});
  for (double snr : {-10.0, 0.0, 10.0}) {
    auto y = add_noise(clean, {snr, 7}).noisy;
    auto r = tt_mdl(y);
    double e = 0;
    for (double v : r.truncation_energy) e += v;
    EXPECT_NEAR(y.squared_norm(), r.denoised.squared_norm() + e, 1e-8 * y.squared_norm());
    EXPECT_LE((r.denoised - clean).norm(), (y - clean).norm());
    const cplx ph = std::polar(1.0, 0.7);
    auto rp = tt_mdl(ph * y);
    EXPECT_EQ(rp.model.ranks, r.model.ranks);
    EXPECT_LE(relative_error(rp.denoised, ph * r.denoised), 1e-10);
  }
}

TEST(TtMdl, NoiseOnlyGivesEmptySignal) {
  std::mt19937_64 g(7);
  ComplexTensor w = rand_tensor(g, {8, 8, 16, 16});
  auto r = tt_mdl(w);
  EXPECT_TRUE(r.empty_signal);
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_EQ(r.denoised.squared_norm(), 0.0);
  EXPECT_NEAR(r.truncation_energy[0], w.squared_norm(), 1e-9 * w.squared_norm());
}

TEST(TtSvd, FixedRanks) {
  std::mt19937_64 g(8);
  auto y = rand_tensor(g, {3, 4, 5});
  auto full = tt_svd(y, {3, 5});
  EXPECT_LE(relative_error(full.denoised, y), 1e-12);
  auto cut = tt_svd(y, {1, 1});
  EXPECT_EQ(cut.model.ranks, (std::vector<std::size_t>{1, 1, 1, 1}));
}

TEST(CpdToTt, RankOne) {
  std::mt19937_64 g(9);
  auto m = random_cpd(g, {3, 4, 5, 2}, 1);
  auto tt = cpd_to_tt(m);
  EXPECT_EQ(tt.ranks, (std::vector<std::size_t>{1, 1, 1, 1, 1}));
  EXPECT_LE(relative_error(reconstruct(tt), reconstruct(m)), 1e-12);
}

TEST(CpdToTt, RanksAndExactness) {
  std::mt19937_64 g(10);
  auto m4 = random_cpd(g, {3, 4, 5, 6}, 2);
  auto tt4 = cpd_to_tt(m4);
  EXPECT_EQ(tt4.ranks, (std::vector<std::size_t>{1, 2, 4, 2, 1}));
  EXPECT_LE(relative_error(reconstruct(tt4), reconstruct(m4)), 1e-12);
  auto m3 = random_cpd(g, {3, 4, 5}, 3);
  auto tt3 = cpd_to_tt(m3);
  EXPECT_EQ(tt3.ranks, (std::vector<std::size_t>{1, 3, 3, 1}));
  EXPECT_LE(relative_error(reconstruct(tt3), reconstruct(m3)), 1e-12);
  auto m5 = random_cpd(g, {2, 3, 2, 3, 2}, 2);
  auto tt5 = cpd_to_tt(m5);
  EXPECT_EQ(tt5.ranks, (std::vector<std::size_t>{1, 2, 4, 4, 2, 1}));
  EXPECT_LE(relative_error(reconstruct(tt5), reconstruct(m5)), 1e-12);
}

TEST(CpdToTt, StructureCoreIsReshapedIdentity) {
  // With U_n = I_R the core for 1 < n < nbar is reshape(I_{R^n}, [R^{n-1}, R, R^n]).
  const std::size_t r = 2;
  std::mt19937_64 g(11);
  auto m = random_cpd(g, {3, 2, 3, 3, 3}, r);
  m.factors[1] = CMatrix::Identity(2, 2);
  auto tt = cpd_to_tt(m);
  ComplexTensor id = ComplexTensor::from_matrix(CMatrix::Identity(4, 4));
  EXPECT_EQ(tt.cores[1], reshape(id, {2, 2, 4}));
}

TEST(CpdToTt, LinearInWeights) {
  std::mt19937_64 g(12);
  auto m = random_cpd(g, {3, 3, 4, 2}, 2);
  auto m2 = m;
  m2.weights *= cplx(2.5, -1.0);
  EXPECT_LE(relative_error(reconstruct(cpd_to_tt(m2)), cplx(2.5, -1.0) * reconstruct(cpd_to_tt(m))), 1e-12);
}

TEST(Reconstruct, AllOnesCores) {
  TTModel tt;
  tt.ranks = {1, 2, 2, 1};
  tt.cores = {ComplexTensor({1, 3, 2}), ComplexTensor({2, 4, 2}), ComplexTensor({2, 2, 1})};
  for (auto& c : tt.cores)
    for (auto& v : c.data()) v = 1.0;
  auto x = reconstruct(tt);
  for (const auto& v : x.data()) EXPECT_EQ(v, cplx(4.0));
}

TEST(Reconstruct, ChainMatchesElementwiseSlices) {
  std::mt19937_64 g(13);
  TTModel tt;
  tt.ranks = {1, 3, 2, 4, 1};
  const Dims d = {3, 4, 5, 2};
  for (std::size_t n = 0; n < 4; ++n) tt.cores.push_back(rand_tensor(g, {tt.ranks[n], d[n], tt.ranks[n + 1]}));
  auto x = reconstruct(tt);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  for (int k = 0; k < 100; ++k) {
    const Dims idx = IndexMap::unravel(d, pick(g));
    EXPECT_LE(std::abs(tt_element(tt, idx) - x.at(idx)), 1e-12 * x.norm());
  }
  // The contraction chain G_1 x G_2 x G_3 x G_4 gives the same tensor.
  ComplexTensor c = reshape(tt.cores[0], {3, 3});
  c = contract(c, tt.cores[1], 2, 1);
  c = contract(c, tt.cores[2], 3, 1);
  c = contract(c, reshape(tt.cores[3], {4, 2}), 4, 1);
  EXPECT_LE(relative_error(c, x), 1e-12);
}

TEST(TtRecompress, MinimalUnchanged) {
  std::mt19937_64 g(14);
  auto y = vandermonde_cpd(g, {4, 4, 8, 6}, 2);
  auto tt = tt_mdl(y).model;
  auto rc = tt_recompress(tt, 0.0);
  EXPECT_EQ(rc.ranks, tt.ranks);
  EXPECT_LE(relative_error(reconstruct(rc), y), 1e-12);
}

TEST(TtRecompress, CpdToTtDropsToTheoremTwo) {
  std::mt19937_64 g(15);
  auto m = random_cpd(g, {4, 4, 8, 6}, 2);
  auto rc = tt_recompress(cpd_to_tt(m), 1e-10);
  EXPECT_EQ(rc.ranks, (std::vector<std::size_t>{1, 2, 2, 2, 1}));
  EXPECT_EQ(rc.ranks, tt_mdl(reconstruct(m)).model.ranks);
  EXPECT_LE(relative_error(reconstruct(rc), reconstruct(m)), 1e-9);
}

TEST(TtRecompress, InflatedRanksRecovered) {
  std::mt19937_64 g(16);
  TTModel tt;
  tt.ranks = {1, 2, 3, 2, 1};
  const Dims d = {4, 5, 6, 4};
  for (std::size_t n = 0; n < 4; ++n) tt.cores.push_back(rand_tensor(g, {tt.ranks[n], d[n], tt.ranks[n + 1]}));
  // Duplicate every bond: G_n -> [G_n 0; 0 G_n] style padding with zero blocks
  // and a mixing that keeps the tensor unchanged.
  TTModel big;
  big.ranks = {1, 4, 6, 4, 1};
  for (std::size_t n = 0; n < 4; ++n) {
    const std::size_t a = tt.ranks[n], b = tt.ranks[n + 1];
    const std::size_t A = big.ranks[n], B = big.ranks[n + 1];
    ComplexTensor c({A, d[n], B});
    for (std::size_t i = 0; i < d[n]; ++i)
      for (std::size_t p = 0; p < a; ++p)
        for (std::size_t q = 0; q < b; ++q) {
          const cplx v = tt.cores[n]({p, i, q});
          if (n == 0) {
            c({0, i, q}) = 0.5 * v;
            c({0, i, q + b}) = 0.5 * v;
          } else if (n == 3) {
            c({p, i, 0}) = v;
            c({p + a, i, 0}) = v;
          } else {
            c({p, i, q}) = v;
            c({p + a, i, q + b}) = v;
          }
        }
    big.cores.push_back(std::move(c));
  }
  ASSERT_LE(relative_error(reconstruct(big), reconstruct(tt)), 1e-12);
  auto rc = tt_recompress(big, 1e-12);
  EXPECT_EQ(rc.ranks, tt.ranks);
  EXPECT_LE(relative_error(reconstruct(rc), reconstruct(tt)), 1e-10);
}

TEST(TtRecompress, ErrorBound) {
  std::mt19937_64 g(17);
  auto y = rand_tensor(g, {4, 5, 6, 3});
  auto tt = tt_svd(y, {4, 18, 3}).model;
  ASSERT_LE(relative_error(reconstruct(tt), y), 1e-12);
  for (double eps : {0.05, 0.2, 0.5}) {
    auto rc = tt_recompress(tt, eps);
    for (std::size_t n = 0; n < rc.ranks.size(); ++n) EXPECT_LE(rc.ranks[n], tt.ranks[n]);
    EXPECT_LE((reconstruct(rc) - y).norm(), eps * y.norm() * std::sqrt(3.0) + 1e-12);
  }
}

TEST(CpdAls, ExactTensorRecovered) {
  std::mt19937_64 g(18);
  auto m = random_cpd(g, {4, 5, 6, 3}, 2);
  auto y = reconstruct(m);
  auto r = cpd_als(y, 2, {.max_iters = 1000, .tol = 1e-14, .seed = 3});
  EXPECT_LE(relative_error(reconstruct(r.model), y), 1e-8);
  for (std::size_t k = 1; k < r.residual_history.size(); ++k)
    EXPECT_LE(r.residual_history[k], r.residual_history[k - 1] + 1e-12);
  for (const auto& f : r.model.factors)
    for (Eigen::Index c = 0; c < f.cols(); ++c) EXPECT_NEAR(f.col(c).norm(), 1.0, 1e-12);
}

TEST(CpdAls, RankOneFast) {
  std::mt19937_64 g(19);
  auto m = random_cpd(g, {4, 5, 6}, 1);
  auto y = reconstruct(m);
  auto r = cpd_als(y, 1, {.max_iters = 10, .tol = 1e-13, .seed = 1, .restarts = 1});
  EXPECT_LE(r.iterations, 10u);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(relative_error(reconstruct(r.model), y), 1e-10);
}

TEST(CpdAls, OverRankIsRegularizedNotFatal) {
  std::mt19937_64 g(20);
  auto y = reconstruct(random_cpd(g, {3, 3, 3}, 1));
  auto r = cpd_als(y, 4, {.max_iters = 50, .tol = 1e-14, .seed = 2});
  EXPECT_TRUE(r.regularized);
  EXPECT_LE(relative_error(reconstruct(r.model), y), 1e-6);
}

TEST(CpdAls, ReportedResidualMatchesReconstruction) {
  std::mt19937_64 g(21);
  auto y = reconstruct(random_cpd(g, {4, 5, 6, 3}, 2));
  const double scale = y.norm() / std::sqrt(static_cast<double>(y.size()));
  ComplexTensor n(y.dims());
  const CMatrix e = noise_mat(g, static_cast<Eigen::Index>(y.size()), 1);
  for (std::size_t i = 0; i < y.size(); ++i) n.data()[i] = 0.3 * scale * e(static_cast<Eigen::Index>(i));
  const ComplexTensor yn = y + n;
  auto r = cpd_als(yn, 2, {.max_iters = 40, .tol = 0.0, .seed = 5, .restarts = 1});
  EXPECT_NEAR(r.residual_history.back(), relative_error(reconstruct(r.model), yn), 1e-10);
  EXPECT_GT(r.residual_history.back(), 1e-3);
}

TEST(ModelIo, RoundTrip) {
  std::mt19937_64 g(21);
  auto dir = std::filesystem::temp_directory_path() / "ttradar_model_io";
  std::filesystem::remove_all(dir);
  auto m = random_cpd(g, {3, 4, 5}, 2);
  save_model(dir / "cpd", m);
  auto mb = load_cpd_model(dir / "cpd");
  EXPECT_EQ(reconstruct(mb), reconstruct(m));
  auto tt = cpd_to_tt(m);
  save_model(dir / "tt", tt);
  auto tb = load_tt_model(dir / "tt");
  EXPECT_EQ(tb.ranks, tt.ranks);
  EXPECT_EQ(reconstruct(tb), reconstruct(tt));
  EXPECT_THROW(load_tt_model(dir / "cpd"), InvalidArgument);
}
