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

#include "ttradar/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "ttradar/cten_io.hpp"
#include "ttradar/errors.hpp"
#include "ttradar/linalg.hpp"
#include "ttradar/rng.hpp"

namespace ttradar {

namespace {

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

CMatrix core_left(const ComplexTensor& g) {
  return g.as_matrix(g.dims()[0] * g.dims()[1], g.dims()[2]);
}

CMatrix core_right(const ComplexTensor& g) {
  return g.as_matrix(g.dims()[0], g.dims()[1] * g.dims()[2]);
}

ComplexTensor tensor_from(const CMatrix& m, Dims dims) {
  return ComplexTensor(std::move(dims), std::vector<cplx>(m.data(), m.data() + m.size()));
}

}  // namespace

// ------------------------------------------------------------------ models

Dims TTModel::dims() const {
  Dims d;
  for (const auto& g : cores) d.push_back(g.dims()[1]);
  return d;
}

void TTModel::validate() const {
  if (cores.empty()) throw InvalidArgument("TTModel: no cores");
  if (ranks.size() != cores.size() + 1) throw InvalidArgument("TTModel: rank vector length must be N + 1");
  if (ranks.front() != 1 || ranks.back() != 1) throw InvalidArgument("TTModel: boundary ranks must be 1");
  for (std::size_t n = 0; n < cores.size(); ++n) {
    const auto& d = cores[n].dims();
    if (d.size() != 3 || d[0] != ranks[n] || d[2] != ranks[n + 1])
      throw InvalidArgument("TTModel: core " + std::to_string(n + 1) + " does not match the rank vector");
  }
}

Dims CpdModel::dims() const {
  Dims d;
  for (const auto& f : factors) d.push_back(static_cast<std::size_t>(f.rows()));
  return d;
}

void CpdModel::validate() const {
  if (factors.empty()) throw InvalidArgument("CpdModel: no factors");
  if (weights.size() < 1) throw InvalidArgument("CpdModel: rank must be >= 1");
  for (const auto& f : factors)
    if (f.cols() != weights.size() || f.rows() < 1)
      throw InvalidArgument("CpdModel: factor column count must equal the rank");
}

// --------------------------------------------------------------------- MDL

MdlResult mdl_rank(const CMatrix& c, MdlVariant variant) {
  if (c.cols() < 2) throw InvalidArgument("mdl_rank: C needs at least 2 columns");
  if (!c.allFinite()) throw InvalidArgument("mdl_rank: non-finite input");
  MdlResult out;
  auto& d = out.diag;
  d.transposed = c.rows() > c.cols();
  CMatrix x = d.transposed ? CMatrix(c.transpose()) : c;
  const auto m = x.rows(), n = x.cols();
  d.variables = static_cast<std::size_t>(m);
  d.snapshots = static_cast<std::size_t>(n);

  const CVector mean = x.rowwise().mean();
  x.colwise() -= mean;
  const Eigen::Index m_eff = std::min(m, n - 1);
  if (x.squaredNorm() == 0.0) {
    d.degenerate = true;
    d.eigenvalues = RVector::Zero(m_eff);
    return out;
  }

  const RVector sigma = Eigen::BDCSVD<CMatrix>(x).singularValues();
  RVector lam = sigma.head(m_eff).array().square() / static_cast<double>(n);
  const double floor = 1e-15 * lam(0);
  lam = lam.cwiseMax(floor);
  d.eigenvalues = lam;

  const double log_n = std::log(static_cast<double>(n));
  const double nn = static_cast<double>(n);
  d.curve.resize(static_cast<std::size_t>(m_eff));
  for (Eigen::Index k = 0; k < m_eff; ++k) {
    const Eigen::Index tail = m_eff - k;
    const auto seg = lam.segment(k, tail);
    const double log_sum = seg.array().log().sum();
    const double log_arith = std::log(seg.mean());
    const double log_geo = variant == MdlVariant::Classical ? log_sum / static_cast<double>(tail)
                                                            : log_sum / static_cast<double>(m_eff);
    const double kk = static_cast<double>(k);
    d.curve[static_cast<std::size_t>(k)] = -nn * static_cast<double>(tail) * (log_geo - log_arith) +
                                           0.5 * kk * (2.0 * static_cast<double>(m_eff) - kk) * log_n;
  }
  d.rank = static_cast<std::size_t>(std::min_element(d.curve.begin(), d.curve.end()) - d.curve.begin());
  out.rank = d.rank;
  return out;
}

// ----------------------------------------------------------------- TT-SVD

namespace {

TtMdlResult tt_sweep(const ComplexTensor& y, const std::vector<std::size_t>* fixed, const TtMdlOptions& opts) {
  const std::size_t order = y.order();
  if (order < 2) throw InvalidArgument("tt decomposition needs an order >= 2 tensor");
  const Dims& dims = y.dims();
  TtMdlResult res;
  res.model.ranks.assign(order + 1, 1);

  std::size_t rest = y.size() / dims[0];
  CMatrix c = y.as_matrix(dims[0], rest);
  for (std::size_t n = 0; n + 1 < order; ++n) {
    const std::size_t rows = static_cast<std::size_t>(c.rows());
    const std::size_t cols = static_cast<std::size_t>(c.cols());
    std::size_t t;
    if (fixed) {
      t = (*fixed)[n];
    } else {
      auto mdl = mdl_rank(c, opts.variant);
      t = mdl.rank;
      res.mdl.push_back(std::move(mdl.diag));
      if (t == 0 && n == 0) {
        res.empty_signal = true;
        res.warnings.push_back("MDL found no signal subspace in mode 1; returning the zero tensor");
        res.truncation_energy.push_back(y.squared_norm());
        res.model.cores.clear();
        for (std::size_t k = 0; k < order; ++k) res.model.cores.emplace_back(Dims{1, dims[k], 1});
        res.denoised = ComplexTensor(dims);
        return res;
      }
      if (t == 0) {
        res.warnings.push_back("MDL rank 0 in sweep " + std::to_string(n + 1) + "; truncated to rank 1");
        t = 1;
      }
    }
    t = std::max<std::size_t>(1, std::min({t, rows, cols}));
    const auto s = svd(c);
    const auto tt = static_cast<Eigen::Index>(t);
    res.truncation_energy.push_back(s.sigma.tail(s.sigma.size() - tt).squaredNorm());
    res.model.ranks[n + 1] = t;
    res.model.cores.push_back(tensor_from(s.U.leftCols(tt), {res.model.ranks[n], dims[n], t}));
    const CMatrix c0 = s.sigma.head(tt).asDiagonal() * s.V.leftCols(tt).adjoint();
    rest /= dims[n + 1];
    c = Eigen::Map<const CMatrix>(c0.data(), static_cast<Eigen::Index>(t * dims[n + 1]),
                                  static_cast<Eigen::Index>(rest));
  }
  res.model.cores.push_back(tensor_from(c, {res.model.ranks[order - 1], dims[order - 1], 1}));
  res.denoised = reconstruct(res.model);
  return res;
}

}  // namespace

TtMdlResult tt_mdl(const ComplexTensor& y, const TtMdlOptions& opts) { return tt_sweep(y, nullptr, opts); }

TtMdlResult tt_svd(const ComplexTensor& y, const std::vector<std::size_t>& bond_ranks) {
  if (bond_ranks.size() + 1 != y.order()) throw InvalidArgument("tt_svd: need N - 1 bond ranks");
  for (auto r : bond_ranks)
    if (r < 1) throw InvalidArgument("tt_svd: bond ranks must be >= 1");
  return tt_sweep(y, &bond_ranks, {});
}

// ----------------------------------------------------------- reconstruction

ComplexTensor reconstruct(const TTModel& model) {
  model.validate();
  const Dims d = model.dims();
  CMatrix acc = core_right(model.cores[0]);  // 1 x (I_1 T_1)
  std::size_t left = d[0];
  acc = Eigen::Map<const CMatrix>(acc.data(), static_cast<Eigen::Index>(left),
                                  static_cast<Eigen::Index>(model.ranks[1]));
  for (std::size_t n = 1; n < model.order(); ++n) {
    const CMatrix step = acc * core_right(model.cores[n]);  // left x (I_n T_n)
    left *= d[n];
    acc = Eigen::Map<const CMatrix>(step.data(), static_cast<Eigen::Index>(left),
                                    static_cast<Eigen::Index>(model.ranks[n + 1]));
  }
  return tensor_from(acc, d);
}

ComplexTensor reconstruct(const CpdModel& model) {
  model.validate();
  const std::size_t order = model.factors.size();
  if (order == 1) return tensor_from(model.factors[0] * model.weights, model.dims());
  CMatrix kr = model.factors[1];
  for (std::size_t n = 2; n < order; ++n) kr = khatri_rao(model.factors[n], kr);
  CMatrix x = CMatrix::Zero(model.factors[0].rows(), kr.rows());
  for (Eigen::Index k = 0; k < kr.cols(); ++k)
    x.noalias() += (model.factors[0].col(k) * model.weights(k)) * kr.col(k).transpose();
  return tensor_from(x, model.dims());
}

cplx tt_element(const TTModel& model, std::span<const std::size_t> index) {
  model.validate();
  if (index.size() != model.order()) throw InvalidArgument("tt_element: index order mismatch");
  CMatrix row = CMatrix::Ones(1, 1);
  for (std::size_t n = 0; n < model.order(); ++n) {
    const auto& g = model.cores[n];
    const auto& d = g.dims();
    if (index[n] >= d[1]) throw InvalidArgument("tt_element: index out of range");
    CMatrix slice(static_cast<Eigen::Index>(d[0]), static_cast<Eigen::Index>(d[2]));
    for (std::size_t b = 0; b < d[2]; ++b)
      for (std::size_t a = 0; a < d[0]; ++a)
        slice(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = g({a, index[n], b});
    row = row * slice;
  }
  return row(0, 0);
}

// ------------------------------------------------------------- CPD to TT

TTModel cpd_to_tt(const CpdModel& m) {
  m.validate();
  const std::size_t order = m.factors.size();
  if (order < 3) throw InvalidArgument("cpd_to_tt: order must be >= 3");
  const std::size_t r = m.rank();
  const std::size_t nbar = (order + 1) / 2;  // 1-based
  TTModel tt;
  tt.ranks.assign(order + 1, 1);
  for (std::size_t n = 1; n < order; ++n) tt.ranks[n] = std::min(ipow(r, n), ipow(r, order - n));

  for (std::size_t n = 1; n <= order; ++n) {
    const CMatrix& u = m.factors[n - 1];
    const std::size_t in = static_cast<std::size_t>(u.rows());
    const std::size_t tl = tt.ranks[n - 1], tr = tt.ranks[n];
    ComplexTensor g({tl, in, tr});
    // Each structure tensor has one unit entry per (a, r) pair; write U_n(:, r)
    // into the matching fiber.
    auto put = [&](std::size_t a, std::size_t col, std::size_t b, cplx scale) {
      for (std::size_t i = 0; i < in; ++i)
        g({a, i, b}) += scale * u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col));
    };
    if (n == 1 && n != nbar) {
      for (std::size_t k = 0; k < r; ++k) put(0, k, k, 1.0);
    } else if (n == order) {
      for (std::size_t k = 0; k < r; ++k) put(k, k, 0, 1.0);
    } else if (n < nbar) {
      const std::size_t stride = ipow(r, n - 1);
      for (std::size_t a = 0; a < tl; ++a)
        for (std::size_t k = 0; k < r; ++k) put(a, k, a + stride * k, 1.0);
    } else if (n == nbar) {
      // Superdiagonal of the order-N weight tensor reshaped to
      // [R^{nbar-1}, R, R^{N-nbar}].
      std::size_t left_step = 0, right_step = 0;
      for (std::size_t k = 0; k + 1 < nbar; ++k) left_step += ipow(r, k);
      for (std::size_t k = 0; k < order - nbar; ++k) right_step += ipow(r, k);
      for (std::size_t k = 0; k < r; ++k)
        put(k * left_step, k, k * right_step, m.weights(static_cast<Eigen::Index>(k)));
    } else {
      for (std::size_t b = 0; b < tr; ++b)
        for (std::size_t k = 0; k < r; ++k) put(k + r * b, k, b, 1.0);
    }
    tt.cores.push_back(std::move(g));
  }
  tt.validate();
  return tt;
}

// -------------------------------------------------------------- rounding

TTModel tt_recompress(const TTModel& model, double epsilon) {
  model.validate();
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw InvalidArgument("tt_recompress: epsilon must be in [0, 1)");
  TTModel tt = model;
  const std::size_t order = tt.order();
  const Dims d = tt.dims();

  // Left-orthogonalize cores 1..N-1.
  for (std::size_t n = 0; n + 1 < order; ++n) {
    const auto f = qr(core_left(tt.cores[n]));
    const std::size_t k = static_cast<std::size_t>(f.Q.cols());
    tt.cores[n] = tensor_from(f.Q, {tt.ranks[n], d[n], k});
    const CMatrix next = f.R * core_right(tt.cores[n + 1]);
    tt.ranks[n + 1] = k;
    tt.cores[n + 1] = tensor_from(next, {k, d[n + 1], tt.ranks[n + 2]});
  }

  // Truncate bonds right to left.
  for (std::size_t n = order - 1; n >= 1; --n) {
    const auto s = svd(core_right(tt.cores[n]));
    const double total = s.sigma.norm();
    Eigen::Index keep = s.sigma.size();
    for (Eigen::Index k = 1; k <= s.sigma.size(); ++k) {
      if (s.sigma.tail(s.sigma.size() - k).norm() <= epsilon * total) {
        keep = k;
        break;
      }
    }
    const std::size_t kk = static_cast<std::size_t>(keep);
    tt.cores[n] = tensor_from(s.V.leftCols(keep).adjoint(), {kk, d[n], tt.ranks[n + 1]});
    const CMatrix us = s.U.leftCols(keep) * s.sigma.head(keep).asDiagonal();
    const CMatrix prev = core_left(tt.cores[n - 1]) * us;
    tt.ranks[n] = kk;
    tt.cores[n - 1] = tensor_from(prev, {tt.ranks[n - 1], d[n - 1], kk});
  }
  tt.validate();
  return tt;
}

// -------------------------------------------------------------------- ALS

namespace {

struct Mttkrp {
  const ComplexTensor& y;

  // M(i, r) = sum over all other indices of Y(...) prod_{m != n} conj(U_m(i_m, r)).
  CMatrix operator()(const std::vector<CMatrix>& u, std::size_t n) const {
    const Dims& d = y.dims();
    const Eigen::Index r = u[0].cols();
    std::size_t left = 1, right = 1;
    for (std::size_t m = 0; m < n; ++m) left *= d[m];
    for (std::size_t m = n + 1; m < d.size(); ++m) right *= d[m];
    const auto in = static_cast<Eigen::Index>(d[n]);

    CMatrix kl = CMatrix::Ones(1, r);
    for (std::size_t m = 0; m < n; ++m) kl = khatri_rao(u[m], kl);
    CMatrix kr = CMatrix::Ones(1, r);
    for (std::size_t m = n + 1; m < d.size(); ++m) kr = khatri_rao(u[m], kr);

    // One pass over Y as (left I_n) x right, then the left factors per column.
    const auto li = static_cast<Eigen::Index>(left) * in;
    const CMatrix krc = kr.conjugate();
    CMatrix t = CMatrix::Zero(li, r);
    const cplx* src = y.data().data();
    for (std::size_t b = 0; b < right; ++b, src += li)
      for (Eigen::Index k = 0; k < r; ++k) {
        const cplx c = krc(static_cast<Eigen::Index>(b), k);
        cplx* dst = t.col(k).data();
        for (Eigen::Index a = 0; a < li; ++a) dst[a] += src[a] * c;
      }
    CMatrix out(in, r);
    for (Eigen::Index k = 0; k < r; ++k) {
      Eigen::Map<const CMatrix> tk(t.col(k).data(), static_cast<Eigen::Index>(left), in);
      out.col(k).noalias() = tk.transpose() * kl.col(k).conjugate();
    }
    return out;
  }
};

CMatrix random_factor(const CounterRng& rng, std::uint64_t& counter, Eigen::Index rows, Eigen::Index r) {
  CMatrix m(rows, r);
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto [a, b] = rng.normal_pair(counter++);
      m(i, j) = {a, b};
    }
  if (rows >= r) return qr(m).Q;
  return m.colwise().normalized();
}

struct AlsState {
  std::vector<CMatrix> u;
  CVector w;
  std::vector<double> history;
  bool regularized = false;
};

double residual(const ComplexTensor& y, const AlsState& s, double ynorm) {
  CpdModel m{s.w, s.u};
  return (reconstruct(m) - y).norm() / ynorm;
}

// ||Y - X||^2 = ||Y||^2 - 2 Re<Y, X> + ||X||^2 from the last-mode MTTKRP.
// Cancellation makes this unreliable for small residuals, so those are recomputed exactly.
double fast_residual(const ComplexTensor& y, const AlsState& s, const CMatrix& mlast, double ynorm) {
  const std::size_t order = s.u.size();
  const Eigen::Index r = s.w.size();
  CMatrix g = CMatrix::Ones(r, r);
  for (std::size_t m = 0; m < order; ++m) g = g.cwiseProduct(s.u[m].adjoint() * s.u[m]);
  const double xx = (s.w.adjoint() * g * s.w)(0, 0).real();
  const cplx yx = (mlast.cwiseProduct((s.u[order - 1] * s.w.asDiagonal()).conjugate())).sum();
  const double rel2 = (ynorm * ynorm - 2.0 * yx.real() + xx) / (ynorm * ynorm);
  if (rel2 < 1e-6) return residual(y, s, ynorm);
  return std::sqrt(rel2);
}

void als_iterate(const ComplexTensor& y, AlsState& s, std::size_t iters, double tol, double ynorm, bool* converged) {
  const Mttkrp mttkrp{y};
  const std::size_t order = s.u.size();
  const Eigen::Index r = s.u[0].cols();
  CMatrix mk;
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t n = 0; n < order; ++n) {
      CMatrix h = CMatrix::Ones(r, r);
      for (std::size_t m = 0; m < order; ++m)
        if (m != n) h = h.cwiseProduct((s.u[m].adjoint() * s.u[m]).conjugate());
      // Normal equations U_n H = M with H Hermitian positive semidefinite.
      mk = mttkrp(s.u, n);
      CMatrix hh = 0.5 * (h + h.adjoint());
      Eigen::SelfAdjointEigenSolver<CMatrix> es(hh, Eigen::EigenvaluesOnly);
      const double emax = es.eigenvalues().maxCoeff(), emin = es.eigenvalues().minCoeff();
      if (!(emin > 1e-12 * emax)) {
        hh += CMatrix::Identity(r, r) * (1e-10 * hh.trace().real());
        s.regularized = true;
      }
      const CMatrix un = hh.transpose().ldlt().solve(mk.transpose()).transpose();
      RVector norms = un.colwise().norm();
      for (Eigen::Index k = 0; k < r; ++k)
        if (norms(k) == 0.0) norms(k) = 1.0;
      s.u[n] = un * norms.cwiseInverse().asDiagonal();
      s.w = norms.cast<cplx>();
    }
    s.history.push_back(fast_residual(y, s, mk, ynorm));
    const std::size_t h = s.history.size();
    if (h >= 2 && std::abs(s.history[h - 2] - s.history[h - 1]) < tol) {
      if (converged) *converged = true;
      return;
    }
  }
}

}  // namespace

CpdAlsResult cpd_als(const ComplexTensor& y, std::size_t rank, const CpdAlsOptions& opts) {
  if (rank < 1) throw InvalidArgument("cpd_als: rank must be >= 1");
  if (y.order() < 2) throw InvalidArgument("cpd_als: order must be >= 2");
  const double ynorm = y.norm();
  CpdAlsResult out;
  const auto r = static_cast<Eigen::Index>(rank);
  if (ynorm == 0.0) {
    out.model.weights = CVector::Zero(r);
    for (auto dn : y.dims()) out.model.factors.push_back(CMatrix::Zero(static_cast<Eigen::Index>(dn), r));
    out.converged = true;
    return out;
  }

  const CounterRng rng(opts.seed);
  std::uint64_t counter = 0;
  std::vector<AlsState> starts;
  const std::size_t nstarts = std::max<std::size_t>(1, opts.restarts);
  for (std::size_t k = 0; k < nstarts; ++k) {
    AlsState s;
    for (auto dn : y.dims()) s.u.push_back(random_factor(rng, counter, static_cast<Eigen::Index>(dn), r));
    s.w = CVector::Ones(r);
    if (nstarts > 1) als_iterate(y, s, std::min(opts.restart_iters, opts.max_iters), opts.tol, ynorm, nullptr);
    starts.push_back(std::move(s));
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < starts.size(); ++k)
    if (starts[k].history.back() < starts[best].history.back()) best = k;

  AlsState s = std::move(starts[best]);
  const std::size_t used = s.history.size();
  bool converged = false;
  if (used < opts.max_iters) als_iterate(y, s, opts.max_iters - used, opts.tol, ynorm, &converged);
  if (!converged && used >= 2 && std::abs(s.history[used - 2] - s.history[used - 1]) < opts.tol) converged = true;

  out.model = CpdModel{s.w, s.u};
  out.residual_history = std::move(s.history);
  out.iterations = out.residual_history.size();
  out.converged = converged;
  out.regularized = s.regularized;
  out.best_start = best;
  return out;
}

// --------------------------------------------------------------------- IO

namespace {

using nlohmann::json;

json read_manifest(const std::filesystem::path& dir, const std::string& format) {
  std::ifstream f(dir / "manifest.json");
  if (!f) throw InvalidArgument("missing manifest.json in " + dir.string());
  json j = json::parse(f);
  if (j.value("format", std::string()) != format)
    throw InvalidArgument("manifest format is not '" + format + "'");
  return j;
}

void write_manifest(const std::filesystem::path& dir, const json& j) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / "manifest.json");
  if (!f) throw InvalidArgument("cannot write manifest in " + dir.string());
  f << j.dump(2) << "\n";
}

}  // namespace

void save_model(const std::filesystem::path& dir, const TTModel& model) {
  model.validate();
  write_manifest(dir, {{"version", 1}, {"format", "ttm1"}, {"ranks", model.ranks}, {"dims", model.dims()}});
  for (std::size_t n = 0; n < model.order(); ++n)
    write_cten(dir / ("core_" + std::to_string(n + 1) + ".cten"), model.cores[n]);
}

void save_model(const std::filesystem::path& dir, const CpdModel& model) {
  model.validate();
  write_manifest(dir, {{"version", 1}, {"format", "cpd1"}, {"R", model.rank()}, {"dims", model.dims()}});
  for (std::size_t n = 0; n < model.factors.size(); ++n)
    write_cten(dir / ("factor_" + std::to_string(n + 1) + ".cten"), ComplexTensor::from_matrix(model.factors[n]));
  write_cten(dir / "weights.cten",
             ComplexTensor::from_vector(std::span<const cplx>(model.weights.data(), model.rank())));
}

TTModel load_tt_model(const std::filesystem::path& dir) {
  const json j = read_manifest(dir, "ttm1");
  TTModel m;
  m.ranks = j.at("ranks").get<std::vector<std::size_t>>();
  const auto dims = j.at("dims").get<Dims>();
  for (std::size_t n = 0; n < dims.size(); ++n)
    m.cores.push_back(read_cten(dir / ("core_" + std::to_string(n + 1) + ".cten")));
  m.validate();
  if (m.dims() != dims) throw InvalidArgument("TT cores do not match manifest dims");
  return m;
}

CpdModel load_cpd_model(const std::filesystem::path& dir) {
  const json j = read_manifest(dir, "cpd1");
  const auto r = j.at("R").get<std::size_t>();
  const auto dims = j.at("dims").get<Dims>();
  CpdModel m;
  const auto w = read_cten(dir / "weights.cten");
  if (w.size() != r) throw InvalidArgument("weights length does not match R");
  m.weights = Eigen::Map<const CVector>(w.data().data(), static_cast<Eigen::Index>(r));
  for (std::size_t n = 0; n < dims.size(); ++n) {
    const auto f = read_cten(dir / ("factor_" + std::to_string(n + 1) + ".cten"));
    if (f.order() != 2 || f.dims()[0] != dims[n] || f.dims()[1] != r)
      throw InvalidArgument("factor " + std::to_string(n + 1) + " does not match the manifest");
    m.factors.push_back(f.as_matrix(dims[n], r));
  }
  m.validate();
  return m;
}

}  // namespace ttradar
