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


#include "ttradar/estimate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ttradar/errors.hpp"
#include "ttradar/linalg.hpp"

namespace ttradar {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string mode_name(std::size_t n) { return "mode " + std::to_string(n + 1); }

// Copies the window of size J starting at `start` into out (column-major).
void gather_window(const ComplexTensor& y, const std::array<std::size_t, 4>& start,
                   const std::array<std::size_t, 4>& j, cplx* out) {
  const Dims& d = y.dims();
  const std::size_t s1 = d[0], s2 = d[0] * d[1], s3 = d[0] * d[1] * d[2];
  const cplx* src = y.data().data();
  for (std::size_t j4 = 0; j4 < j[3]; ++j4)
    for (std::size_t j3 = 0; j3 < j[2]; ++j3)
      for (std::size_t j2 = 0; j2 < j[1]; ++j2) {
        const cplx* p = src + start[0] + s1 * (start[1] + j2) + s2 * (start[2] + j3) + s3 * (start[3] + j4);
        out = std::copy(p, p + j[0], out);
      }
}

// Calls f(start) for every window, l_1 fastest.
template <class F>
void for_each_window(const std::array<std::size_t, 4>& l, F&& f) {
  std::array<std::size_t, 4> s{};
  for (s[3] = 0; s[3] < l[3]; ++s[3])
    for (s[2] = 0; s[2] < l[2]; ++s[2])
      for (s[1] = 0; s[1] < l[1]; ++s[1])
        for (s[0] = 0; s[0] < l[0]; ++s[0]) f(s);
}

// (Q_{J_4} (x) Q_{J_3} (x) Q_{J_2} (x) Q_{J_1})^H X, applied mode by mode on
// the columns of X.
CMatrix apply_qh(CMatrix t, const std::array<std::size_t, 4>& j) {
  const double s = 1.0 / std::numbers::sqrt2;
  const cplx js{0.0, s};
  const std::size_t total = static_cast<std::size_t>(t.size());
  std::size_t stride = 1;
  std::vector<cplx> f;
  for (std::size_t n = 0; n < 4; ++n) {
    const std::size_t m = j[n], k = m / 2, off = m - k, block = stride * m;
    f.resize(m);
    // (Q^H v)_i = s (v_i + v_{m-1-i}),  (Q^H v)_{off+i} = js (v_{m-1-i} - v_i)
    for (std::size_t base = 0; base < total; base += block)
      for (std::size_t a = 0; a < stride; ++a) {
        cplx* v = t.data() + base + a;
        for (std::size_t i = 0; i < m; ++i) f[i] = v[i * stride];
        for (std::size_t i = 0; i < k; ++i) {
          v[i * stride] = s * (f[i] + f[m - 1 - i]);
          v[(off + i) * stride] = js * (f[m - 1 - i] - f[i]);
        }
      }
    stride = block;
  }
  return t;
}

// In-place sign gauge: first entry above 1e-10 * max of each column positive.
void fix_sign(RMatrix& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    const double mx = u.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < u.rows(); ++r)
      if (std::abs(u(r, c)) > 1e-10 * mx) {
        if (u(r, c) < 0) u.col(c) *= -1.0;
        break;
      }
  }
}

// x_n M on a vectorized real 4-order tensor with dims j.
RVector real_mode_product(const RVector& x, const std::array<std::size_t, 4>& j, const RMatrix& m, std::size_t n) {
  std::size_t a = 1, b = 1;
  for (std::size_t k = 0; k < n; ++k) a *= j[k];
  for (std::size_t k = n + 1; k < 4; ++k) b *= j[k];
  const auto ai = static_cast<Eigen::Index>(a);
  const auto jn = static_cast<Eigen::Index>(j[n]);
  const Eigen::Index jo = m.rows();
  RVector out(ai * jo * static_cast<Eigen::Index>(b));
  for (std::size_t k = 0; k < b; ++k) {
    const auto ik = static_cast<Eigen::Index>(k);
    Eigen::Map<const RMatrix> in(x.data() + ik * ai * jn, ai, jn);
    Eigen::Map<RMatrix> o(out.data() + ik * ai * jo, ai, jo);
    o.noalias() = in * m.transpose();
  }
  return out;
}

void check_rank(std::size_t rank, std::size_t available, const char* who) {
  if (rank < 1 || rank > available)
    throw InvalidArgument(std::string(who) + ": rank " + std::to_string(rank) + " exceeds the available rank " +
                          std::to_string(available));
}

}  // namespace

// -------------------------------------------------------------- smoothing

std::array<std::size_t, 4> SmoothingPlan::shifts(const Dims& dims) const {
  validate(dims);
  std::array<std::size_t, 4> l{};
  for (std::size_t n = 0; n < 4; ++n) l[n] = dims[n] - sub_dims[n] + 1;
  return l;
}

std::size_t SmoothingPlan::snapshots(const Dims& dims) const {
  const auto l = shifts(dims);
  return l[0] * l[1] * l[2] * l[3];
}

std::size_t SmoothingPlan::subarray_size() const { return sub_dims[0] * sub_dims[1] * sub_dims[2] * sub_dims[3]; }

void SmoothingPlan::validate(const Dims& dims) const {
  if (dims.size() != 4) throw PlanInvalid("smoothing plan: tensor must be 4-order");
  for (std::size_t n = 0; n < 4; ++n)
    if (sub_dims[n] < 1 || sub_dims[n] > dims[n])
      throw PlanInvalid("smoothing plan: " + mode_name(n) + " subarray size " + std::to_string(sub_dims[n]) +
                        " not in [1, " + std::to_string(dims[n]) + "]");
}

SmoothingPlan SmoothingPlan::from_tt_ranks(const std::vector<std::size_t>& ranks, const Dims& dims) {
  if (dims.size() != 4) throw PlanInvalid("smoothing plan: tensor must be 4-order");
  std::array<std::size_t, 3> t{};
  if (ranks.size() == 5)
    std::copy(ranks.begin() + 1, ranks.begin() + 4, t.begin());
  else if (ranks.size() == 3)
    std::copy(ranks.begin(), ranks.end(), t.begin());
  else
    throw PlanInvalid("smoothing plan: expected 3 bond ranks or 5 boundary-inclusive ranks");
  SmoothingPlan p;
  const std::array<std::size_t, 4> j{t[0], t[1], t[2], t[2]};
  for (std::size_t n = 0; n < 4; ++n) p.sub_dims[n] = std::clamp<std::size_t>(j[n], 1, dims[n]);
  return p;
}

SmoothingPlan SmoothingPlan::identity(const Dims& dims) {
  if (dims.size() != 4) throw PlanInvalid("smoothing plan: tensor must be 4-order");
  return SmoothingPlan{{dims[0], dims[1], dims[2], dims[3]}};
}

ComplexTensor spatial_smooth(const ComplexTensor& y, const SmoothingPlan& plan) {
  const auto l = plan.shifts(y.dims());
  const auto& j = plan.sub_dims;
  const std::size_t p = plan.subarray_size();
  ComplexTensor out(Dims{j[0], j[1], j[2], j[3], l[0] * l[1] * l[2] * l[3]});
  cplx* dst = out.data().data();
  for_each_window(l, [&](const std::array<std::size_t, 4>& s) {
    gather_window(y, s, j, dst);
    dst += p;
  });
  return out;
}

// -------------------------------------------------------------------- FBA

CMatrix exchange_matrix(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  CMatrix j = CMatrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) j(i, m - 1 - i) = 1.0;
  return j;
}

CMatrix unitary_q(std::size_t n) {
  if (n < 1) throw InvalidArgument("unitary_q: size must be >= 1");
  const auto k = static_cast<Eigen::Index>(n / 2);
  const auto m = static_cast<Eigen::Index>(n);
  const double s = 1.0 / std::numbers::sqrt2;
  const cplx js{0.0, s};
  CMatrix q = CMatrix::Zero(m, m);
  const Eigen::Index off = m - k;  // column of the first imaginary unit vector
  for (Eigen::Index i = 0; i < k; ++i) {
    q(i, i) = s;
    q(i, off + i) = js;
    q(m - 1 - i, i) = s;
    q(m - 1 - i, off + i) = -js;
  }
  if (n % 2 == 1) q(k, k) = 1.0;
  return q;
}

FbaTensor fba(const ComplexTensor& y_ss) {
  if (y_ss.order() != 5) throw InvalidArgument("fba: expected a 5-order tensor");
  const Dims& d = y_ss.dims();
  const std::array<std::size_t, 4> j{d[0], d[1], d[2], d[3]};
  const auto p = static_cast<Eigen::Index>(d[0] * d[1] * d[2] * d[3]);
  const auto j5 = static_cast<Eigen::Index>(d[4]);

  // Centro-Hermitian extension: the conjugated half is y_ss flipped in all
  // five modes, i.e. its flat buffer reversed.
  CMatrix ch(p, 2 * j5);
  ch.leftCols(j5) = y_ss.as_matrix(static_cast<std::size_t>(p), static_cast<std::size_t>(j5));
  const std::size_t total = y_ss.size();
  for (std::size_t i = 0; i < total; ++i) ch.data()[total + i] = std::conj(y_ss[total - 1 - i]);

  const CMatrix h = apply_qh(std::move(ch), j);

  // Right multiplication by Q_{2J_5}; only the real part is kept.
  const double s = 1.0 / std::numbers::sqrt2;
  FbaTensor out;
  out.dims = {d[0], d[1], d[2], d[3], 2 * d[4]};
  out.unfolding.resize(p, 2 * j5);
  double re2 = 0.0, im2 = 0.0;
  for (Eigen::Index k = 0; k < j5; ++k) {
    const cplx* a = h.col(k).data();
    const cplx* b = h.col(2 * j5 - 1 - k).data();
    double* zc = out.unfolding.col(k).data();
    double* zs = out.unfolding.col(j5 + k).data();
    for (Eigen::Index i = 0; i < p; ++i) {
      const cplx sum = s * (a[i] + b[i]), dif = s * (a[i] - b[i]);
      zc[i] = sum.real();
      zs[i] = -dif.imag();
      re2 += sum.real() * sum.real() + dif.imag() * dif.imag();
      im2 += sum.imag() * sum.imag() + dif.real() * dif.real();
    }
  }
  const double nz = std::sqrt(re2 + im2);
  out.residue = nz > 0 ? std::sqrt(im2) / nz : 0.0;
  if (!(out.residue <= kFbaResidueLimit))
    throw NumericFailure("fba: imaginary residue " + std::to_string(out.residue) + " above limit");
  return out;
}

// --------------------------------------------------------------- subspace

SignalSubspace signal_subspace(const FbaTensor& yfb, std::size_t rank) {
  if (yfb.dims.size() != 5) throw InvalidArgument("signal_subspace: expected 5-order FBA tensor");
  const auto& a = yfb.unfolding;
  check_rank(rank, static_cast<std::size_t>(std::min(a.rows(), a.cols())), "signal_subspace");
  // Wide unfoldings: A^T = Q R, so A and R^T share U and sigma.
  const RealSvdResult dec = a.cols() > 2 * a.rows()
                                ? svd(RMatrix(RMatrix(Eigen::HouseholderQR<RMatrix>(a.transpose())
                                                          .matrixQR()
                                                          .topRows(a.rows())
                                                          .triangularView<Eigen::Upper>())
                                                  .transpose()))
                                : svd(a);
  SignalSubspace g;
  g.sub_dims = {yfb.dims[0], yfb.dims[1], yfb.dims[2], yfb.dims[3]};
  g.basis = dec.U.leftCols(static_cast<Eigen::Index>(rank));
  fix_sign(g.basis);
  g.sigma = dec.sigma;
  const auto r = static_cast<Eigen::Index>(rank) - 1;
  g.rank_deficient = !(g.sigma(r) > 1e-8 * g.sigma(0));
  g.route = SubspaceRoute::Direct;
  g.residue = yfb.residue;
  return g;
}

SignalSubspace signal_subspace_gram(const ComplexTensor& y, const SmoothingPlan& plan, std::size_t rank) {
  const auto l = plan.shifts(y.dims());
  const auto& j = plan.sub_dims;
  const auto p = static_cast<Eigen::Index>(plan.subarray_size());
  const std::size_t j5 = l[0] * l[1] * l[2] * l[3];
  check_rank(rank, std::min(static_cast<std::size_t>(p), 2 * j5), "signal_subspace_gram");

  constexpr Eigen::Index kBatch = 2048;
  CMatrix c = CMatrix::Zero(p, p);
  CMatrix w(p, kBatch);
  Eigen::Index filled = 0;
  auto flush = [&] {
    if (filled == 0) return;
    c.selfadjointView<Eigen::Lower>().rankUpdate(w.leftCols(filled));
    filled = 0;
  };
  for_each_window(l, [&](const std::array<std::size_t, 4>& s) {
    gather_window(y, s, j, w.col(filled).data());
    if (++filled == kBatch) flush();
  });
  flush();
  c.triangularView<Eigen::StrictlyUpper>() = c.adjoint();

  CMatrix sym(p, p);
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = 0; b < p; ++b) sym(a, b) = c(a, b) + std::conj(c(p - 1 - a, p - 1 - b));
  const CMatrix half = apply_qh(sym, j);
  const CMatrix gram = apply_qh(half.adjoint(), j).adjoint();

  SignalSubspace g;
  const double ng = gram.norm();
  g.residue = ng > 0 ? gram.imag().norm() / ng : 0.0;
  if (!(g.residue <= kFbaResidueLimit))
    throw NumericFailure("signal_subspace_gram: imaginary residue " + std::to_string(g.residue) + " above limit");
  const RMatrix re = 0.5 * (gram.real() + gram.real().transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(re);
  if (es.info() != Eigen::Success) throw NumericFailure("signal_subspace_gram: eigensolver failed");
  // Ascending from Eigen; flip to descending.
  const RVector ev = es.eigenvalues().reverse();
  const RMatrix vecs = es.eigenvectors().rowwise().reverse();

  g.sub_dims = j;
  g.basis = vecs.leftCols(static_cast<Eigen::Index>(rank));
  fix_sign(g.basis);
  const auto nsig = static_cast<Eigen::Index>(std::min(static_cast<std::size_t>(p), 2 * j5));
  g.sigma = ev.head(nsig).cwiseMax(0.0).cwiseSqrt();
  const auto r = static_cast<Eigen::Index>(rank) - 1;
  g.rank_deficient = !(g.sigma(r) > 1e-8 * g.sigma(0));
  g.route = SubspaceRoute::Gram;
  return g;
}

// ------------------------------------------------------------- invariance

namespace {

CMatrix selected_k(std::size_t n) {
  if (n < 2) throw InvalidArgument("invariance matrices need a subarray of size >= 2");
  const auto m = static_cast<Eigen::Index>(n);
  CMatrix s1 = CMatrix::Zero(m - 1, m);
  s1.leftCols(m - 1).setIdentity();
  return unitary_q(n - 1).adjoint() * s1 * unitary_q(n);
}

}  // namespace

RMatrix invariance_k1(std::size_t n) { return selected_k(n).real(); }
RMatrix invariance_k2(std::size_t n) { return selected_k(n).imag(); }

UpsilonSet solve_upsilon(const SignalSubspace& g) {
  const Eigen::Index r = g.basis.cols();
  if (r < 1) throw InvalidArgument("solve_upsilon: empty subspace");
  UpsilonSet u;
  for (std::size_t n = 0; n < 4; ++n) {
    u.upsilon[n] = RMatrix::Zero(r, r);
    if (g.sub_dims[n] < 2) continue;
    const RMatrix k1 = invariance_k1(g.sub_dims[n]);
    const RMatrix k2 = invariance_k2(g.sub_dims[n]);
    const Eigen::Index rows = g.basis.rows() / static_cast<Eigen::Index>(g.sub_dims[n]) *
                              static_cast<Eigen::Index>(g.sub_dims[n] - 1);
    RMatrix a1(rows, r), a2(rows, r);
    for (Eigen::Index c = 0; c < r; ++c) {
      const RVector col = g.basis.col(c);
      a1.col(c) = real_mode_product(col, g.sub_dims, k1, n);
      a2.col(c) = real_mode_product(col, g.sub_dims, k2, n);
    }
    u.observable[n] = true;

    RMatrix x;
    Eigen::JacobiSVD<RMatrix> sv(a1);
    const RVector s = sv.singularValues();
    const bool deficient = rows < r || s.size() == 0 || !(s(s.size() - 1) > 1e-12 * s(0));
    if (deficient) {
      const RMatrix ata = a1.transpose() * a1;
      const double ridge = 1e-10 * std::max(ata.trace(), std::numeric_limits<double>::min());
      x = (ata + ridge * RMatrix::Identity(r, r)).ldlt().solve(a1.transpose() * a2);
      u.regularized[n] = true;
    } else {
      x = a1.completeOrthogonalDecomposition().solve(a2);
    }
    u.upsilon[n] = x.transpose();
    const double na2 = a2.norm();
    const double res = (a1 * x - a2).norm();
    u.residual[n] = na2 > 0 ? res / na2 : res;
  }
  return u;
}

JointEigs joint_eigs(const UpsilonSet& u) {
  const Eigen::Index r = u.upsilon[0].rows();
  std::vector<RMatrix> ms;
  std::vector<std::size_t> modes;
  for (std::size_t n = 0; n < 4; ++n) {
    if (u.upsilon[n].rows() != r || u.upsilon[n].cols() != r)
      throw InvalidArgument("joint_eigs: inconsistent upsilon sizes");
    if (u.observable[n]) {
      ms.push_back(u.upsilon[n]);
      modes.push_back(n);
    }
  }
  JointEigs out;
  out.tuples.assign(static_cast<std::size_t>(r), {0.0, 0.0, 0.0, 0.0});
  if (ms.empty()) {
    out.converged = true;
    return out;
  }
  for (const auto& m : ms)
    if (!m.allFinite()) throw NumericFailure("joint_eigs: non-finite upsilon entry");
  const SsdResult s = ssd(ms);
  for (std::size_t k = 0; k < static_cast<std::size_t>(r); ++k)
    for (std::size_t i = 0; i < modes.size(); ++i) out.tuples[k][modes[i]] = s.eigen_tuples[k][i];
  out.converged = s.converged;
  out.sweeps = s.sweeps;
  out.residual = s.residual;
  return out;
}

// -------------------------------------------------------------- inversion

EstimationResult invert_parameters(const JointEigs& eigs, const RadarConfig& cfg,
                                   const std::array<bool, 4>& observable) {
  cfg.validate();
  const double lambda = cfg.wavelength();
  const double d = cfg.element_spacing();
  EstimationResult res;
  for (const auto& tup : eigs.tuples) {
    EstimatedTarget t;
    std::array<double, 4> nu{};
    for (std::size_t n = 0; n < 4; ++n) {
      if (!std::isfinite(tup[n])) throw NumericFailure("invert_parameters: non-finite eigenvalue");
      if (observable[n])
        nu[n] = std::atan(tup[n]) / std::numbers::pi;
      else
        t.flags.push_back(mode_name(n) + " unobservable");
    }
    t.freqs = {nu[0], nu[1], nu[2] + cfg.range_zone, nu[3]};
    t.range_m = t.freqs.eta * kSpeedOfLight / (2.0 * cfg.slope * cfg.sample_interval);
    t.vel_mps = t.freqs.mu * lambda / (2.0 * cfg.chirp_duration);
    const double th = t.freqs.theta, ph = t.freqs.phi;
    t.az_rad = (th == 0.0 && ph == 0.0) ? 0.0 : std::atan2(ph, th);
    const double s = lambda / d * std::hypot(th, ph);
    if (s > 1.0) {
      t.flags.push_back("elevation unresolvable");
      t.el_rad = std::numbers::pi / 2;
    } else {
      t.el_rad = std::asin(s);
    }
    if (!(t.range_m > 0)) t.flags.push_back("range out of gate");
    if (!eigs.converged) t.flags.push_back("ssd not converged");
    res.targets.push_back(std::move(t));
  }
  res.diagnostics.observable = observable;
  res.diagnostics.ssd_converged = eigs.converged;
  res.diagnostics.ssd_sweeps = eigs.sweeps;
  res.diagnostics.ssd_residual = eigs.residual;
  return res;
}

EstimationResult estimate(const ComplexTensor& y, const RadarConfig& cfg, const std::vector<std::size_t>& tt_ranks,
                          const EstimateOptions& opts) {
  if (y.order() != 4) throw InvalidArgument("estimate: expected a 4-order tensor");
  const auto t0 = Clock::now();
  const SmoothingPlan plan = opts.plan ? *opts.plan : SmoothingPlan::from_tt_ranks(tt_ranks, y.dims());
  plan.validate(y.dims());
  std::vector<std::string> notes;

  std::size_t rank = 0;
  if (opts.rank) {
    rank = *opts.rank;
  } else {
    for (auto j : plan.sub_dims)
      if (j >= 2) rank = rank == 0 ? j : std::min(rank, j);
    if (rank == 0) {
      rank = 1;
      notes.push_back("no observable mode; rank set to 1");
    }
  }

  const std::size_t p = plan.subarray_size();
  const std::size_t j5 = plan.snapshots(y.dims());
  SubspaceRoute route = opts.route;
  if (route == SubspaceRoute::Auto)
    route = p > 2 * j5 || (p * 2 * j5 <= opts.direct_limit && 2 * j5 < 8 * p) ? SubspaceRoute::Direct
                                                                                : SubspaceRoute::Gram;

  SignalSubspace g;
  double smooth_ms = 0.0;
  Clock::time_point t1;
  if (route == SubspaceRoute::Direct) {
    const FbaTensor yfb = fba(spatial_smooth(y, plan));
    smooth_ms = ms_since(t0);
    t1 = Clock::now();
    g = signal_subspace(yfb, rank);
  } else {
    g = signal_subspace_gram(y, plan, rank);
    smooth_ms = ms_since(t0);
    t1 = Clock::now();
  }
  const UpsilonSet u = solve_upsilon(g);
  const JointEigs e = joint_eigs(u);
  EstimationResult res = invert_parameters(e, cfg, u.observable);

  auto& dg = res.diagnostics;
  dg.plan = plan;
  dg.rank = rank;
  dg.upsilon_residual = u.residual;
  dg.upsilon_regularized = u.regularized;
  dg.rank_deficient = g.rank_deficient;
  dg.route = route;
  dg.fba_residue = g.residue;
  dg.notes = std::move(notes);
  if (g.rank_deficient) dg.notes.push_back("signal subspace is rank deficient");
  for (std::size_t n = 0; n < 4; ++n) {
    if (!u.observable[n]) dg.notes.push_back(mode_name(n) + " unobservable (subarray size 1)");
    if (u.regularized[n]) dg.notes.push_back(mode_name(n) + " invariance solve regularized");
  }
  res.smooth_ms = smooth_ms;
  res.estimate_ms = ms_since(t1);
  return res;
}

// ------------------------------------------------------------------- NMSE

double nmse_term(const EstimatedTarget& est, const TargetParams& truth) {
  auto term = [](double e, double t) {
    const double diff = e - t;
    return t != 0.0 ? (diff / t) * (diff / t) : diff * diff;
  };
  return term(est.range_m, truth.range_m) + term(est.vel_mps, truth.vel_mps) + term(est.az_rad, truth.az_rad) +
         term(est.el_rad, truth.el_rad);
}

std::vector<int> hungarian(const RMatrix& cost) {
  const auto rows = static_cast<std::size_t>(cost.rows());
  const auto cols = static_cast<std::size_t>(cost.cols());
  const std::size_t n = std::max(rows, cols);
  if (n == 0) return {};
  auto at = [&](std::size_t i, std::size_t j) {
    return i < rows && j < cols ? cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) : 0.0;
  };
  // Potentials method on the zero-padded square matrix, 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> out(rows, -1);
  for (std::size_t j = 1; j <= n; ++j)
    if (match[j] >= 1 && match[j] <= rows && j <= cols) out[match[j] - 1] = static_cast<int>(j - 1);
  return out;
}

double NmseResult::mean() const {
  if (per_target.empty()) return 0.0;
  double s = 0.0;
  for (double v : per_target) s += v;
  return s / static_cast<double>(per_target.size());
}

NmseResult joint_nmse(const EstimationResult& est, const std::vector<TargetParams>& truth) {
  NmseResult r;
  const std::size_t nt = truth.size(), ne = est.targets.size();
  r.penalized = nt != ne;
  RMatrix cost(static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(ne));
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t j = 0; j < ne; ++j)
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = nmse_term(est.targets[j], truth[i]);
  r.matched = ne == 0 ? std::vector<int>(nt, -1) : hungarian(cost);
  for (std::size_t i = 0; i < nt; ++i)
    r.per_target.push_back(r.matched[i] >= 0 ? cost(static_cast<Eigen::Index>(i), r.matched[i]) : kUnmatchedPenalty);
  return r;
}

}  // namespace ttradar
