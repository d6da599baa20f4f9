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

#include "ttradar/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "ttradar/errors.hpp"

namespace ttradar {

namespace {

template <typename Mat>
void check_finite(const Mat& a, const char* what) {
  if (!a.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite input");
}

// Index of the first entry whose magnitude is not negligible w.r.t. the column.
template <typename Vec>
Eigen::Index first_significant(const Vec& v) {
  const double mx = v.cwiseAbs().maxCoeff();
  if (mx == 0.0) return -1;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > 1e-10 * mx) return i;
  return -1;
}

template <typename Mat>
void fix_gauge(Mat& u, Mat* v) {
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    const Eigen::Index i = first_significant(u.col(j));
    if (i < 0) continue;
    using S = typename Mat::Scalar;
    S ph = u(i, j) / std::abs(u(i, j));
    if constexpr (!std::is_same_v<S, double>) ph = std::conj(ph);
    u.col(j) *= ph;
    if (v) v->col(j) *= ph;
  }
}

template <typename Mat, typename Result>
Result svd_impl(const Mat& a) {
  check_finite(a, "svd");
  if (a.size() == 0) throw InvalidArgument("svd: empty matrix");
  Eigen::BDCSVD<Mat> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) throw NumericFailure("svd: decomposition did not converge");
  Result r{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  fix_gauge(r.U, &r.V);
  return r;
}

template <typename Result>
Result truncate(Result full, std::size_t k, Eigen::Index rows, Eigen::Index cols) {
  if (k < 1 || k > static_cast<std::size_t>(std::min(rows, cols)))
    throw InvalidArgument("truncated_svd: k=" + std::to_string(k) + " out of range [1, " +
                          std::to_string(std::min(rows, cols)) + "]");
  const auto kk = static_cast<Eigen::Index>(k);
  return Result{full.U.leftCols(kk), full.sigma.head(kk), full.V.leftCols(kk)};
}

}  // namespace

SvdResult svd(const CMatrix& a) { return svd_impl<CMatrix, SvdResult>(a); }
RealSvdResult svd(const RMatrix& a) { return svd_impl<RMatrix, RealSvdResult>(a); }

SvdResult truncated_svd(const CMatrix& a, std::size_t k) {
  return truncate(svd(a), k, a.rows(), a.cols());
}

RealSvdResult truncated_svd(const RMatrix& a, std::size_t k) {
  return truncate(svd(a), k, a.rows(), a.cols());
}

QrResult qr(const CMatrix& a) {
  check_finite(a, "qr");
  if (a.rows() < 1 || a.cols() < 1) throw InvalidArgument("qr: empty matrix");
  const Eigen::Index m = a.rows(), n = a.cols(), k = std::min(m, n);
  Eigen::HouseholderQR<CMatrix> dec(a);
  QrResult out;
  out.Q = dec.householderQ() * CMatrix::Identity(m, k);
  out.R = dec.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i) {
    const cplx d = out.R(i, i);
    if (std::abs(d) == 0.0) continue;
    const cplx ph = d / std::abs(d);
    out.Q.col(i) *= ph;
    out.R.row(i) *= std::conj(ph);
    out.R(i, i) = std::abs(d);
  }
  return out;
}

EigResult herm_eig(const CMatrix& a) {
  check_finite(a, "herm_eig");
  if (a.rows() != a.cols() || a.rows() == 0) throw InvalidArgument("herm_eig: matrix must be square");
  const double nrm = a.norm();
  if ((a - a.adjoint()).norm() > 1e-8 * nrm) throw InvalidArgument("herm_eig: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> dec(a);
  if (dec.info() != Eigen::Success) throw NumericFailure("herm_eig: decomposition did not converge");
  EigResult out{dec.eigenvalues().reverse(), dec.eigenvectors().rowwise().reverse()};
  fix_gauge<CMatrix>(out.vectors, nullptr);
  return out;
}

// ---------------------------------------------------------------------- SSD

double lower_mass(const std::vector<RMatrix>& ms) {
  double s = 0.0;
  for (const auto& m : ms)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = j + 1; i < m.rows(); ++i) s += m(i, j) * m(i, j);
  return s;
}

namespace {

// Lower mass of G^T M G restricted to the entries a rotation in plane (p, q)
// can change. Everything else is constant along the plane search.
double plane_mass(const std::vector<RMatrix>& ms, Eigen::Index p, Eigen::Index q, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const Eigen::Index n = ms.front().rows();
  double total = 0.0;
  for (const auto& m : ms) {
    auto rot = [&](Eigen::Index i, Eigen::Index j) {
      // (G^T M G)(i, j) for G = I with [c -s; s c] in rows/cols (p, q).
      auto left = [&](Eigen::Index r, Eigen::Index col) {
        if (r == p) return c * m(p, col) + s * m(q, col);
        if (r == q) return -s * m(p, col) + c * m(q, col);
        return m(r, col);
      };
      if (j == p) return c * left(i, p) + s * left(i, q);
      if (j == q) return -s * left(i, p) + c * left(i, q);
      return left(i, j);
    };
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k > p) { const double v = rot(k, p); total += v * v; }
      if (k > q) { const double v = rot(k, q); total += v * v; }
      if (k < p) { const double v = rot(p, k); total += v * v; }
      if (k < q && k != p) { const double v = rot(q, k); total += v * v; }
    }
  }
  return total;
}

// Angle minimizing the plane objective. In phi = 2 theta the objective is a
// trigonometric polynomial of degree 2, recovered exactly from 5 samples.
double best_angle(const std::vector<RMatrix>& ms, Eigen::Index p, Eigen::Index q) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double f[5];
  for (int j = 0; j < 5; ++j) f[j] = plane_mass(ms, p, q, 0.5 * kTwoPi * j / 5.0);
  double a1 = 0, b1 = 0, a2 = 0, b2 = 0;
  for (int j = 0; j < 5; ++j) {
    const double ph = kTwoPi * j / 5.0;
    a1 += 0.4 * f[j] * std::cos(ph);
    b1 += 0.4 * f[j] * std::sin(ph);
    a2 += 0.4 * f[j] * std::cos(2 * ph);
    b2 += 0.4 * f[j] * std::sin(2 * ph);
  }
  auto val = [&](double ph) {
    return a1 * std::cos(ph) + b1 * std::sin(ph) + a2 * std::cos(2 * ph) + b2 * std::sin(2 * ph);
  };
  double best = 0.0, fbest = val(0.0);
  constexpr int kGrid = 72;
  for (int g = 1; g < kGrid; ++g) {
    const double ph = -std::numbers::pi + kTwoPi * g / kGrid;
    if (const double v = val(ph); v < fbest) { fbest = v; best = ph; }
  }
  for (int it = 0; it < 20; ++it) {
    const double d1 = -a1 * std::sin(best) + b1 * std::cos(best) - 2 * a2 * std::sin(2 * best) +
                      2 * b2 * std::cos(2 * best);
    const double d2 = -a1 * std::cos(best) - b1 * std::sin(best) - 4 * a2 * std::cos(2 * best) -
                      4 * b2 * std::sin(2 * best);
    if (d2 <= 0.0) break;
    const double step = d1 / d2;
    if (val(best - step) > val(best)) break;
    best -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return 0.5 * best;
}

void apply_rotation(std::vector<RMatrix>& ms, RMatrix& q_acc, Eigen::Index p, Eigen::Index q,
                    double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  for (auto& m : ms) {
    // M <- G^T M G
    const Eigen::VectorXd rp = m.row(p), rq = m.row(q);
    m.row(p) = c * rp + s * rq;
    m.row(q) = -s * rp + c * rq;
    const Eigen::VectorXd cp = m.col(p), cq = m.col(q);
    m.col(p) = c * cp + s * cq;
    m.col(q) = -s * cp + c * cq;
  }
  const Eigen::VectorXd qp = q_acc.col(p), qq = q_acc.col(q);
  q_acc.col(p) = c * qp + s * qq;
  q_acc.col(q) = -s * qp + c * qq;
}

bool all_upper(const std::vector<RMatrix>& ms) { return lower_mass(ms) == 0.0; }

}  // namespace

SsdResult ssd(const std::vector<RMatrix>& ms, double tol, int max_sweeps) {
  if (ms.empty()) throw InvalidArgument("ssd: no matrices");
  const Eigen::Index n = ms.front().rows();
  for (const auto& m : ms) {
    if (m.rows() != n || m.cols() != n) throw InvalidArgument("ssd: matrices must share one square size");
    check_finite(m, "ssd");
  }

  SsdResult out;
  out.Q = RMatrix::Identity(n, n);
  out.Ts = ms;
  double scale = 0.0;
  for (const auto& m : ms) scale += m.squaredNorm();

  // Start from the real Schur basis of a fixed generic combination.
  if (!all_upper(ms) && n > 1) {
    RMatrix comb = RMatrix::Zero(n, n);
    double w = 1.0;
    for (const auto& m : ms) {
      comb += w * m;
      w *= 0.6180339887498949;
    }
    Eigen::RealSchur<RMatrix> schur(comb);
    if (schur.info() == Eigen::Success) {
      const RMatrix u = schur.matrixU();
      std::vector<RMatrix> trial;
      for (const auto& m : ms) trial.push_back(u.transpose() * m * u);
      if (lower_mass(trial) < lower_mass(out.Ts)) {
        out.Q = u;
        out.Ts = std::move(trial);
      }
    }
  }

  double obj = lower_mass(out.Ts);
  out.objective_history.push_back(obj);
  bool stationary = false;
  while (out.sweeps < max_sweeps && obj > tol * scale && !stationary) {
    stationary = true;
    for (Eigen::Index p = 0; p + 1 < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double theta = best_angle(out.Ts, p, q);
        if (theta == 0.0) continue;
        auto ts = out.Ts;
        RMatrix qa = out.Q;
        apply_rotation(ts, qa, p, q, theta);
        const double next = lower_mass(ts);
        if (next < obj) {
          stationary = stationary && (obj - next) <= 1e-15 * std::max(obj, 1e-300);
          out.Ts = std::move(ts);
          out.Q = std::move(qa);
          obj = next;
        }
      }
    ++out.sweeps;
    out.objective_history.push_back(obj);
  }
  out.residual = obj;
  out.converged = obj <= tol * scale || stationary;

  out.eigen_tuples.assign(static_cast<std::size_t>(n), std::vector<double>(ms.size()));
  for (Eigen::Index r = 0; r < n; ++r)
    for (std::size_t k = 0; k < ms.size(); ++k)
      out.eigen_tuples[static_cast<std::size_t>(r)][k] = out.Ts[k](r, r);
  return out;
}

}  // namespace ttradar
