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

#include "ttradar/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ttradar/errors.hpp"

namespace ttradar {

namespace {

std::string dims_str(std::span<const std::size_t> dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

void check_dims(const Dims& dims) {
  if (dims.empty()) throw InvalidArgument("tensor order must be >= 1");
  for (auto d : dims)
    if (d == 0) throw InvalidArgument("tensor dims must be >= 1, got " + dims_str(dims));
}

void check_mode(const ComplexTensor& t, std::size_t n, const char* what) {
  if (n < 1 || n > t.order())
    throw InvalidArgument(std::string(what) + ": mode " + std::to_string(n) +
                          " out of range for order " + std::to_string(t.order()));
}

// View of t as a column-major (left x mid x right) block around mode n.
struct Split {
  std::size_t left, mid, right;
};

Split split_at(const Dims& dims, std::size_t n) {
  Split s{1, dims[n - 1], 1};
  for (std::size_t m = 0; m + 1 < n; ++m) s.left *= dims[m];
  for (std::size_t m = n; m < dims.size(); ++m) s.right *= dims[m];
  return s;
}

// Modes (0-based) of the (n) unfolding's column index, fastest first.
std::vector<std::size_t> mode_column_order(std::size_t order, std::size_t n) {
  std::vector<std::size_t> seq;
  for (std::size_t m = n - 1; m-- > 0;) seq.push_back(m);
  for (std::size_t m = order; m-- > n;) seq.push_back(m);
  return seq;
}

}  // namespace

std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

// ---------------------------------------------------------------- IndexMap

IndexMap::IndexMap(Dims source, Dims target) : source_(std::move(source)), target_(std::move(target)) {
  check_dims(source_);
  check_dims(target_);
  if (product(source_) != product(target_))
    throw InvalidArgument("IndexMap: element count mismatch " + dims_str(source_) + " vs " +
                          dims_str(target_));
}

Dims IndexMap::map(std::span<const std::size_t> source_index) const {
  return unravel_one_based(target_, linear_one_based(source_, source_index));
}

std::size_t IndexMap::linear(std::span<const std::size_t> dims, std::span<const std::size_t> index) {
  if (index.size() != dims.size()) throw InvalidArgument("index order mismatch");
  std::size_t flat = 0, stride = 1;
  for (std::size_t m = 0; m < dims.size(); ++m) {
    if (index[m] >= dims[m]) throw InvalidArgument("index out of range");
    flat += index[m] * stride;
    stride *= dims[m];
  }
  return flat;
}

Dims IndexMap::unravel(std::span<const std::size_t> dims, std::size_t flat) {
  Dims idx(dims.size());
  for (std::size_t m = 0; m < dims.size(); ++m) {
    idx[m] = flat % dims[m];
    flat /= dims[m];
  }
  if (flat != 0) throw InvalidArgument("flat index out of range");
  return idx;
}

std::size_t IndexMap::linear_one_based(std::span<const std::size_t> dims,
                                       std::span<const std::size_t> index) {
  Dims zero(index.begin(), index.end());
  for (auto& i : zero) {
    if (i == 0) throw InvalidArgument("1-based index must be >= 1");
    --i;
  }
  return linear(dims, zero) + 1;
}

Dims IndexMap::unravel_one_based(std::span<const std::size_t> dims, std::size_t flat) {
  if (flat == 0) throw InvalidArgument("1-based flat index must be >= 1");
  Dims idx = unravel(dims, flat - 1);
  for (auto& i : idx) ++i;
  return idx;
}

// ----------------------------------------------------------- ComplexTensor

ComplexTensor::ComplexTensor(Dims dims) : dims_(std::move(dims)) {
  check_dims(dims_);
  data_.assign(product(dims_), cplx{0.0, 0.0});
}

ComplexTensor::ComplexTensor(Dims dims, std::vector<cplx> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  check_dims(dims_);
  if (data_.size() != product(dims_))
    throw InvalidArgument("data length " + std::to_string(data_.size()) +
                          " does not match dims " + dims_str(dims_));
}

ComplexTensor ComplexTensor::from_matrix(const CMatrix& m) {
  ComplexTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<CMatrix>(t.data_.data(), m.rows(), m.cols()) = m;
  return t;
}

ComplexTensor ComplexTensor::from_vector(std::span<const cplx> v) {
  return ComplexTensor({v.size()}, std::vector<cplx>(v.begin(), v.end()));
}

std::size_t ComplexTensor::dim(std::size_t mode) const {
  if (mode < 1 || mode > dims_.size()) throw InvalidArgument("dim: mode out of range");
  return dims_[mode - 1];
}

cplx ComplexTensor::operator()(std::initializer_list<std::size_t> index) const {
  return data_[IndexMap::linear(dims_, std::span(index.begin(), index.size()))];
}

cplx& ComplexTensor::operator()(std::initializer_list<std::size_t> index) {
  return data_[IndexMap::linear(dims_, std::span(index.begin(), index.size()))];
}

cplx ComplexTensor::at(std::span<const std::size_t> index) const {
  return data_[IndexMap::linear(dims_, index)];
}

double ComplexTensor::squared_norm() const {
  double s = 0.0;
  for (const auto& v : data_) s += std::norm(v);
  return s;
}

double ComplexTensor::norm() const { return std::sqrt(squared_norm()); }

CMatrix ComplexTensor::as_matrix(std::size_t rows, std::size_t cols) const {
  if (rows * cols != data_.size()) throw InvalidArgument("as_matrix: size mismatch");
  return Eigen::Map<const CMatrix>(data_.data(), static_cast<Eigen::Index>(rows),
                                   static_cast<Eigen::Index>(cols));
}

ComplexTensor ComplexTensor::conj() const {
  ComplexTensor out = *this;
  for (auto& v : out.data_) v = std::conj(v);
  return out;
}

ComplexTensor& ComplexTensor::operator+=(const ComplexTensor& other) {
  if (dims_ != other.dims_) throw InvalidArgument("tensor add: dims mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ComplexTensor& ComplexTensor::operator-=(const ComplexTensor& other) {
  if (dims_ != other.dims_) throw InvalidArgument("tensor subtract: dims mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ComplexTensor& ComplexTensor::operator*=(cplx s) {
  for (auto& v : data_) v *= s;
  return *this;
}

ComplexTensor operator+(ComplexTensor a, const ComplexTensor& b) { return a += b; }
ComplexTensor operator-(ComplexTensor a, const ComplexTensor& b) { return a -= b; }
ComplexTensor operator*(cplx s, ComplexTensor a) { return a *= s; }

cplx inner(const ComplexTensor& a, const ComplexTensor& b) {
  if (a.dims() != b.dims()) throw InvalidArgument("inner: dims mismatch");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double relative_error(const ComplexTensor& approx, const ComplexTensor& reference) {
  const double ref = reference.norm();
  const double err = (approx - reference).norm();
  return ref > 0.0 ? err / ref : err;
}

// -------------------------------------------------------------- operations

ComplexTensor reshape(const ComplexTensor& t, Dims new_dims) {
  check_dims(new_dims);
  if (product(new_dims) != t.size())
    throw InvalidArgument("reshape: cannot reshape " + dims_str(t.dims()) + " into " +
                          dims_str(new_dims));
  return ComplexTensor(std::move(new_dims), t.buffer());
}

CMatrix unfold_cpd(const ComplexTensor& t, std::size_t n) {
  if (n < 1 || n >= t.order())
    throw InvalidArgument("unfold_cpd: n must satisfy 1 <= n < N, got " + std::to_string(n));
  const auto& d = t.dims();
  const std::size_t rows = product(std::span(d).first(n));
  return t.as_matrix(rows, t.size() / rows);
}

ComplexTensor fold_cpd(const CMatrix& m, std::size_t n, const Dims& dims) {
  check_dims(dims);
  if (n < 1 || n >= dims.size()) throw InvalidArgument("fold_cpd: n out of range");
  const std::size_t rows = product(std::span(dims).first(n));
  const std::size_t cols = product(dims) / rows;
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols)
    throw InvalidArgument("fold_cpd: matrix shape does not match dims " + dims_str(dims));
  ComplexTensor out(dims);
  Eigen::Map<CMatrix>(out.data().data(), m.rows(), m.cols()) = m;
  return out;
}

CMatrix unfold_mode(const ComplexTensor& t, std::size_t n) {
  check_mode(t, n, "unfold_mode");
  const auto& d = t.dims();
  const auto seq = mode_column_order(t.order(), n);
  std::vector<std::size_t> stride(t.order(), 0);
  std::size_t s = 1;
  for (auto m : seq) {
    stride[m] = s;
    s *= d[m];
  }
  CMatrix out(static_cast<Eigen::Index>(d[n - 1]), static_cast<Eigen::Index>(s));
  Dims idx(t.order(), 0);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    std::size_t col = 0;
    for (std::size_t m = 0; m < t.order(); ++m)
      if (m != n - 1) col += idx[m] * stride[m];
    out(static_cast<Eigen::Index>(idx[n - 1]), static_cast<Eigen::Index>(col)) = t[flat];
    for (std::size_t m = 0; m < t.order() && ++idx[m] == d[m]; ++m) idx[m] = 0;
  }
  return out;
}

ComplexTensor fold_mode(const CMatrix& m, std::size_t n, const Dims& dims) {
  check_dims(dims);
  if (n < 1 || n > dims.size()) throw InvalidArgument("fold_mode: n out of range");
  if (static_cast<std::size_t>(m.rows()) != dims[n - 1] ||
      static_cast<std::size_t>(m.rows() * m.cols()) != product(dims))
    throw InvalidArgument("fold_mode: matrix shape does not match dims " + dims_str(dims));
  const auto seq = mode_column_order(dims.size(), n);
  std::vector<std::size_t> stride(dims.size(), 0);
  std::size_t s = 1;
  for (auto k : seq) {
    stride[k] = s;
    s *= dims[k];
  }
  ComplexTensor out(dims);
  Dims idx(dims.size(), 0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    std::size_t col = 0;
    for (std::size_t k = 0; k < dims.size(); ++k)
      if (k != n - 1) col += idx[k] * stride[k];
    out[flat] = m(static_cast<Eigen::Index>(idx[n - 1]), static_cast<Eigen::Index>(col));
    for (std::size_t k = 0; k < dims.size() && ++idx[k] == dims[k]; ++k) idx[k] = 0;
  }
  return out;
}

ComplexTensor mode_product(const ComplexTensor& t, const CMatrix& m, std::size_t n) {
  check_mode(t, n, "mode_product");
  const Split s = split_at(t.dims(), n);
  if (static_cast<std::size_t>(m.cols()) != s.mid)
    throw InvalidArgument("mode_product: matrix has " + std::to_string(m.cols()) +
                          " columns, mode " + std::to_string(n) + " has size " +
                          std::to_string(s.mid));
  Dims out_dims = t.dims();
  out_dims[n - 1] = static_cast<std::size_t>(m.rows());
  ComplexTensor out(out_dims);
  const auto L = static_cast<Eigen::Index>(s.left);
  const auto I = static_cast<Eigen::Index>(s.mid);
  const auto J = m.rows();
  const CMatrix mt = m.transpose();
  for (std::size_t b = 0; b < s.right; ++b) {
    Eigen::Map<const CMatrix> in_blk(t.data().data() + b * s.left * s.mid, L, I);
    Eigen::Map<CMatrix> out_blk(out.data().data() + b * s.left * static_cast<std::size_t>(J), L, J);
    out_blk.noalias() = in_blk * mt;
  }
  return out;
}

ComplexTensor contract(const ComplexTensor& a, const ComplexTensor& b, std::size_t p,
                       std::size_t q) {
  check_mode(a, p, "contract");
  check_mode(b, q, "contract");
  if (a.dim(p) != b.dim(q))
    throw InvalidArgument("contract: contracted lengths differ (" + std::to_string(a.dim(p)) +
                          " vs " + std::to_string(b.dim(q)) + ")");
  const Split sa = split_at(a.dims(), p);
  const Split sb = split_at(b.dims(), q);
  const auto K = static_cast<Eigen::Index>(sa.mid);

  // Amat(a1 + A1 a2, k) = A(a1, k, a2); Bmat(k, b1 + B1 b2) = B(b1, k, b2).
  CMatrix amat(static_cast<Eigen::Index>(sa.left * sa.right), K);
  for (std::size_t r = 0; r < sa.right; ++r)
    for (Eigen::Index k = 0; k < K; ++k)
      for (std::size_t l = 0; l < sa.left; ++l)
        amat(static_cast<Eigen::Index>(l + sa.left * r), k) =
            a[l + sa.left * (static_cast<std::size_t>(k) + sa.mid * r)];
  CMatrix bmat(K, static_cast<Eigen::Index>(sb.left * sb.right));
  for (std::size_t r = 0; r < sb.right; ++r)
    for (Eigen::Index k = 0; k < K; ++k)
      for (std::size_t l = 0; l < sb.left; ++l)
        bmat(k, static_cast<Eigen::Index>(l + sb.left * r)) =
            b[l + sb.left * (static_cast<std::size_t>(k) + sb.mid * r)];

  Dims out_dims;
  for (std::size_t m = 1; m <= a.order(); ++m)
    if (m != p) out_dims.push_back(a.dim(m));
  for (std::size_t m = 1; m <= b.order(); ++m)
    if (m != q) out_dims.push_back(b.dim(m));
  if (out_dims.empty()) out_dims.push_back(1);

  const CMatrix prod = amat * bmat;
  return ComplexTensor(out_dims, std::vector<cplx>(prod.data(), prod.data() + prod.size()));
}

ComplexTensor concat(std::span<const ComplexTensor> ts, std::size_t mode) {
  if (ts.empty()) throw InvalidArgument("concat: empty input");
  const std::size_t order = ts.front().order();
  if (mode < 1 || mode > order + 1) throw InvalidArgument("concat: mode out of range");

  auto padded = [&](const ComplexTensor& t) {
    Dims d = t.dims();
    if (mode == order + 1) d.push_back(1);
    return d;
  };
  const Dims ref = padded(ts.front());
  std::size_t total = 0;
  for (const auto& t : ts) {
    if (t.order() != order) throw InvalidArgument("concat: order mismatch");
    const Dims d = padded(t);
    for (std::size_t m = 0; m < d.size(); ++m)
      if (m != mode - 1 && d[m] != ref[m])
        throw InvalidArgument("concat: dims differ outside the concatenation mode");
    total += d[mode - 1];
  }
  Dims out_dims = ref;
  out_dims[mode - 1] = total;
  ComplexTensor out(out_dims);
  const Split so = split_at(out_dims, mode);

  std::size_t offset = 0;
  for (const auto& t : ts) {
    const Split st = split_at(padded(t), mode);
    for (std::size_t r = 0; r < st.right; ++r)
      for (std::size_t k = 0; k < st.mid; ++k) {
        const cplx* src = t.data().data() + st.left * (k + st.mid * r);
        cplx* dst = out.data().data() + so.left * (offset + k + so.mid * r);
        std::copy(src, src + st.left, dst);
      }
    offset += st.mid;
  }
  return out;
}

CMatrix khatri_rao(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.cols())
    throw InvalidArgument("khatri_rao: column counts differ (" + std::to_string(a.cols()) +
                          " vs " + std::to_string(b.cols()) + ")");
  CMatrix out(a.rows() * b.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.cols(); ++r)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.col(r).segment(i * b.rows(), b.rows()) = a(i, r) * b.col(r);
  return out;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexTensor outer(std::span<const CVector> vs) {
  if (vs.empty()) throw InvalidArgument("outer: no vectors");
  Dims dims;
  for (const auto& v : vs) dims.push_back(static_cast<std::size_t>(v.size()));
  ComplexTensor out(dims);
  Dims idx(dims.size(), 0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    cplx v{1.0, 0.0};
    for (std::size_t m = 0; m < dims.size(); ++m) v *= vs[m](static_cast<Eigen::Index>(idx[m]));
    out[flat] = v;
    for (std::size_t m = 0; m < dims.size() && ++idx[m] == dims[m]; ++m) idx[m] = 0;
  }
  return out;
}

ComplexTensor diagonal_tensor(std::span<const cplx> weights, std::size_t order) {
  if (weights.empty() || order == 0) throw InvalidArgument("diagonal_tensor: empty");
  const std::size_t r = weights.size();
  ComplexTensor out(Dims(order, r));
  std::size_t step = 0, stride = 1;
  for (std::size_t m = 0; m < order; ++m) {
    step += stride;
    stride *= r;
  }
  for (std::size_t k = 0; k < r; ++k) out[k * step] = weights[k];
  return out;
}

ComplexTensor identity_tensor(std::size_t order, std::size_t size) {
  std::vector<cplx> ones(size, cplx{1.0, 0.0});
  return diagonal_tensor(ones, order);
}

}  // namespace ttradar
