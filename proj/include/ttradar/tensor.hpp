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

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ttradar {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

std::size_t product(std::span<const std::size_t> dims);

// Column-major index bookkeeping between a flat buffer and multi-indices.
//
// Element (a_1, ..., a_P) of a tensor with dims A_1..A_P lives at flat offset
//   a_1 + A_1 (a_2 - 1) + ... + A_1 ... A_{P-1} (a_P - 1) - 1
// when indices are 1-based. All 1-based <-> 0-based conversion goes through
// this class; storage and operator() are 0-based.
class IndexMap {
 public:
  IndexMap(Dims source, Dims target);

  const Dims& source() const noexcept { return source_; }
  const Dims& target() const noexcept { return target_; }

  // Maps a 1-based source multi-index to the 1-based target multi-index that
  // shares its flat offset.
  Dims map(std::span<const std::size_t> source_index) const;

  static std::size_t linear(std::span<const std::size_t> dims,
                            std::span<const std::size_t> index);
  static Dims unravel(std::span<const std::size_t> dims, std::size_t flat);
  static std::size_t linear_one_based(std::span<const std::size_t> dims,
                                      std::span<const std::size_t> index);
  static Dims unravel_one_based(std::span<const std::size_t> dims, std::size_t flat);

 private:
  Dims source_;
  Dims target_;
};

// Dense N-order complex tensor, column-major.
class ComplexTensor {
 public:
  ComplexTensor() = default;
  explicit ComplexTensor(Dims dims);
  ComplexTensor(Dims dims, std::vector<cplx> data);

  static ComplexTensor from_matrix(const CMatrix& m);
  static ComplexTensor from_vector(std::span<const cplx> v);

  std::size_t order() const noexcept { return dims_.size(); }
  const Dims& dims() const noexcept { return dims_; }
  // 1-based mode number.
  std::size_t dim(std::size_t mode) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const cplx> data() const noexcept { return data_; }
  std::span<cplx> data() noexcept { return data_; }
  const std::vector<cplx>& buffer() const noexcept { return data_; }

  cplx operator[](std::size_t flat) const { return data_[flat]; }
  cplx& operator[](std::size_t flat) { return data_[flat]; }

  // 0-based element access.
  cplx operator()(std::initializer_list<std::size_t> index) const;
  cplx& operator()(std::initializer_list<std::size_t> index);
  cplx at(std::span<const std::size_t> index) const;

  double norm() const;
  double squared_norm() const;

  // Interprets the flat buffer as a (rows x cols) column-major matrix.
  CMatrix as_matrix(std::size_t rows, std::size_t cols) const;

  ComplexTensor conj() const;
  ComplexTensor& operator+=(const ComplexTensor& other);
  ComplexTensor& operator-=(const ComplexTensor& other);
  ComplexTensor& operator*=(cplx s);

  friend bool operator==(const ComplexTensor&, const ComplexTensor&) = default;

 private:
  Dims dims_;
  std::vector<cplx> data_;
};

ComplexTensor operator+(ComplexTensor a, const ComplexTensor& b);
ComplexTensor operator-(ComplexTensor a, const ComplexTensor& b);
ComplexTensor operator*(cplx s, ComplexTensor a);

// Frobenius inner product <a, b> = sum conj(a) b.
cplx inner(const ComplexTensor& a, const ComplexTensor& b);
double relative_error(const ComplexTensor& approx, const ComplexTensor& reference);

ComplexTensor reshape(const ComplexTensor& t, Dims new_dims);

// <n> unfolding: (I_1 ... I_n) x (I_{n+1} ... I_N), n in [1, N).
CMatrix unfold_cpd(const ComplexTensor& t, std::size_t n);
ComplexTensor fold_cpd(const CMatrix& m, std::size_t n, const Dims& dims);

// (n) unfolding: I_n x (remaining modes). Columns are ordered so that
//   (X x_1 S_1 ... x_N S_N)_(n) = S_n X_(n) (S_{n+1} (x) ... (x) S_N (x) S_1 (x) ... (x) S_{n-1})^T
// holds with the standard Kronecker product, i.e. i_{n-1} runs fastest and
// i_{n+1} slowest.
CMatrix unfold_mode(const ComplexTensor& t, std::size_t n);
ComplexTensor fold_mode(const CMatrix& m, std::size_t n, const Dims& dims);

// t x_n M with M of shape (J x I_n).
ComplexTensor mode_product(const ComplexTensor& t, const CMatrix& m, std::size_t n);

// a x^q_p b: contracts mode p of a with mode q of b. The result carries the
// remaining modes of a followed by the remaining modes of b.
ComplexTensor contract(const ComplexTensor& a, const ComplexTensor& b, std::size_t p,
                       std::size_t q);

// Concatenation along `mode` (1-based). `mode` may be order + 1, in which case
// every input gains a trailing singleton mode first.
ComplexTensor concat(std::span<const ComplexTensor> ts, std::size_t mode);

CMatrix khatri_rao(const CMatrix& a, const CMatrix& b);
CMatrix kron(const CMatrix& a, const CMatrix& b);
ComplexTensor outer(std::span<const CVector> vs);

// Order-n diagonal tensor with the given weights on its superdiagonal.
ComplexTensor diagonal_tensor(std::span<const cplx> weights, std::size_t order);
ComplexTensor identity_tensor(std::size_t order, std::size_t size);

}  // namespace ttradar
