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

#include <random>

#include "ttradar/tensor.hpp"

namespace ttradar::testing {

inline cplx rand_c(std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(g), n(g)};
}

inline CMatrix rand_mat(std::mt19937_64& g, Eigen::Index r, Eigen::Index c) {
  CMatrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rand_c(g);
  return m;
}

inline RMatrix rand_rmat(std::mt19937_64& g, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> n(0.0, 1.0);
  RMatrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(g);
  return m;
}

inline ComplexTensor rand_tensor(std::mt19937_64& g, Dims dims) {
  ComplexTensor t(std::move(dims));
  for (auto& v : t.data()) v = rand_c(g);
  return t;
}

inline double rel(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace ttradar::testing
