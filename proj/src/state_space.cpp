// Copyright 2026 The qscmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qscmc/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "qscmc/error.hpp"
#include "qscmc/simd/kernels.hpp"

namespace qscmc {

namespace {

const double* raw(const CMatrix& m) { return reinterpret_cast<const double*>(m.data()); }

void copy_interleaved(const CMatrix& m, double* dst) {
  std::copy(raw(m), raw(m) + 2 * m.size(), dst);
}

}  // namespace

std::vector<CMatrix> hermitian_basis(std::size_t dim, Field field) {
  if (dim == 0) {
    throw InvalidInput("dimension must be positive");
  }
  const auto d = static_cast<Eigen::Index>(dim);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<CMatrix> basis;
  basis.push_back(CMatrix::Identity(d, d) / std::sqrt(static_cast<double>(dim)));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = j + 1; k < d; ++k) {
      CMatrix s = CMatrix::Zero(d, d);
      s(j, k) = inv_sqrt2;
      s(k, j) = inv_sqrt2;
      basis.push_back(std::move(s));
      if (field == Field::Complex) {
        CMatrix a = CMatrix::Zero(d, d);
        a(j, k) = Complex(0.0, -inv_sqrt2);
        a(k, j) = Complex(0.0, inv_sqrt2);
        basis.push_back(std::move(a));
      }
    }
  }
  for (Eigen::Index l = 1; l < d; ++l) {
    CMatrix g = CMatrix::Zero(d, d);
    const double norm = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    for (Eigen::Index j = 0; j < l; ++j) {
      g(j, j) = norm;
    }
    g(l, l) = -static_cast<double>(l) * norm;
    basis.push_back(std::move(g));
  }
  return basis;
}

std::size_t state_space_dimension(std::size_t dim, Field field) {
  return field == Field::Complex ? dim * dim - 1 : dim * (dim + 1) / 2 - 1;
}

// -- PomInverse -------------------------------------------------------------------------

PomInverse::PomInverse(const Pom& pom) : pom_(pom), basis_(hermitian_basis(pom.dim(), pom.field())) {
  const auto k = static_cast<Eigen::Index>(pom.size());
  const auto n = static_cast<Eigen::Index>(basis_.size());
  if (k < n) {
    throw InvalidPom("POM with " + std::to_string(k) + " outcomes cannot span a " +
                     std::to_string(n) + "-dimensional operator space");
  }
  Eigen::MatrixXd t(k, n);
  for (Eigen::Index row = 0; row < k; ++row) {
    for (Eigen::Index col = 0; col < n; ++col) {
      t(row, col) = (pom[static_cast<std::size_t>(row)] * basis_[static_cast<std::size_t>(col)])
                        .trace()
                        .real();
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(t, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = 1e-10 * sv(0);
  if (sv(n - 1) <= cutoff) {
    throw InvalidPom("POM is not informationally complete (rank-deficient probability map)");
  }
  pinv_ = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

CMatrix PomInverse::reconstruct(std::span<const double> p) const {
  if (p.size() != pom_.size()) {
    throw InvalidInput("probability vector length " + std::to_string(p.size()) +
                       " does not match POM size " + std::to_string(pom_.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> pv(p.data(), static_cast<Eigen::Index>(p.size()));
  const Eigen::VectorXd c = pinv_ * pv;
  const auto d = static_cast<Eigen::Index>(pom_.dim());
  CMatrix rho = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    rho += c(static_cast<Eigen::Index>(i)) * basis_[i];
  }
  return hermitian_part(rho);
}

// -- StateMap ---------------------------------------------------------------------------

StateMap StateMap::hermitian(std::size_t dim, Field field) {
  const std::vector<CMatrix> basis = hermitian_basis(dim, field);
  const auto width = static_cast<Eigen::Index>(2 * dim * dim);
  const auto m = static_cast<Eigen::Index>(basis.size() - 1);
  StateMap map;
  map.dim_ = dim;
  map.field_ = field;
  map.directions_.resize(width, m);
  map.inverse_.resize(m, width);
  for (Eigen::Index i = 0; i < m; ++i) {
    const CMatrix& b = basis[static_cast<std::size_t>(i + 1)];
    for (Eigen::Index r = 0; r < width; ++r) {
      map.directions_(r, i) = raw(b)[r];
    }
    copy_interleaved(b, map.inverse_.row(i).data());
  }
  const CMatrix center = CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)) /
                         static_cast<double>(dim);
  map.offset_.resize(width);
  copy_interleaved(center, map.offset_.data());
  map.inverse_offset_ = Eigen::VectorXd::Zero(m);
  return map;
}

StateMap StateMap::probability(const Pom& pom) {
  const std::size_t n_space = state_space_dimension(pom.dim(), pom.field()) + 1;
  if (pom.size() != n_space) {
    throw InvalidPom("the probability chart needs a minimal informationally complete POM (" +
                     std::to_string(n_space) + " outcomes), got " + std::to_string(pom.size()));
  }
  const PomInverse inverse(pom);
  const std::size_t k = pom.size();
  // Dual frame: Q_j reproduces the unit vector e_j of probabilities.
  std::vector<CMatrix> dual;
  dual.reserve(k);
  std::vector<double> unit(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    std::fill(unit.begin(), unit.end(), 0.0);
    unit[j] = 1.0;
    dual.push_back(inverse.reconstruct(unit));
  }
  const std::size_t dim = pom.dim();
  const auto width = static_cast<Eigen::Index>(2 * dim * dim);
  const auto m = static_cast<Eigen::Index>(k - 1);
  StateMap map;
  map.dim_ = dim;
  map.field_ = pom.field();
  map.probability_ = true;
  map.directions_.resize(width, m);
  map.inverse_.resize(m, width);
  for (Eigen::Index j = 0; j < m; ++j) {
    const CMatrix diff = dual[static_cast<std::size_t>(j)] - dual.back();
    for (Eigen::Index r = 0; r < width; ++r) {
      map.directions_(r, j) = raw(diff)[r];
    }
    map.inverse_.row(j) = pom.probability_rows().row(j);
  }
  map.offset_.resize(width);
  copy_interleaved(dual.back(), map.offset_.data());
  map.inverse_offset_ = Eigen::VectorXd::Zero(m);
  return map;
}

void StateMap::to_matrix(std::span<const double> x, CMatrix& out) const {
  if (x.size() != coordinate_dim()) {
    throw InvalidInput("coordinate vector has length " + std::to_string(x.size()) + ", expected " +
                       std::to_string(coordinate_dim()));
  }
  const auto d = static_cast<Eigen::Index>(dim_);
  if (out.rows() != d || out.cols() != d) {
    out.resize(d, d);
  }
  simd::active_kernels().affine_gemv(directions_.data(), static_cast<std::size_t>(directions_.rows()),
                                     static_cast<std::size_t>(directions_.cols()), x.data(),
                                     offset_.data(), reinterpret_cast<double*>(out.data()));
}

DensityMatrix StateMap::to_state(std::span<const double> x) const {
  CMatrix m;
  to_matrix(x, m);
  return DensityMatrix::from_trusted(std::move(m));
}

void StateMap::from_matrix(const CMatrix& rho, std::span<double> x) const {
  if (static_cast<std::size_t>(rho.rows()) != dim_ || rho.rows() != rho.cols()) {
    throw InvalidInput("state dimension does not match the chart");
  }
  if (x.size() != coordinate_dim()) {
    throw InvalidInput("coordinate buffer has the wrong length");
  }
  simd::active_kernels().affine_gemv(inverse_.data(), static_cast<std::size_t>(inverse_.rows()),
                                     static_cast<std::size_t>(inverse_.cols()), raw(rho),
                                     inverse_offset_.data(), x.data());
}

std::vector<double> StateMap::coordinates(const DensityMatrix& rho) const {
  std::vector<double> x(coordinate_dim());
  from_matrix(rho.matrix(), x);
  return x;
}

}  // namespace qscmc
