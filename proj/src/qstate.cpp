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

#include "qscmc/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qscmc/error.hpp"
#include "qscmc/simd/kernels.hpp"

namespace qscmc {

namespace {

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidInput(std::string(what) + ": expected a non-empty square matrix");
  }
}

void require_dims(const CMatrix& rho, const BipartiteDims& dims) {
  require_square(rho, "bipartite operation");
  if (dims.a == 0 || dims.b == 0 || dims.total() != static_cast<std::size_t>(rho.rows())) {
    throw InvalidInput("bipartite dims " + std::to_string(dims.a) + "x" + std::to_string(dims.b) +
                       " do not match matrix dimension " + std::to_string(rho.rows()));
  }
}

}  // namespace

CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) * 0.5; }

double hermiticity_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// -- DensityMatrix --------------------------------------------------------------------

DensityMatrix DensityMatrix::from_matrix(CMatrix m, double tolerance) {
  require_square(m, "DensityMatrix");
  if (const double defect = hermiticity_defect(m); defect > tolerance) {
    throw InvalidInput("matrix is not Hermitian (defect " + std::to_string(defect) + ")");
  }
  const double trace = m.trace().real();
  if (std::abs(trace - 1.0) > kTraceTolerance) {
    throw InvalidInput("matrix trace " + std::to_string(trace) + " differs from 1");
  }
  return DensityMatrix(hermitian_part(m));
}

DensityMatrix DensityMatrix::from_trusted(CMatrix m) { return DensityMatrix(hermitian_part(m)); }

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  if (dim == 0) {
    throw InvalidInput("dimension must be positive");
  }
  CMatrix m = CMatrix::Identity(dim, dim) / static_cast<double>(dim);
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::pure(const CVector& psi) {
  const double norm = psi.norm();
  if (psi.size() == 0 || norm == 0.0) {
    throw InvalidInput("pure state needs a non-zero vector");
  }
  const CVector v = psi / norm;
  CMatrix m = v * v.adjoint();
  return DensityMatrix(hermitian_part(m));
}

DensityMatrix DensityMatrix::from_interleaved(std::span<const double> values, std::size_t dim) {
  if (values.size() != 2 * dim * dim) {
    throw InvalidInput("interleaved array has " + std::to_string(values.size()) +
                       " entries, expected " + std::to_string(2 * dim * dim));
  }
  CMatrix m(dim, dim);
  std::copy(values.begin(), values.end(), reinterpret_cast<double*>(m.data()));
  return from_matrix(std::move(m), 1e-9);
}

bool DensityMatrix::is_physical(double tolerance) const { return min_eigenvalue(m_) >= -tolerance; }

std::vector<double> DensityMatrix::to_interleaved() const {
  const auto* raw = reinterpret_cast<const double*>(m_.data());
  return {raw, raw + 2 * m_.size()};
}

// -- Pom ------------------------------------------------------------------------------

Pom::Pom(std::vector<CMatrix> outcomes, Field field) : outcomes_(std::move(outcomes)), field_(field) {
  if (outcomes_.empty()) {
    throw InvalidPom("POM needs at least one outcome");
  }
  dim_ = static_cast<std::size_t>(outcomes_.front().rows());
  CMatrix sum = CMatrix::Zero(dim_, dim_);
  for (const CMatrix& p : outcomes_) {
    if (p.rows() != p.cols() || static_cast<std::size_t>(p.rows()) != dim_) {
      throw InvalidPom("POM outcomes must share one square dimension");
    }
    if (hermiticity_defect(p) > kHermitianTolerance) {
      throw InvalidPom("POM outcome is not Hermitian");
    }
    if (field_ == Field::Real && p.imag().cwiseAbs().maxCoeff() > kHermitianTolerance) {
      throw InvalidPom("real POM has complex entries");
    }
    if (hermitian_eigenvalues(p)(0) < -1e-12) {
      throw InvalidPom("POM outcome is not positive semidefinite");
    }
    sum += p;
  }
  if ((sum - CMatrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff() > 1e-10) {
    throw InvalidPom("POM outcomes do not sum to the identity");
  }
  const std::size_t width = 2 * dim_ * dim_;
  rows_.resize(static_cast<Eigen::Index>(outcomes_.size()), static_cast<Eigen::Index>(width));
  for (std::size_t k = 0; k < outcomes_.size(); ++k) {
    const auto* raw = reinterpret_cast<const double*>(outcomes_[k].data());
    std::copy(raw, raw + width, rows_.row(static_cast<Eigen::Index>(k)).data());
  }
}

// -- kernels --------------------------------------------------------------------------

Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double min_eigenvalue(const CMatrix& m) {
  require_square(m, "min_eigenvalue");
  if (const double defect = hermiticity_defect(m); defect > kHermitianTolerance) {
    throw InvalidInput("min_eigenvalue: matrix is not Hermitian (defect " + std::to_string(defect) +
                       ")");
  }
  return hermitian_eigenvalues(m)(0);
}

double min_eigenvalue(const DensityMatrix& rho) { return min_eigenvalue(rho.matrix()); }

CMatrix partial_transpose(const CMatrix& rho, const BipartiteDims& dims) {
  require_dims(rho, dims);
  const auto da = static_cast<Eigen::Index>(dims.a);
  const auto db = static_cast<Eigen::Index>(dims.b);
  CMatrix out(rho.rows(), rho.cols());
  for (Eigen::Index i = 0; i < da; ++i) {
    for (Eigen::Index j = 0; j < da; ++j) {
      out.block(i * db, j * db, db, db) = rho.block(i * db, j * db, db, db).transpose();
    }
  }
  return out;
}

CMatrix partial_transpose(const DensityMatrix& rho, const BipartiteDims& dims) {
  return partial_transpose(rho.matrix(), dims);
}

double min_pt_eigenvalue(const CMatrix& rho, const BipartiteDims& dims) {
  return hermitian_eigenvalues(hermitian_part(partial_transpose(rho, dims)))(0);
}

double min_pt_eigenvalue(const DensityMatrix& rho, const BipartiteDims& dims) {
  return min_pt_eigenvalue(rho.matrix(), dims);
}

CMatrix realign(const CMatrix& rho, const BipartiteDims& dims) {
  require_dims(rho, dims);
  const auto da = static_cast<Eigen::Index>(dims.a);
  const auto db = static_cast<Eigen::Index>(dims.b);
  CMatrix out(da * da, db * db);
  for (Eigen::Index i = 0; i < da; ++i) {
    for (Eigen::Index j = 0; j < da; ++j) {
      for (Eigen::Index k = 0; k < db; ++k) {
        for (Eigen::Index l = 0; l < db; ++l) {
          out(i * da + j, k * db + l) = rho(i * db + k, j * db + l);
        }
      }
    }
  }
  return out;
}

double ccnr_value(const CMatrix& rho, const BipartiteDims& dims) {
  const Eigen::MatrixXcd r = realign(rho, dims);
  const auto m = r.rows();
  const auto n = r.cols();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m + n, m + n);
  h.topRightCorner(m, n) = r;
  h.bottomLeftCorner(n, m) = r.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double ccnr_value_svd(const CMatrix& rho, const BipartiteDims& dims) {
  const Eigen::MatrixXcd r = realign(rho, dims);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r);
  return svd.singularValues().sum();
}

double ccnr_value(const DensityMatrix& rho, const BipartiteDims& dims) {
  return ccnr_value(rho.matrix(), dims);
}

void pom_probabilities(const CMatrix& rho, const Pom& pom, std::span<double> out) {
  if (static_cast<std::size_t>(rho.rows()) != pom.dim() || rho.rows() != rho.cols()) {
    throw InvalidInput("POM dimension " + std::to_string(pom.dim()) +
                       " does not match state dimension " + std::to_string(rho.rows()));
  }
  if (out.size() != pom.size()) {
    throw InvalidInput("probability buffer has the wrong length");
  }
  const RMatrix& rows = pom.probability_rows();
  simd::active_kernels().affine_gemv(rows.data(), static_cast<std::size_t>(rows.rows()),
                                     static_cast<std::size_t>(rows.cols()),
                                     reinterpret_cast<const double*>(rho.data()), nullptr,
                                     out.data());
}

std::vector<double> pom_probabilities(const DensityMatrix& rho, const Pom& pom) {
  std::vector<double> p(pom.size());
  pom_probabilities(rho.matrix(), pom, p);
  return p;
}

// -- constructions --------------------------------------------------------------------

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix pauli(int index) {
  CMatrix m = CMatrix::Zero(2, 2);
  const Complex i{0.0, 1.0};
  switch (index) {
    case 0:
      m(0, 0) = 1.0;
      m(1, 1) = 1.0;
      break;
    case 1:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case 2:
      m(0, 1) = -i;
      m(1, 0) = i;
      break;
    case 3:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
    default:
      throw InvalidInput("pauli index must be 0..3");
  }
  return m;
}

Pom build_product_tetrahedron_pom(std::size_t n_qubits) {
  if (n_qubits == 0) {
    throw InvalidInput("tetrahedron POM needs at least one qubit");
  }
  const double s = 1.0 / std::numbers::sqrt3;
  const double vertices[4][3] = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  std::vector<CMatrix> single;
  for (const auto& a : vertices) {
    CMatrix p = pauli(0) + a[0] * pauli(1) + a[1] * pauli(2) + a[2] * pauli(3);
    single.push_back(p / 4.0);
  }
  std::vector<CMatrix> outcomes = single;
  for (std::size_t q = 1; q < n_qubits; ++q) {
    std::vector<CMatrix> next;
    next.reserve(outcomes.size() * 4);
    for (const CMatrix& left : outcomes) {
      for (const CMatrix& right : single) {
        next.push_back(kron(left, right));
      }
    }
    outcomes = std::move(next);
  }
  return Pom(std::move(outcomes), Field::Complex);
}

Pom build_trine_pom() {
  std::vector<CMatrix> outcomes;
  for (int k = 0; k < 3; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 3.0;
    CMatrix p = pauli(0) + std::sin(t) * pauli(1) + std::cos(t) * pauli(3);
    outcomes.push_back(p / 3.0);
  }
  return Pom(std::move(outcomes), Field::Real);
}

Pom build_computational_pom(std::size_t dim) {
  std::vector<CMatrix> outcomes;
  for (std::size_t k = 0; k < dim; ++k) {
    CMatrix p = CMatrix::Zero(dim, dim);
    p(k, k) = 1.0;
    outcomes.push_back(std::move(p));
  }
  return Pom(std::move(outcomes), Field::Complex);
}

}  // namespace qscmc
