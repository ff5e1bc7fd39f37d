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

#ifndef QSCMC_QSTATE_HPP
#define QSCMC_QSTATE_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

/**
 * \file
 * \brief Density matrices, bipartite structure, POMs and the linear-algebra kernels
 * (eigenvalues, partial transpose, realignment, outcome probabilities).
 *
 * Matrices are stored row-major so that the raw storage of a d x d matrix is the
 * row-major interleaved (re, im) array used by every serialization format.
 */

namespace qscmc {

using Complex = std::complex<double>;
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
using RMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kPhysicalTolerance = 1e-10;

/// Real or complex matrix entries. Real (rebit) state spaces hold real symmetric matrices.
enum class Field { Complex, Real };

/// A d x d Hermitian unit-trace matrix. Positivity is not part of the type; ask
/// `is_physical()`.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  /// Validates Hermiticity and unit trace, then symmetrizes.
  /// \throws InvalidInput when either check fails.
  static DensityMatrix from_matrix(CMatrix m, double tolerance = kHermitianTolerance);

  /// Skips validation; symmetrizes and leaves the trace as is. For hot paths whose
  /// construction already guarantees the invariants.
  static DensityMatrix from_trusted(CMatrix m);

  static DensityMatrix maximally_mixed(std::size_t dim);
  static DensityMatrix pure(const CVector& psi);
  static DensityMatrix from_interleaved(std::span<const double> values, std::size_t dim);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const CMatrix& matrix() const noexcept { return m_; }

  bool is_physical(double tolerance = kPhysicalTolerance) const;

  /// Row-major interleaved (re, im) copy of the entries.
  std::vector<double> to_interleaved() const;

 private:
  explicit DensityMatrix(CMatrix m) : m_(std::move(m)) {}
  CMatrix m_;
};

struct BipartiteDims {
  std::size_t a = 1;
  std::size_t b = 1;

  std::size_t total() const noexcept { return a * b; }
};

/// Probability-operator measurement: positive operators summing to the identity.
class Pom {
 public:
  /// \throws InvalidPom when an outcome is not PSD (-1e-12) or the sum differs from the
  /// identity by more than 1e-10 in any entry.
  Pom(std::vector<CMatrix> outcomes, Field field = Field::Complex);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return outcomes_.size(); }
  Field field() const noexcept { return field_; }
  const CMatrix& operator[](std::size_t k) const { return outcomes_[k]; }
  const std::vector<CMatrix>& outcomes() const noexcept { return outcomes_; }

  /// K x 2d^2 matrix whose row k is the interleaved storage of outcome k, so that
  /// p = rows * interleaved(rho).
  const RMatrix& probability_rows() const noexcept { return rows_; }

 private:
  std::vector<CMatrix> outcomes_;
  Field field_;
  std::size_t dim_ = 0;
  RMatrix rows_;
};

/// (rho + rho^dagger) / 2
CMatrix hermitian_part(const CMatrix& m);

/// Largest |m - m^dagger| entry.
double hermiticity_defect(const CMatrix& m);

/// All eigenvalues in ascending order (Hermitian solver).
Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m);

/// Smallest eigenvalue of a Hermitian matrix.
/// \throws InvalidInput for non-Hermitian input beyond 1e-12.
double min_eigenvalue(const CMatrix& m);
double min_eigenvalue(const DensityMatrix& rho);

/// Partial transpose on subsystem B. Entry ((i k),(j l)) moves to ((i l),(j k)).
/// \throws InvalidInput when dims.total() != rho.rows().
CMatrix partial_transpose(const CMatrix& rho, const BipartiteDims& dims);
CMatrix partial_transpose(const DensityMatrix& rho, const BipartiteDims& dims);

double min_pt_eigenvalue(const CMatrix& rho, const BipartiteDims& dims);
double min_pt_eigenvalue(const DensityMatrix& rho, const BipartiteDims& dims);

/// Realigned matrix, shape d_A^2 x d_B^2, entry ((i j),(k l)) = rho((i k),(j l)).
/// For a product A (x) B this is vec(A) vec(B)^T with row-major vec.
CMatrix realign(const CMatrix& rho, const BipartiteDims& dims);

/// Sum of singular values of the realigned matrix (R in the CCNR criterion), read off
/// the Hermitian dilation [[0, M], [M^dagger, 0]] whose spectrum is {+-sigma_i}.
double ccnr_value(const CMatrix& rho, const BipartiteDims& dims);
double ccnr_value(const DensityMatrix& rho, const BipartiteDims& dims);

/// Same value through a Jacobi SVD; slower, used to re-verify accepted states.
double ccnr_value_svd(const CMatrix& rho, const BipartiteDims& dims);

/// p_k = Re tr(Pi_k rho).
/// \throws InvalidInput on dimension mismatch.
std::vector<double> pom_probabilities(const DensityMatrix& rho, const Pom& pom);

/// Writes the K probabilities of a raw matrix into `out` (no validation beyond sizes).
void pom_probabilities(const CMatrix& rho, const Pom& pom, std::span<double> out);

/// Tetrahedron POM on each of n qubits, tensored together (4^n outcomes).
///
/// The single-qubit outcomes are (1 + a_k . sigma) / 4 with Bloch vectors
/// a_1 = ( 1, 1, 1)/sqrt3, a_2 = ( 1,-1,-1)/sqrt3, a_3 = (-1, 1,-1)/sqrt3,
/// a_4 = (-1,-1, 1)/sqrt3. Outcome index is k = k_1 * 4^{n-1} + ... + k_n with qubit 1
/// the most significant tensor factor.
Pom build_product_tetrahedron_pom(std::size_t n_qubits);

/// Symmetric trine on the x-z great circle of a single qubit: (1 + n_k . sigma) / 3 with
/// n_k = (sin t_k, 0, cos t_k), t_k = 0, 2pi/3, 4pi/3. Real field: informationally
/// complete for rebit states.
Pom build_trine_pom();

/// Projective measurement in the computational basis.
Pom build_computational_pom(std::size_t dim);

/// Kronecker product of two matrices.
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Pauli matrices (I, X, Y, Z) by index 0..3.
CMatrix pauli(int index);

}  // namespace qscmc

#endif  // QSCMC_QSTATE_HPP
