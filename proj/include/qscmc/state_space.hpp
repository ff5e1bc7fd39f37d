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

#ifndef QSCMC_STATE_SPACE_HPP
#define QSCMC_STATE_SPACE_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "qscmc/qstate.hpp"

namespace qscmc {

/// Orthonormal (tr(B_i B_j) = delta_ij) Hermitian basis: identity/sqrt(d) first, then the
/// generalized Gell-Mann matrices (symmetric, antisymmetric when complex, diagonal).
/// Complex: d^2 elements. Real: d(d+1)/2 elements.
std::vector<CMatrix> hermitian_basis(std::size_t dim, Field field);

/// Number of real parameters of unit-trace states: d^2 - 1 or d(d+1)/2 - 1.
std::size_t state_space_dimension(std::size_t dim, Field field);

/// Affine chart of the unit-trace hyperplane. Lebesgue measure on the coordinates is the
/// Hilbert-Schmidt (flat) measure up to a constant, so densities carry over unchanged.
///
/// Two charts are provided:
///  - hermitian: rho = 1/d + sum_i x_i B_i over the traceless Gell-Mann elements;
///  - probability: x = (p_1, ..., p_{K-1}) of a minimal informationally complete POM, with
///    p_K = 1 - sum x; rho is the unique state reproducing p.
class StateMap {
 public:
  /// Empty chart; assign from a factory before use.
  StateMap() = default;
  static StateMap hermitian(std::size_t dim, Field field = Field::Complex);

  /// \throws InvalidPom unless the POM is informationally complete with exactly one more
  /// outcome than the number of state parameters.
  static StateMap probability(const Pom& pom);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t coordinate_dim() const noexcept { return static_cast<std::size_t>(directions_.cols()); }
  Field field() const noexcept { return field_; }
  bool is_probability_chart() const noexcept { return probability_; }

  /// Writes rho(x) into `out`, resizing it when needed.
  void to_matrix(std::span<const double> x, CMatrix& out) const;
  DensityMatrix to_state(std::span<const double> x) const;

  /// Coordinates of a unit-trace Hermitian matrix.
  void from_matrix(const CMatrix& rho, std::span<double> x) const;
  std::vector<double> coordinates(const DensityMatrix& rho) const;

 private:

  std::size_t dim_ = 0;
  Field field_ = Field::Complex;
  bool probability_ = false;
  RMatrix directions_;         // 2d^2 x m, interleaved storage per column
  Eigen::VectorXd offset_;     // 2d^2
  RMatrix inverse_;            // m x 2d^2
  Eigen::VectorXd inverse_offset_;
};

/// Least-squares inverse of the probability map of an informationally complete POM.
class PomInverse {
 public:
  /// \throws InvalidPom when the POM does not span the state space of its field.
  explicit PomInverse(const Pom& pom);

  /// Unit-trace Hermitian matrix whose probabilities best match p (exactly when p is in
  /// the image of the probability map).
  CMatrix reconstruct(std::span<const double> p) const;

  const Pom& pom() const noexcept { return pom_; }

 private:
  Pom pom_;
  std::vector<CMatrix> basis_;
  Eigen::MatrixXd pinv_;  // n x K
};

}  // namespace qscmc

#endif  // QSCMC_STATE_SPACE_HPP
