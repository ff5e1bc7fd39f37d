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

#ifndef QSCMC_REFERENCE_HPP
#define QSCMC_REFERENCE_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qscmc/qstate.hpp"
#include "qscmc/rng.hpp"
#include "qscmc/state_space.hpp"

/**
 * \file
 * \brief Directly samplable reference distributions: Wishart-induced states (including the
 * flat Hilbert-Schmidt measure) and Dirichlet draws on a POM probability simplex.
 */

namespace qscmc {

/// Parameters of the quantum Wishart distribution W_d(n, Sigma).
///
/// rho = Z^dagger Z / tr(Z^dagger Z) with Z an n x d gaussian matrix of row covariance
/// Sigma. The density on unit-trace states is det(rho)^(n-d) / tr(Sigma^-1 rho)^(n d) for
/// complex entries and det(rho)^((n-d-1)/2) / tr(Sigma^-1 rho)^(n d / 2) for real ones.
/// n = d (complex) or n = d + 1 (real) with Sigma = 1 is the flat measure.
struct WishartParams {
  std::size_t dim = 1;
  std::size_t dof = 1;
  CMatrix covariance;
  Field field = Field::Complex;

  /// \throws InvalidParameter when dof < dim or sizes disagree.
  /// \throws InvalidCovariance when Sigma is not Hermitian positive definite.
  void validate() const;

  /// The flat (Hilbert-Schmidt) distribution for this field.
  static WishartParams uniform(std::size_t dim, Field field = Field::Complex);
};

/// Wishart sampler and log-density with the Cholesky factor and Sigma^-1 cached.
class WishartDistribution {
 public:
  explicit WishartDistribution(WishartParams params);

  const WishartParams& params() const noexcept { return params_; }

  DensityMatrix sample(RngStream& rng) const;
  void sample_matrix(RngStream& rng, CMatrix& out) const;

  /// Log density up to an additive constant; -inf for singular rho when the det exponent
  /// is positive.
  double log_density(const CMatrix& rho) const;

  /// Exponent of det(rho).
  double det_exponent() const noexcept { return det_exponent_; }

 private:
  WishartParams params_;
  CMatrix cholesky_;
  CMatrix inverse_;
  double det_exponent_ = 0.0;
  double trace_exponent_ = 0.0;
};

/// Z = G L^dagger, with G i.i.d. standard complex normal (unit total variance) or real
/// standard normal, and Sigma = L L^dagger.
/// \throws InvalidCovariance when the Cholesky factorization fails.
CMatrix sample_gaussian_matrix(std::size_t rows, std::size_t cols, const CMatrix& covariance,
                               RngStream& rng, Field field = Field::Complex);

DensityMatrix sample_wishart_state(const WishartParams& params, RngStream& rng);

/// (n-d) ln det(rho) - n d ln tr(Sigma^-1 rho) for complex entries (see WishartParams for
/// the real case).
double log_density_wishart(const DensityMatrix& rho, const WishartParams& params);

/// Dirichlet density proportional to prod_k p_k^alpha_k on the simplex (alpha_k > -1).
struct DirichletParams {
  std::vector<double> alphas;
  std::optional<std::vector<double>> center;

  /// \throws InvalidParameter for alpha_k <= -1 or an invalid center.
  void validate() const;

  /// Dirichlet whose mode is `center`, with total concentration sum_k (alpha_k + 1) equal
  /// to `concentration` (alpha_k = center_k * (concentration - K)).
  static DirichletParams centered(std::vector<double> center, double concentration);
};

/// \throws InvalidParameter as DirichletParams::validate.
std::vector<double> sample_dirichlet(const DirichletParams& params, RngStream& rng);

/// sum_k alpha_k ln p_k; -inf outside the closed simplex or where p_k = 0 with alpha_k > 0.
double log_density_dirichlet(std::span<const double> p, std::span<const double> alphas);

struct StateFromProbabilities {
  DensityMatrix state;
  bool physical = false;
};

/// The unique unit-trace Hermitian rho with tr(Pi_k rho) = p_k (least squares through the
/// pseudoinverse of the probability map), flagged physical when its smallest eigenvalue is
/// at least -1e-10.
/// \throws InvalidPom for a POM that is not informationally complete.
StateFromProbabilities dirichlet_to_state(std::span<const double> p, const Pom& pom);
StateFromProbabilities dirichlet_to_state(std::span<const double> p, const PomInverse& inverse);

/// Experimental affine post-transform rho <- (1 - t) rho + t rho0 (a linearly shifted
/// reference). 0 <= t <= 1.
struct AffineShift {
  double t = 0.0;
  DensityMatrix target;

  DensityMatrix apply(const DensityMatrix& rho) const;
};

}  // namespace qscmc

#endif  // QSCMC_REFERENCE_HPP
