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

#include "qscmc/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>

#include "qscmc/error.hpp"

namespace qscmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CMatrix cholesky_factor(const CMatrix& covariance) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
    throw InvalidCovariance("covariance must be a non-empty square matrix");
  }
  if (hermiticity_defect(covariance) > 1e-12) {
    throw InvalidCovariance("covariance is not Hermitian");
  }
  Eigen::LLT<Eigen::MatrixXcd> llt(Eigen::MatrixXcd(hermitian_part(covariance)));
  if (llt.info() != Eigen::Success) {
    throw InvalidCovariance("covariance is not positive definite (Cholesky failed)");
  }
  return llt.matrixL().toDenseMatrix();
}

}  // namespace

// -- Wishart ----------------------------------------------------------------------------

void WishartParams::validate() const {
  if (dim == 0) {
    throw InvalidParameter("Wishart dimension must be positive");
  }
  if (dof < dim) {
    throw InvalidParameter("Wishart degrees of freedom n = " + std::to_string(dof) +
                           " must be at least d = " + std::to_string(dim));
  }
  if (static_cast<std::size_t>(covariance.rows()) != dim || covariance.rows() != covariance.cols()) {
    throw InvalidParameter("Wishart covariance must be d x d");
  }
  if (field == Field::Real && covariance.imag().cwiseAbs().maxCoeff() > 0.0) {
    throw InvalidParameter("real Wishart needs a real covariance");
  }
  (void)cholesky_factor(covariance);
}

WishartParams WishartParams::uniform(std::size_t dim, Field field) {
  WishartParams p;
  p.dim = dim;
  p.dof = field == Field::Complex ? dim : dim + 1;
  p.covariance = CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  p.field = field;
  return p;
}

WishartDistribution::WishartDistribution(WishartParams params) : params_(std::move(params)) {
  params_.validate();
  cholesky_ = cholesky_factor(params_.covariance);
  inverse_ = Eigen::MatrixXcd(params_.covariance).inverse();
  const double n = static_cast<double>(params_.dof);
  const double d = static_cast<double>(params_.dim);
  if (params_.field == Field::Complex) {
    det_exponent_ = n - d;
    trace_exponent_ = n * d;
  } else {
    det_exponent_ = (n - d - 1.0) / 2.0;
    trace_exponent_ = n * d / 2.0;
  }
}

void WishartDistribution::sample_matrix(RngStream& rng, CMatrix& out) const {
  const auto n = static_cast<Eigen::Index>(params_.dof);
  const auto d = static_cast<Eigen::Index>(params_.dim);
  CMatrix g(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      g(i, j) = params_.field == Field::Complex ? rng.complex_normal() : Complex(rng.normal(), 0.0);
    }
  }
  const CMatrix z = g * cholesky_.adjoint();
  CMatrix w = z.adjoint() * z;
  const double trace = w.trace().real();
  out = hermitian_part(w / trace);
}

DensityMatrix WishartDistribution::sample(RngStream& rng) const {
  CMatrix m;
  sample_matrix(rng, m);
  return DensityMatrix::from_trusted(std::move(m));
}

double WishartDistribution::log_density(const CMatrix& rho) const {
  double value = 0.0;
  if (det_exponent_ != 0.0) {
    Eigen::LLT<Eigen::MatrixXcd> llt{Eigen::MatrixXcd(rho)};
    if (llt.info() != Eigen::Success) {
      return det_exponent_ > 0.0 ? -kInf : kInf;
    }
    const Eigen::MatrixXcd l = llt.matrixL();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      log_det += 2.0 * std::log(l(i, i).real());
    }
    value += det_exponent_ * log_det;
  }
  const double t = (inverse_ * rho).trace().real();
  if (!(t > 0.0)) {
    return -kInf;
  }
  return value - trace_exponent_ * std::log(t);
}

CMatrix sample_gaussian_matrix(std::size_t rows, std::size_t cols, const CMatrix& covariance,
                               RngStream& rng, Field field) {
  if (rows == 0 || cols == 0) {
    throw InvalidInput("gaussian matrix dimensions must be positive");
  }
  if (static_cast<std::size_t>(covariance.rows()) != cols) {
    throw InvalidCovariance("covariance must be cols x cols");
  }
  const CMatrix l = cholesky_factor(covariance);
  CMatrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      g(i, j) = field == Field::Complex ? rng.complex_normal() : Complex(rng.normal(), 0.0);
    }
  }
  return g * l.adjoint();
}

DensityMatrix sample_wishart_state(const WishartParams& params, RngStream& rng) {
  return WishartDistribution(params).sample(rng);
}

double log_density_wishart(const DensityMatrix& rho, const WishartParams& params) {
  if (rho.dim() != params.dim) {
    throw InvalidInput("state dimension does not match the Wishart parameters");
  }
  return WishartDistribution(params).log_density(rho.matrix());
}

// -- Dirichlet --------------------------------------------------------------------------

void DirichletParams::validate() const {
  if (alphas.empty()) {
    throw InvalidParameter("Dirichlet needs at least one component");
  }
  for (double a : alphas) {
    if (!(a > -1.0) || !std::isfinite(a)) {
      throw InvalidParameter("Dirichlet exponent " + std::to_string(a) + " must exceed -1");
    }
  }
  if (center) {
    if (center->size() != alphas.size()) {
      throw InvalidParameter("Dirichlet center has the wrong length");
    }
    const double sum = std::accumulate(center->begin(), center->end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-10 || std::any_of(center->begin(), center->end(), [](double c) { return c < 0.0; })) {
      throw InvalidParameter("Dirichlet center must be a probability vector");
    }
  }
}

DirichletParams DirichletParams::centered(std::vector<double> center, double concentration) {
  const double k = static_cast<double>(center.size());
  if (!(concentration >= k)) {
    throw InvalidParameter("centered Dirichlet needs concentration >= number of outcomes");
  }
  DirichletParams params;
  params.alphas.reserve(center.size());
  for (double c : center) {
    params.alphas.push_back(std::max(c, 0.0) * (concentration - k));
  }
  params.center = std::move(center);
  params.validate();
  return params;
}

std::vector<double> sample_dirichlet(const DirichletParams& params, RngStream& rng) {
  params.validate();
  // Log-domain gamma draws: for shape a < 1 use G(a) = G(a + 1) U^(1/a).
  std::vector<double> logs(params.alphas.size());
  for (std::size_t k = 0; k < logs.size(); ++k) {
    const double shape = params.alphas[k] + 1.0;
    if (shape < 1.0) {
      const double g = rng.gamma(shape + 1.0);
      double u = rng.uniform();
      while (u == 0.0) {
        u = rng.uniform();
      }
      logs[k] = std::log(g) + std::log(u) / shape;
    } else {
      logs[k] = std::log(rng.gamma(shape));
    }
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (double& v : logs) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : logs) {
    v /= total;
  }
  return logs;
}

double log_density_dirichlet(std::span<const double> p, std::span<const double> alphas) {
  if (p.size() != alphas.size()) {
    throw InvalidInput("probability vector and exponents differ in length");
  }
  double value = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] < 0.0) {
      return -kInf;
    }
    if (alphas[k] != 0.0) {
      value += alphas[k] * std::log(p[k]);
    }
  }
  return value;
}

StateFromProbabilities dirichlet_to_state(std::span<const double> p, const PomInverse& inverse) {
  CMatrix rho = inverse.reconstruct(p);
  const bool physical = min_eigenvalue(rho) >= -kPhysicalTolerance;
  return {DensityMatrix::from_trusted(std::move(rho)), physical};
}

StateFromProbabilities dirichlet_to_state(std::span<const double> p, const Pom& pom) {
  return dirichlet_to_state(p, PomInverse(pom));
}

DensityMatrix AffineShift::apply(const DensityMatrix& rho) const {
  if (t < 0.0 || t > 1.0) {
    throw InvalidParameter("shift fraction must lie in [0, 1]");
  }
  if (rho.dim() != target.dim()) {
    throw InvalidInput("shift target dimension mismatch");
  }
  return DensityMatrix::from_trusted((1.0 - t) * rho.matrix() + t * target.matrix());
}

}  // namespace qscmc
