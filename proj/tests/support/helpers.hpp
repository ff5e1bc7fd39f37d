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

#ifndef QSCMC_TESTS_SUPPORT_HELPERS_HPP
#define QSCMC_TESTS_SUPPORT_HELPERS_HPP

// Test-side constructions that do not go through the library: explicit states, an own
// Ginibre generator, index-loop partial transpose and realignment.

#include <cmath>
#include <complex>
#include <cstddef>
#include <random>

#include <Eigen/Dense>

namespace qscmc::testing {

using Cd = std::complex<double>;
using Mat = Eigen::Matrix<Cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXcd;

inline Mat ginibre(std::size_t rows, std::size_t cols, std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      g(i, j) = Cd(n(gen), n(gen));
    }
  }
  return g;
}

/// Full-rank random state G G^dagger / tr.
inline Mat random_state(std::size_t d, std::mt19937_64& gen) {
  const Mat g = ginibre(d, d, gen);
  Mat rho = g * g.adjoint();
  rho /= rho.trace();
  return 0.5 * (rho + rho.adjoint());
}

inline Vec random_pure(std::size_t d, std::mt19937_64& gen) {
  Vec psi = ginibre(d, 1, gen).col(0);
  return psi / psi.norm();
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
inline Mat random_unitary(std::size_t d, std::mt19937_64& gen) {
  const Mat g = ginibre(d, d, gen);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    const Cd phase = r(i, i) / std::abs(r(i, i));
    q.col(i) *= phase;
  }
  return q;
}

inline Mat projector(const Vec& psi) { return psi * psi.adjoint(); }

/// |Phi+> = (|00> + |11>) / sqrt2.
inline Mat bell_state() {
  Vec psi = Vec::Zero(4);
  psi(0) = 1.0 / std::sqrt(2.0);
  psi(3) = 1.0 / std::sqrt(2.0);
  return projector(psi);
}

inline Mat kron_product(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Partial transpose on B by index loops: ((i k),(j l)) -> ((i l),(j k)).
inline Mat pt_oracle(const Mat& rho, std::size_t da, std::size_t db) {
  Mat out(rho.rows(), rho.cols());
  const auto a = static_cast<Eigen::Index>(da);
  const auto b = static_cast<Eigen::Index>(db);
  for (Eigen::Index i = 0; i < a; ++i) {
    for (Eigen::Index j = 0; j < a; ++j) {
      for (Eigen::Index k = 0; k < b; ++k) {
        for (Eigen::Index l = 0; l < b; ++l) {
          out(i * b + l, j * b + k) = rho(i * b + k, j * b + l);
        }
      }
    }
  }
  return out;
}

/// Realignment ((i j),(k l)) = rho((i k),(j l)), shape da^2 x db^2.
inline Mat realign_oracle(const Mat& rho, std::size_t da, std::size_t db) {
  const auto a = static_cast<Eigen::Index>(da);
  const auto b = static_cast<Eigen::Index>(db);
  Mat out(a * a, b * b);
  for (Eigen::Index i = 0; i < a; ++i) {
    for (Eigen::Index j = 0; j < a; ++j) {
      for (Eigen::Index k = 0; k < b; ++k) {
        for (Eigen::Index l = 0; l < b; ++l) {
          out(i * a + j, k * b + l) = rho(i * b + k, j * b + l);
        }
      }
    }
  }
  return out;
}

inline double trace_norm_oracle(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().sum();
}

inline double min_eig_oracle(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Random separable state: convex mixture of `terms` random product pure states.
inline Mat random_separable(std::size_t da, std::size_t db, std::size_t terms, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat rho = Mat::Zero(static_cast<Eigen::Index>(da * db), static_cast<Eigen::Index>(da * db));
  double total = 0.0;
  for (std::size_t t = 0; t < terms; ++t) {
    const double w = u(gen);
    rho += w * kron_product(projector(random_pure(da, gen)), projector(random_pure(db, gen)));
    total += w;
  }
  return rho / total;
}

}  // namespace qscmc::testing

#endif  // QSCMC_TESTS_SUPPORT_HELPERS_HPP
