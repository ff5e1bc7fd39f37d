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

#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "qscmc/error.hpp"
#include "qscmc/reference.hpp"
#include "qscmc/rng.hpp"
#include "qscmc/state_space.hpp"
#include "support/helpers.hpp"

using namespace qscmc;
using namespace qscmc::testing;

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(42, stream_key(StreamPurpose::kReference, 0, 7));
  RngStream b(42, stream_key(StreamPurpose::kReference, 0, 7));
  RngStream c(42, stream_key(StreamPurpose::kReference, 0, 8));
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    differs = differs || x != c.normal();
  }
  CHECK(differs);
}

TEST_CASE("gaussian matrix moments") {
  const CMatrix identity = CMatrix::Identity(2, 2);
  CMatrix second = CMatrix::Zero(2, 2);
  Complex mean = 0.0;
  constexpr int kDraws = 100000;
  for (int n = 0; n < kDraws; ++n) {
    RngStream rng(5, stream_key(StreamPurpose::kAux, 0, static_cast<std::uint64_t>(n)));
    const CMatrix z = sample_gaussian_matrix(3, 2, identity, rng);
    second += z.adjoint() * z / 3.0;
    mean += z.sum() / 6.0;
  }
  second /= kDraws;
  mean /= kDraws;
  CHECK((second - identity).cwiseAbs().maxCoeff() < 0.02);
  CHECK(std::abs(mean) < 0.02);

  RngStream r1(9, 1);
  RngStream r2(9, 1);
  CHECK((sample_gaussian_matrix(3, 2, identity, r1) - sample_gaussian_matrix(3, 2, identity, r2)).cwiseAbs().maxCoeff() ==
        0.0);

  CMatrix bad = CMatrix::Identity(2, 2);
  bad(1, 1) = -1.0;
  RngStream r3(1, 1);
  CHECK_THROWS_AS(sample_gaussian_matrix(3, 2, bad, r3), InvalidCovariance);
}

TEST_CASE("wishart states are physical and unitarily centred") {
  const WishartParams params = WishartParams::uniform(2);
  CHECK(params.dof == 2);
  CMatrix mean = CMatrix::Zero(2, 2);
  constexpr int kDraws = 100000;
  for (int n = 0; n < kDraws; ++n) {
    RngStream rng(6, stream_key(StreamPurpose::kReference, 0, static_cast<std::uint64_t>(n)));
    const DensityMatrix rho = sample_wishart_state(params, rng);
    if (n < 1000) {
      CHECK(std::abs(rho.matrix().trace() - Complex(1.0)) < 1e-12);
      CHECK(min_eigenvalue(rho) >= -1e-12);
    }
    mean += rho.matrix();
  }
  mean /= kDraws;
  CHECK((mean - 0.5 * CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("wishart log density examples") {
  std::mt19937_64 gen(31);
  const DensityMatrix rho = DensityMatrix::from_matrix(random_state(3, gen));
  WishartParams p = WishartParams::uniform(3);
  p.covariance = CMatrix::Identity(3, 3);
  p.covariance(0, 0) = 2.0;
  const double tr = (p.covariance.inverse() * rho.matrix()).trace().real();
  CHECK(log_density_wishart(rho, p) == doctest::Approx(-9.0 * std::log(tr)).epsilon(1e-13));

  WishartParams q = WishartParams::uniform(3);
  q.dof = 5;
  const double det = rho.matrix().determinant().real();
  CHECK(log_density_wishart(rho, q) == doctest::Approx(2.0 * std::log(det)).epsilon(1e-12));

  WishartParams r = WishartParams::uniform(2);
  r.dof = 3;
  CHECK(log_density_wishart(DensityMatrix::maximally_mixed(2), r) == doctest::Approx(-std::log(4.0)).epsilon(1e-14));

  CMatrix pure = CMatrix::Zero(2, 2);
  pure(0, 0) = 1.0;
  CHECK(log_density_wishart(DensityMatrix::from_matrix(pure), r) == -std::numeric_limits<double>::infinity());

  WishartParams bad = WishartParams::uniform(3);
  bad.dof = 2;
  CHECK_THROWS_AS(bad.validate(), InvalidParameter);
}

TEST_CASE("dirichlet sampling moments") {
  constexpr int kDraws = 100000;
  auto mean_of = [](const DirichletParams& params, std::uint64_t seed) {
    std::vector<double> mean(params.alphas.size(), 0.0);
    double second = 0.0;
    for (int n = 0; n < kDraws; ++n) {
      RngStream rng(seed, stream_key(StreamPurpose::kAux, 0, static_cast<std::uint64_t>(n)));
      const auto p = sample_dirichlet(params, rng);
      CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
      for (std::size_t k = 0; k < p.size(); ++k) {
        mean[k] += p[k] / kDraws;
      }
      second += p[0] * p[0] / kDraws;
    }
    return std::make_pair(mean, second);
  };
  const auto [flat, flat2] = mean_of(DirichletParams{{0.0, 0.0, 0.0}, std::nullopt}, 1);
  for (double m : flat) {
    CHECK(std::abs(m - 1.0 / 3.0) < 0.01);
  }
  const auto [peaked, peaked2] = mean_of(DirichletParams{{1802.0, 315.0, 303.0}, std::nullopt}, 2);
  CHECK(std::abs(peaked[0] - 1803.0 / 2423.0) < 0.005);
  CHECK(std::abs(peaked[1] - 316.0 / 2423.0) < 0.005);
  CHECK(std::abs(peaked[2] - 304.0 / 2423.0) < 0.005);
  const auto [line, line2] = mean_of(DirichletParams{{0.0, 0.0}, std::nullopt}, 3);
  CHECK(std::abs(line2 - line[0] * line[0] - 1.0 / 12.0) < 0.005);

  RngStream rng(1, 1);
  CHECK_THROWS_AS(sample_dirichlet(DirichletParams{{0.0, -1.0}, std::nullopt}, rng), InvalidParameter);
}

TEST_CASE("centred dirichlet has its mode at the centre") {
  const std::vector<double> center{0.6, 0.3, 0.1};
  const DirichletParams p = DirichletParams::centered(center, 53.0);
  const double total = std::accumulate(p.alphas.begin(), p.alphas.end(), 0.0);
  CHECK(total + 3.0 == doctest::Approx(53.0).epsilon(1e-14));
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(p.alphas[k] / total == doctest::Approx(center[k]).epsilon(1e-14));
  }
  CHECK_THROWS_AS(DirichletParams::centered(center, 2.0), InvalidParameter);
}

TEST_CASE("dirichlet log density") {
  const std::vector<double> alphas{2.0, 0.0, 1.0};
  const std::vector<double> p{0.5, 0.3, 0.2};
  CHECK(log_density_dirichlet(p, alphas) == doctest::Approx(2.0 * std::log(0.5) + std::log(0.2)).epsilon(1e-14));
  const std::vector<double> edge{0.8, 0.0, 0.2};
  CHECK(std::isfinite(log_density_dirichlet(edge, alphas)));
  const std::vector<double> outside{0.8, 0.3, -0.1};
  CHECK(log_density_dirichlet(outside, alphas) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("probabilities to states") {
  const Pom tetra = build_product_tetrahedron_pom(1);
  const std::vector<double> quarter(4, 0.25);
  const auto mixed = dirichlet_to_state(quarter, tetra);
  CHECK(mixed.physical);
  CHECK((mixed.state.matrix() - 0.5 * CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

  const std::vector<double> vertex{1.0, 0.0, 0.0, 0.0};
  const auto corner = dirichlet_to_state(vertex, tetra);
  CHECK_FALSE(corner.physical);
  // p_k = (1 + a_k . r) / 4 with a_j . a_k = -1/3 gives r = 3 a_1, eigenvalues (1 +- 3) / 2.
  CHECK(min_eigenvalue(corner.state) == doctest::Approx(-1.0).epsilon(1e-12));

  std::mt19937_64 gen(32);
  const Pom tetra2 = build_product_tetrahedron_pom(2);
  const PomInverse inverse(tetra2);
  for (int rep = 0; rep < 20; ++rep) {
    const DensityMatrix rho = DensityMatrix::from_matrix(random_state(4, gen));
    const auto p = pom_probabilities(rho, tetra2);
    const auto back = dirichlet_to_state(p, inverse);
    CHECK(back.physical);
    CHECK((back.state.matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-8);
    const auto p2 = pom_probabilities(back.state, tetra2);
    for (std::size_t k = 0; k < p.size(); ++k) {
      CHECK(std::abs(p2[k] - p[k]) < 1e-8);
    }
  }
  const std::vector<double> half{0.5, 0.5};
  CHECK_THROWS_AS(dirichlet_to_state(half, build_computational_pom(2)), InvalidPom);
}

TEST_CASE("affine shift") {
  CMatrix pure = CMatrix::Zero(2, 2);
  pure(0, 0) = 1.0;
  const AffineShift shift{0.25, DensityMatrix::maximally_mixed(2)};
  const DensityMatrix out = shift.apply(DensityMatrix::from_matrix(pure));
  CHECK(out.matrix()(0, 0).real() == doctest::Approx(0.875).epsilon(1e-14));
  CHECK(out.matrix()(1, 1).real() == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("property: flat 3x3 draws almost never satisfy the double criterion") {
  const WishartDistribution flat(WishartParams::uniform(9));
  const BipartiteDims dims{3, 3};
  constexpr int kDraws = 100000;
  int both = 0;
  CMatrix rho;
  for (int n = 0; n < kDraws; ++n) {
    RngStream rng(8, stream_key(StreamPurpose::kReference, 0, static_cast<std::uint64_t>(n)));
    flat.sample_matrix(rng, rho);
    if (min_pt_eigenvalue(rho, dims) >= 0.0 && ccnr_value(rho, dims) > 1.0) {
      ++both;
    }
  }
  CHECK(static_cast<double>(both) / kDraws < 1e-4);
}

TEST_CASE("property: flat two-qubit draws include separable states") {
  const WishartDistribution flat(WishartParams::uniform(4));
  int ppt = 0;
  CMatrix rho;
  for (int n = 0; n < 10000; ++n) {
    RngStream rng(9, stream_key(StreamPurpose::kReference, 0, static_cast<std::uint64_t>(n)));
    flat.sample_matrix(rng, rho);
    ppt += min_pt_eigenvalue(rho, BipartiteDims{2, 2}) >= 0.0 ? 1 : 0;
  }
  CHECK(ppt > 0);
  CHECK(ppt < 10000);
}
