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
#include "qscmc/qstate.hpp"
#include "support/helpers.hpp"

using namespace qscmc;
using namespace qscmc::testing;

namespace {

Mat diag(std::initializer_list<double> values) {
  Mat m = Mat::Zero(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) {
    m(i, i) = v;
    ++i;
  }
  return m;
}

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("density matrix validation") {
  CHECK_NOTHROW(DensityMatrix::from_matrix(diag({0.5, 0.5})));
  CHECK_THROWS_AS(DensityMatrix::from_matrix(diag({0.5, 0.6})), InvalidInput);
  Mat skew = diag({0.5, 0.5});
  skew(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix::from_matrix(skew), InvalidInput);
  CHECK(DensityMatrix::maximally_mixed(3).is_physical());
  CHECK_FALSE(DensityMatrix::from_matrix(diag({1.2, -0.2})).is_physical());
}

TEST_CASE("interleaved round trip") {
  std::mt19937_64 gen(3);
  const DensityMatrix rho = DensityMatrix::from_matrix(random_state(3, gen));
  const std::vector<double> flat = rho.to_interleaved();
  REQUIRE(flat.size() == 18);
  CHECK(flat[2] == rho.matrix()(0, 1).real());
  CHECK(flat[3] == rho.matrix()(0, 1).imag());
  const DensityMatrix back = DensityMatrix::from_interleaved(flat, 3);
  CHECK(max_abs(back.matrix() - rho.matrix()) == 0.0);
}

TEST_CASE("min_eigenvalue examples") {
  CHECK(min_eigenvalue(DensityMatrix::maximally_mixed(4)) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(std::abs(min_eigenvalue(diag({1.0, 0.0}))) < 1e-15);
  CHECK(min_eigenvalue(diag({0.7, 0.4, -0.1})) == doctest::Approx(-0.1).epsilon(1e-14));
  Mat skew = diag({0.5, 0.5});
  skew(1, 0) = 0.3;
  CHECK_THROWS_AS(min_eigenvalue(skew), InvalidInput);
}

TEST_CASE("partial transpose examples") {
  std::mt19937_64 gen(11);
  const Mat ra = random_state(2, gen);
  const Mat rb = random_state(3, gen);
  const Mat product = kron_product(ra, rb);
  const Mat pt = partial_transpose(product, BipartiteDims{2, 3});
  CHECK(max_abs(pt - kron_product(ra, rb.transpose())) < 1e-15);
  CHECK(min_eig_oracle(pt) >= 0.0);

  Eigen::SelfAdjointEigenSolver<Mat> es(partial_transpose(bell_state(), BipartiteDims{2, 2}));
  CHECK(es.eigenvalues()(0) == doctest::Approx(-0.5).epsilon(1e-14));
  for (int i = 1; i < 4; ++i) {
    CHECK(es.eigenvalues()(i) == doctest::Approx(0.5).epsilon(1e-14));
  }

  const Mat mixed = DensityMatrix::maximally_mixed(9).matrix();
  CHECK(max_abs(partial_transpose(mixed, BipartiteDims{3, 3}) - mixed) == 0.0);
  CHECK_THROWS_AS(partial_transpose(mixed, BipartiteDims{2, 3}), InvalidInput);
}

TEST_CASE("partial transpose agrees with the index-loop oracle") {
  std::mt19937_64 gen(12);
  for (auto [da, db] : {std::pair<std::size_t, std::size_t>{2, 2}, {2, 4}, {3, 3}, {3, 5}}) {
    const Mat rho = random_state(da * db, gen);
    CHECK(max_abs(partial_transpose(rho, BipartiteDims{da, db}) - pt_oracle(rho, da, db)) == 0.0);
  }
}

TEST_CASE("min_pt_eigenvalue examples") {
  CHECK(min_pt_eigenvalue(bell_state(), BipartiteDims{2, 2}) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(min_pt_eigenvalue(DensityMatrix::maximally_mixed(9), BipartiteDims{3, 3}) ==
        doctest::Approx(1.0 / 9.0).epsilon(1e-14));
  Mat sep = Mat::Zero(4, 4);
  sep(0, 0) = 0.5;
  sep(3, 3) = 0.5;
  CHECK(std::abs(min_pt_eigenvalue(sep, BipartiteDims{2, 2})) < 1e-15);
}

TEST_CASE("realignment convention") {
  std::mt19937_64 gen(13);
  const Mat a = random_state(2, gen);
  const Mat b = random_state(3, gen);
  const Mat r = realign(kron_product(a, b), BipartiteDims{2, 3});
  // vec(A) vec(B)^T with row-major vec.
  Mat expected(4, 9);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 9; ++j) {
      expected(i, j) = a(i / 2, i % 2) * b(j / 3, j % 3);
    }
  }
  CHECK(max_abs(r - expected) < 1e-15);
  const Mat rho = random_state(6, gen);
  CHECK(max_abs(realign(rho, BipartiteDims{2, 3}) - realign_oracle(rho, 2, 3)) == 0.0);
}

TEST_CASE("ccnr examples") {
  for (auto [da, db] : {std::pair<std::size_t, std::size_t>{2, 2}, {2, 3}, {3, 3}, {2, 4}}) {
    const Mat mixed = DensityMatrix::maximally_mixed(da * db).matrix();
    const double expected = 1.0 / std::sqrt(static_cast<double>(da * db));
    CHECK(ccnr_value(mixed, BipartiteDims{da, db}) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(trace_norm_oracle(realign_oracle(mixed, da, db)) == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(ccnr_value(bell_state(), BipartiteDims{2, 2}) == doctest::Approx(2.0).epsilon(1e-12));
  Mat zero = Mat::Zero(4, 4);
  zero(0, 0) = 1.0;
  CHECK(ccnr_value(zero, BipartiteDims{2, 2}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ccnr agrees with the SVD oracle on random states") {
  std::mt19937_64 gen(14);
  for (auto [da, db] : {std::pair<std::size_t, std::size_t>{2, 2}, {2, 4}, {3, 3}, {3, 4}}) {
    for (int rep = 0; rep < 10; ++rep) {
      const Mat rho = random_state(da * db, gen);
      const double oracle = trace_norm_oracle(realign_oracle(rho, da, db));
      CHECK(std::abs(ccnr_value(rho, BipartiteDims{da, db}) - oracle) < 1e-12);
      CHECK(std::abs(ccnr_value_svd(rho, BipartiteDims{da, db}) - oracle) < 1e-12);
    }
  }
}

TEST_CASE("pom probabilities examples") {
  const Pom tetra = build_product_tetrahedron_pom(1);
  const auto p = pom_probabilities(DensityMatrix::maximally_mixed(2), tetra);
  for (double v : p) {
    CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
  }
  const Pom comp = build_computational_pom(2);
  Mat zero = Mat::Zero(2, 2);
  zero(0, 0) = 1.0;
  const auto q = pom_probabilities(DensityMatrix::from_matrix(zero), comp);
  CHECK(q[0] == 1.0);
  CHECK(q[1] == 0.0);
  const Pom trine = build_trine_pom();
  const auto t = pom_probabilities(DensityMatrix::maximally_mixed(2), trine);
  for (double v : t) {
    CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(pom_probabilities(DensityMatrix::maximally_mixed(3), tetra), InvalidInput);
}

TEST_CASE("tetrahedron POM structure") {
  const Pom one = build_product_tetrahedron_pom(1);
  REQUIRE(one.size() == 4);
  Mat sum = Mat::Zero(2, 2);
  for (const Mat& op : one.outcomes()) {
    CHECK(op.trace().real() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(min_eig_oracle(op) >= -1e-12);
    sum += op;
  }
  CHECK(max_abs(sum - Mat::Identity(2, 2)) < 1e-14);
  const double overlap = (one[0] * one[1]).trace().real();
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t k = j + 1; k < 4; ++k) {
      CHECK((one[j] * one[k]).trace().real() == doctest::Approx(overlap).epsilon(1e-14));
    }
  }
  const Pom two = build_product_tetrahedron_pom(2);
  REQUIRE(two.size() == 16);
  for (const Mat& op : two.outcomes()) {
    CHECK(op.trace().real() == doctest::Approx(0.25).epsilon(1e-14));
  }
  CHECK(max_abs(two[5] - kron_product(one[1], one[1])) < 1e-15);
  CHECK(max_abs(two[6] - kron_product(one[1], one[2])) < 1e-15);
}

TEST_CASE("POM validation") {
  CHECK_THROWS_AS(Pom({diag({0.5, 0.5})}), InvalidPom);
  CHECK_THROWS_AS(Pom({diag({1.5, 0.0}), diag({-0.5, 1.0})}), InvalidPom);
}

TEST_CASE("property: partial transpose is an exact involution preserving trace and hermiticity") {
  std::mt19937_64 gen(21);
  for (int rep = 0; rep < 50; ++rep) {
    const Mat rho = random_state(6, gen);
    const Mat pt = partial_transpose(rho, BipartiteDims{2, 3});
    CHECK(max_abs(partial_transpose(pt, BipartiteDims{2, 3}) - rho) == 0.0);
    CHECK(std::abs(pt.trace() - rho.trace()) < 1e-15);
    CHECK(hermiticity_defect(pt) == 0.0);
  }
}

TEST_CASE("property: ccnr and PT spectrum are invariant under local unitaries") {
  std::mt19937_64 gen(22);
  for (int rep = 0; rep < 30; ++rep) {
    const Mat rho = random_state(9, gen);
    const Mat u = kron_product(random_unitary(3, gen), random_unitary(3, gen));
    const Mat rotated = u * rho * u.adjoint();
    CHECK(std::abs(ccnr_value(rotated, BipartiteDims{3, 3}) - ccnr_value(rho, BipartiteDims{3, 3})) < 1e-9);
    CHECK(std::abs(min_pt_eigenvalue(rotated, BipartiteDims{3, 3}) - min_pt_eigenvalue(rho, BipartiteDims{3, 3})) <
          1e-9);
  }
}

TEST_CASE("property: probabilities of physical states sum to one") {
  std::mt19937_64 gen(23);
  const Pom tetra2 = build_product_tetrahedron_pom(2);
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = pom_probabilities(DensityMatrix::from_matrix(random_state(4, gen)), tetra2);
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-10);
    for (double v : p) {
      CHECK(v >= -1e-12);
    }
  }
}

TEST_CASE("property: separable states have a positive partial transpose") {
  std::mt19937_64 gen(24);
  for (int rep = 0; rep < 50; ++rep) {
    CHECK(min_pt_eigenvalue(random_separable(3, 3, 6, gen), BipartiteDims{3, 3}) >= -1e-10);
    CHECK(min_pt_eigenvalue(random_separable(2, 4, 6, gen), BipartiteDims{2, 4}) >= -1e-10);
  }
}
