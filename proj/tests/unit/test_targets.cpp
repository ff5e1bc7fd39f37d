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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <doctest.h>

#include "qscmc/error.hpp"
#include "qscmc/targets.hpp"
#include "support/helpers.hpp"

using namespace qscmc;
using namespace qscmc::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DirichletTarget trine_target() { return DirichletTarget{build_trine_pom(), {1802.0, 315.0, 303.0}}; }

/// sum_k alpha_k ln tr(Pi_k rho) by explicit traces.
double log_f_oracle(const Mat& rho, const DirichletTarget& t) {
  double total = 0.0;
  for (std::size_t k = 0; k < t.pom.size(); ++k) {
    const Mat pi = t.pom[k];
    total += t.alphas[k] * std::log((pi * rho).trace().real());
  }
  return total;
}

/// Simplex projection by sorting (independent of the library's routine).
std::vector<double> simplex_oracle(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) {
      theta = candidate;
    }
  }
  for (double& x : v) {
    x = std::max(x - theta, 0.0);
  }
  return v;
}

Mat state_projection_oracle(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd ev = es.eigenvalues();
  const auto projected = simplex_oracle(std::vector<double>(ev.data(), ev.data() + ev.size()));
  Eigen::VectorXd d(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    d(i) = projected[static_cast<std::size_t>(i)];
  }
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

TEST_CASE("dirichlet target density") {
  const Pom tetra = build_product_tetrahedron_pom(1);
  std::mt19937_64 gen(41);
  const DirichletTarget flat{tetra, {0.0, 0.0, 0.0, 0.0}};
  const DirichletTarget weighted{tetra, {3.0, 1.5, 0.0, 7.0}};
  for (int rep = 0; rep < 20; ++rep) {
    const Mat rho = random_state(2, gen);
    CHECK(dirichlet_log_density(DensityMatrix::from_matrix(rho), flat) == 0.0);
    CHECK(dirichlet_log_density(rho, weighted) == doctest::Approx(log_f_oracle(rho, weighted)).epsilon(1e-13));
  }
  CHECK(weighted.total() == 11.5);

  // |0><0| has p = (1 + a_k,z) / 4; every a_k,z = +-1/sqrt3, so nothing vanishes.
  CMatrix up = CMatrix::Zero(2, 2);
  up(0, 0) = 1.0;
  CHECK(std::isfinite(dirichlet_log_density(up, weighted)));
  const std::vector<double> p{0.5, 0.5, 0.0};
  const std::vector<double> a{1.0, 1.0, 2.0};
  CHECK(dirichlet_log_density(p, a) == -kInf);
  const std::vector<double> a0{1.0, 1.0, 0.0};
  CHECK(dirichlet_log_density(p, a0) == doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-15));

  CHECK_THROWS_AS((DirichletTarget{tetra, {1.0, 2.0}}.validate()), InvalidParameter);
  CHECK_THROWS_AS((DirichletTarget{tetra, {1.0, 2.0, -1.0, 0.0}}.validate()), InvalidParameter);
  CHECK_THROWS_AS(dirichlet_log_density(CMatrix::Identity(3, 3) / 3.0, weighted), InvalidInput);
}

TEST_CASE("targets from simulated clicks") {
  const Pom tetra = build_product_tetrahedron_pom(1);
  const auto t = DirichletTarget::from_clicks(tetra, DensityMatrix::maximally_mixed(2), 3000, 5);
  CHECK(t.alphas.size() == 4);
  CHECK(t.total() == 3000.0);
  for (double a : t.alphas) {
    CHECK(std::abs(a - 750.0) < 120.0);
  }
  const auto again = DirichletTarget::from_clicks(tetra, DensityMatrix::maximally_mixed(2), 3000, 5);
  CHECK(again.alphas == t.alphas);
}

TEST_CASE("entanglement kappa examples") {
  const auto bell = bound_entanglement_kappas(CMatrix(bell_state()), BipartiteDims{2, 2});
  CHECK(bell.kappa1 == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(bell.kappa2 == doctest::Approx(1.0).epsilon(1e-12));
  const auto mixed = bound_entanglement_kappas(DensityMatrix::maximally_mixed(9), BipartiteDims{3, 3});
  CHECK(mixed.kappa1 == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  CHECK(mixed.kappa2 == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("property: entanglement kappas are local-unitary invariant") {
  std::mt19937_64 gen(42);
  for (const BipartiteDims dims : {BipartiteDims{2, 2}, BipartiteDims{3, 3}, BipartiteDims{2, 4}}) {
    for (int rep = 0; rep < 30; ++rep) {
      const Mat rho = random_state(dims.total(), gen);
      const Mat u = kron_product(random_unitary(dims.a, gen), random_unitary(dims.b, gen));
      const Mat rotated = u * rho * u.adjoint();
      const auto before = bound_entanglement_kappas(CMatrix(rho), dims);
      const auto after = bound_entanglement_kappas(CMatrix(rotated), dims);
      CHECK(std::abs(before.kappa1 - after.kappa1) < 1e-9);
      CHECK(std::abs(before.kappa2 - after.kappa2) < 1e-9);
      CHECK(std::abs(before.kappa1 - min_eig_oracle(pt_oracle(rho, dims.a, dims.b))) < 1e-9);
      CHECK(std::abs(before.kappa2 - (trace_norm_oracle(realign_oracle(rho, dims.a, dims.b)) - 1.0)) < 1e-9);
    }
  }
}

TEST_CASE("lambda region indicator examples") {
  const DirichletTarget t = trine_target();
  const Peak peak = find_peak(t);
  const LambdaRegion at_peak{1.0, peak.log_f};
  CHECK(std::abs(lambda_region_log_indicator(peak.rho, at_peak, t, 1e3, 1.0) - std::log(0.5)) < 1e-9);

  std::mt19937_64 gen(43);
  const DensityMatrix off = DensityMatrix::from_matrix(random_state(2, gen));
  CHECK(lambda_region_log_indicator(off, at_peak, t, 1e3, 1.0) < std::log(0.5));

  // lambda chosen so that f(off) = lambda F exactly.
  const double log_f_off = dirichlet_log_density(off, t);
  const LambdaRegion boundary{std::exp(log_f_off - peak.log_f), peak.log_f};
  if (boundary.lambda > 0.0) {
    CHECK(std::abs(lambda_region_log_indicator(off, boundary, t, 1e3, 0.7) - std::log(0.5)) < 1e-9);
  }
  const LambdaRegion whole{0.0, peak.log_f};
  for (int rep = 0; rep < 10; ++rep) {
    const DensityMatrix rho = DensityMatrix::from_matrix(random_state(2, gen));
    CHECK(lambda_region_log_indicator(rho, whole, t, 1e3, 1.0) == 0.0);
  }
  CHECK(whole.kappa(-1e300) == kInf);
  CHECK_THROWS_AS((LambdaRegion{1.5, 0.0}.validate()), InvalidParameter);
  CHECK_THROWS_AS((LambdaRegion{-0.1, 0.0}.validate()), InvalidParameter);
}

TEST_CASE("property: lambda regions are nested") {
  const DirichletTarget t = trine_target();
  const Peak peak = find_peak(t);
  std::mt19937_64 gen(44);
  const std::vector<double> lambdas{0.9, 0.5, 1e-3, 1e-10, 1e-30, 1e-100, 0.0};
  for (int rep = 0; rep < 2000; ++rep) {
    const Mat rho = rep % 2 == 0 ? random_state(2, gen) : projector(random_pure(2, gen));
    const double log_f = dirichlet_log_density(rho, t);
    bool inside = false;
    for (double lambda : lambdas) {
      const bool now = LambdaRegion{lambda, peak.log_f}.kappa(log_f) >= 0.0;
      CHECK((!inside || now));
      inside = now;
    }
  }
}

TEST_CASE("property: dirichlet log density is concave along segments") {
  std::mt19937_64 gen(45);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  const Pom tetra2 = build_product_tetrahedron_pom(2);
  for (int rep = 0; rep < 200; ++rep) {
    DirichletTarget t{tetra2, std::vector<double>(16)};
    for (double& a : t.alphas) {
      a = u(gen);
    }
    const Mat a = random_state(4, gen);
    const Mat b = random_state(4, gen);
    const double fa = dirichlet_log_density(CMatrix(a), t);
    const double fb = dirichlet_log_density(CMatrix(b), t);
    const double fm = dirichlet_log_density(CMatrix(0.5 * (a + b)), t);
    CHECK(fm >= std::min(fa, fb));
    CHECK(fm >= 0.5 * (fa + fb) - 1e-9 * std::abs(fa + fb));
  }
}

TEST_CASE("peak of a symmetric target is the simplex mode") {
  const DirichletTarget t{build_product_tetrahedron_pom(1), {10.0, 10.0, 10.0, 10.0}};
  const Peak peak = find_peak(t);
  CHECK(peak.simplex_mode);
  CHECK((peak.rho.matrix() - 0.5 * CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(peak.log_f == doctest::Approx(40.0 * std::log(0.25)).epsilon(1e-13));
  CHECK_THROWS_AS(find_peak(DirichletTarget{build_product_tetrahedron_pom(1), {0.0, 0.0, 0.0, 0.0}}),
                  InvalidParameter);
}

TEST_CASE("trine peak lies at the boundary and bounds the density") {
  const DirichletTarget t = trine_target();
  const Peak peak = find_peak(t);
  CHECK_FALSE(peak.simplex_mode);
  CHECK(min_eigenvalue(peak.rho) <= 0.05);
  CHECK(min_eigenvalue(peak.rho) >= -1e-12);
  CHECK(peak.log_f == doctest::Approx(log_f_oracle(peak.rho.matrix(), t)).epsilon(1e-13));

  std::mt19937_64 gen(46);
  double best = -kInf;
  for (int rep = 0; rep < 100000; ++rep) {
    const Mat rho = rep % 2 == 0 ? random_state(2, gen) : projector(random_pure(2, gen));
    best = std::max(best, dirichlet_log_density(CMatrix(rho), t));
  }
  CHECK(best <= peak.log_f + 1e-9);

  // Stationarity: the projected gradient step leaves the peak in place.
  const Mat rho = peak.rho.matrix();
  Mat grad = Mat::Zero(2, 2);
  for (std::size_t k = 0; k < t.pom.size(); ++k) {
    const Mat pi = t.pom[k];
    grad += t.alphas[k] / (pi * rho).trace().real() * pi;
  }
  const double step = 1e-3 / grad.norm();
  const double residual = (state_projection_oracle(rho + step * grad) - rho).norm() / step;
  CHECK(residual <= 1e-6);
}

TEST_CASE("state projection") {
  std::mt19937_64 gen(47);
  for (int rep = 0; rep < 50; ++rep) {
    Mat h = ginibre(3, 3, gen);
    h = 0.5 * (h + h.adjoint());
    const CMatrix lib = project_to_states(CMatrix(h));
    CHECK((lib - CMatrix(state_projection_oracle(h))).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(lib.trace() - Complex(1.0)) < 1e-12);
    CHECK(min_eigenvalue(lib) >= -1e-12);
  }
  const Mat rho = random_state(3, gen);
  CHECK((project_to_states(CMatrix(rho)) - CMatrix(rho)).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::VectorXd v(4);
  v << 0.9, -0.3, 0.6, 0.1;
  const Eigen::VectorXd p = project_to_simplex(v);
  const auto o = simplex_oracle({0.9, -0.3, 0.6, 0.1});
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(std::abs(p(i) - o[static_cast<std::size_t>(i)]) < 1e-15);
  }
}

TEST_CASE("quantum model constraint slots and evaluation") {
  QuantumModelSpec be;
  be.dim = 9;
  be.entanglement = BoundEntanglementConstraints{{3, 3}};
  const QuantumModel bound(be);
  CHECK(bound.walk_mode() == WalkMode::Matrix);
  CHECK(bound.dimension() == 80);
  CHECK(bound.slot("physical") == -1);
  CHECK(bound.slot("ppt") == 0);
  CHECK(bound.slot("ccnr") == 1);
  const auto mixed = DensityMatrix::maximally_mixed(9);
  const auto x = bound.chart().coordinates(mixed);
  const Evaluation e = bound.evaluate(x);
  CHECK(e.admissible);
  CHECK(e.log_reference == 0.0);
  CHECK(e.kappa[0] == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  CHECK(e.kappa[1] == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
  CHECK((bound.state(x) - mixed.matrix()).cwiseAbs().maxCoeff() < 1e-14);

  QuantumModelSpec simplex;
  simplex.dim = 2;
  simplex.chart_pom = build_product_tetrahedron_pom(1);
  simplex.reference.kind = ReferenceKind::Dirichlet;
  simplex.reference.dirichlet = DirichletParams{{0.0, 0.0, 0.0, 0.0}, std::nullopt};
  const QuantumModel qubit(simplex);
  CHECK(qubit.walk_mode() == WalkMode::Simplex);
  CHECK(walk_mode_for(simplex.reference) == WalkMode::Simplex);
  CHECK(qubit.dimension() == 3);
  CHECK(qubit.slot("physical") == 0);
  const std::vector<double> corner{1.0, 0.0, 0.0};
  const Evaluation c = qubit.evaluate(corner);
  CHECK(c.admissible);
  CHECK(c.kappa[0] == doctest::Approx(-1.0).epsilon(1e-12));
  const std::vector<double> outside{0.8, 0.3, 0.1};
  CHECK_FALSE(qubit.evaluate(outside).admissible);

  QuantumModelSpec bad = be;
  bad.entanglement->dims = {2, 4};
  CHECK_THROWS_AS(QuantumModel{bad}, ConfigError);
  QuantumModelSpec no_chart;
  no_chart.reference.kind = ReferenceKind::Dirichlet;
  CHECK_THROWS_AS(QuantumModel{no_chart}, ConfigError);
}

TEST_CASE("hard physicality in the matrix chart") {
  QuantumModelSpec spec;
  spec.dim = 2;
  spec.target = DirichletTarget{build_product_tetrahedron_pom(1), {2.0, 1.0, 1.0, 1.0}};
  const QuantumModel model(spec);
  std::vector<double> x(3, 0.0);
  x[2] = 10.0;
  CHECK_FALSE(model.evaluate(x).admissible);
  std::mt19937_64 gen(48);
  const DensityMatrix rho = DensityMatrix::from_matrix(random_state(2, gen));
  const auto y = model.chart().coordinates(rho);
  const Evaluation e = model.evaluate(y);
  CHECK(e.admissible);
  CHECK(e.log_target == doctest::Approx(log_f_oracle(rho.matrix(), *spec.target)).epsilon(1e-12));
}

TEST_CASE("two-qubit peak from pure-state clicks is stationary") {
  std::mt19937_64 gen(49);
  const DensityMatrix truth = DensityMatrix::from_matrix(projector(random_pure(4, gen)));
  const auto t = DirichletTarget::from_clicks(build_product_tetrahedron_pom(2), truth, 3000, 11);
  const Peak peak = find_peak(t);
  CHECK(peak.stationarity <= 1e-7);
  CHECK(min_eigenvalue(peak.rho) >= -1e-12);
  double best = -kInf;
  for (int rep = 0; rep < 20000; ++rep) {
    best = std::max(best, dirichlet_log_density(CMatrix(random_state(4, gen)), t));
  }
  CHECK(best <= peak.log_f + 1e-9);
}
