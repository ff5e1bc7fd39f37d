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

#ifndef QSCMC_TARGETS_HPP
#define QSCMC_TARGETS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qscmc/engine.hpp"
#include "qscmc/qstate.hpp"
#include "qscmc/reference.hpp"
#include "qscmc/state_space.hpp"

/**
 * \file
 * \brief Target densities and constraint bundles for quantum state sampling.
 */

namespace qscmc {

/// f(rho) proportional to prod_k p_k^alpha_k with p_k = tr(Pi_k rho).
struct DirichletTarget {
  Pom pom;
  std::vector<double> alphas;

  double total() const;
  /// \throws InvalidParameter when the exponents do not match the POM or are negative.
  void validate() const;

  /// Exponents from `clicks` simulated measurement outcomes on `truth`.
  static DirichletTarget from_clicks(Pom pom, const DensityMatrix& truth, std::size_t clicks,
                                     std::uint64_t seed);
};

/// sum_k alpha_k ln p_k; -inf when some p_k <= 0 carries alpha_k > 0.
/// \throws InvalidInput on a dimension mismatch.
double dirichlet_log_density(const DensityMatrix& rho, const DirichletTarget& target);
double dirichlet_log_density(const CMatrix& rho, const DirichletTarget& target);
/// Same value from precomputed probabilities.
double dirichlet_log_density(std::span<const double> p, std::span<const double> alphas);

struct BoundEntanglementConstraints {
  BipartiteDims dims;
  double a_p = 5e4;
  double a_e = 5e4;
  bool use_ppt = true;
  bool use_ccnr = true;

  void validate() const;
};

struct EntanglementKappas {
  /// Smallest eigenvalue of the partial transpose; >= 0 for PPT states.
  double kappa1 = 0.0;
  /// Realignment norm minus one; > 0 flags entanglement.
  double kappa2 = 0.0;
};

EntanglementKappas bound_entanglement_kappas(const CMatrix& rho, const BipartiteDims& dims);
EntanglementKappas bound_entanglement_kappas(const DensityMatrix& rho, const BipartiteDims& dims);

/// Superlevel set f(rho) >= lambda F with F the peak value.
struct LambdaRegion {
  double lambda = 0.0;
  double peak_log_f = 0.0;

  void validate() const;
  /// ln f - ln lambda - ln F; +inf for lambda = 0.
  double kappa(double log_f) const;
};

/// Soft indicator of the region at hardness a * tau; 0 for lambda = 0.
double lambda_region_log_indicator(const DensityMatrix& rho, const LambdaRegion& region,
                                   const DirichletTarget& target, double a, double tau);

struct PeakConfig {
  std::size_t max_iterations = 200000;
  /// Ascent ends when one step improves the log density by less than this.
  double tolerance = 1e-10;
  /// The ascent is then polished until ||P(rho + t grad) - rho|| / t, with t ||grad|| = 1e-3,
  /// drops below this.
  double stationarity = 1e-7;
};

struct Peak {
  DensityMatrix rho;
  double log_f = 0.0;
  std::size_t iterations = 0;
  /// Projected gradient residual at rho; 0 for the simplex mode.
  double stationarity = 0.0;
  /// True when the unconstrained simplex mode was already a physical state.
  bool simplex_mode = false;
};

/// Maximizer of the Dirichlet target over physical states.
/// \throws InvalidParameter when the total count is zero.
/// \throws NonConvergence when the iteration cap is hit.
Peak find_peak(const DirichletTarget& target, const PeakConfig& config = {});

/// Projection of a Hermitian matrix onto unit-trace positive matrices in the
/// Hilbert-Schmidt norm (eigenvalues projected onto the probability simplex).
CMatrix project_to_states(const CMatrix& m);

/// Euclidean projection of v onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

enum class ReferenceKind { Uniform, Wishart, Dirichlet, DirichletPeaked };

struct ReferenceSpec {
  ReferenceKind kind = ReferenceKind::Uniform;
  /// Required for Wishart.
  std::optional<WishartParams> wishart;
  /// Exponents on the chart POM; required for Dirichlet.
  std::optional<DirichletParams> dirichlet;
  /// Total concentration of the Dirichlet centered on the target's simplex mode.
  double peaked_concentration = 50.0;
};

struct RegionConstraint {
  DirichletTarget target;
  LambdaRegion region;
  double tolerance = 1e3;
  ConstraintMode mode = ConstraintMode::Hard;
};

/// Full description of a quantum sampling problem.
struct QuantumModelSpec {
  std::size_t dim = 2;
  Field field = Field::Complex;
  /// POM defining the probability chart; required by Dirichlet references.
  std::optional<Pom> chart_pom;
  /// Absent means a flat target.
  std::optional<DirichletTarget> target;
  ReferenceSpec reference;
  /// Tolerance of the soft physicality constraint in the probability chart.
  double physicality_tolerance = 1e3;
  std::optional<BoundEntanglementConstraints> entanglement;
  std::optional<RegionConstraint> region;
};

/// The walk mode a reference implies: Dirichlet references live in the probability chart.
WalkMode walk_mode_for(const ReferenceSpec& reference);

/// Model over Gell-Mann coordinates (hard physicality) or probability coordinates (soft
/// physicality). Constraint slots appear in the order physicality (probability chart
/// only), PPT, CCNR, lambda region.
class QuantumModel final : public Model {
 public:
  /// \throws ConfigError for inconsistent specifications.
  explicit QuantumModel(QuantumModelSpec spec);

  std::size_t dimension() const override { return chart_.coordinate_dim(); }
  std::span<const SoftConstraint> constraints() const override { return constraints_; }
  void sample_reference(RngStream& rng, std::span<double> x) const override;
  Evaluation evaluate(std::span<const double> x) const override;

  const StateMap& chart() const noexcept { return chart_; }
  WalkMode walk_mode() const noexcept { return mode_; }
  const QuantumModelSpec& spec() const noexcept { return spec_; }

  /// The state at coordinates x.
  CMatrix state(std::span<const double> x) const;

  /// Slot of a named constraint, or -1.
  int slot(const std::string& name) const;

 private:
  QuantumModelSpec spec_;
  WalkMode mode_;
  StateMap chart_;
  std::optional<WishartDistribution> wishart_;
  std::optional<WishartDistribution> uniform_;
  std::vector<double> reference_alphas_;
  std::vector<SoftConstraint> constraints_;
  int physical_slot_ = -1;
  int ppt_slot_ = -1;
  int ccnr_slot_ = -1;
  int region_slot_ = -1;
  bool target_on_chart_ = false;
  bool region_on_chart_ = false;
};

}  // namespace qscmc

#endif  // QSCMC_TARGETS_HPP
