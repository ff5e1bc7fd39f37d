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

#ifndef QSCMC_ENGINE_HPP
#define QSCMC_ENGINE_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qscmc/qstate.hpp"
#include "qscmc/rng.hpp"

/**
 * \file
 * \brief Sequentially constrained Monte Carlo over real coordinate vectors.
 *
 * The sampler moves a weighted population from a reference density g to a target f
 * through the geometric bridge h_i = f^tau_i g^(1 - tau_i), tau_i = i / N_tau, while each
 * soft constraint kappa >= 0 enters as the factor [1 + tanh(a tau_i kappa)] / 2. At every
 * bridge step the weights are updated by h_i / h_{i-1}, the population is resampled when
 * its effective sample size drops below the threshold, and N_MC Metropolis sweeps follow.
 * After the last step the population is resampled, filtered through extra sweeps at
 * tau = 1, and every constraint is imposed in hard form.
 *
 * All densities are handled in the log domain; -inf marks points outside the support.
 */

namespace qscmc {

inline constexpr std::size_t kMaxConstraints = 4;

enum class ConstraintMode { Soft, Hard };

/// Inequality kappa(x) >= 0. The kappa values themselves come from the model's
/// `evaluate`, slot by slot in the order of `Model::constraints()`.
struct SoftConstraint {
  std::string name;
  /// Tolerance a > 0: the hardness at bridge parameter tau is a * tau. Ignored in hard mode.
  double tolerance = 1.0;
  ConstraintMode mode = ConstraintMode::Soft;
  /// Hard form: kappa >= floor, or kappa > floor when `strict`.
  double hard_floor = -kPhysicalTolerance;
  bool strict = false;

  bool satisfied(double kappa) const noexcept {
    return strict ? kappa > hard_floor : kappa >= hard_floor;
  }
};

/// Everything the sampler needs to know about one point.
struct Evaluation {
  double log_target = 0.0;
  double log_reference = 0.0;
  /// False when the point must never be entered by a walk (e.g. hard physicality).
  bool admissible = true;
  std::array<double, kMaxConstraints> kappa{};
};

/// A sampling problem over R^m.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::span<const SoftConstraint> constraints() const = 0;
  /// Draws one point from the reference density g.
  virtual void sample_reference(RngStream& rng, std::span<double> x) const = 0;
  /// Must be safe to call concurrently.
  virtual Evaluation evaluate(std::span<const double> x) const = 0;
};

/// Model assembled from callables. Convenient for low-dimensional problems and tests.
class FunctionModel final : public Model {
 public:
  using Density = std::function<double(std::span<const double>)>;
  using Sampler = std::function<void(RngStream&, std::span<double>)>;
  using Predicate = std::function<bool(std::span<const double>)>;

  FunctionModel(std::size_t dimension, Sampler reference_sampler, Density log_reference,
                Density log_target);

  /// Adds kappa as the next constraint slot.
  FunctionModel& add_constraint(SoftConstraint constraint, Density kappa);
  /// Points failing the predicate are never entered by a walk.
  FunctionModel& set_admissible(Predicate admissible);

  std::size_t dimension() const override { return dimension_; }
  std::span<const SoftConstraint> constraints() const override { return constraints_; }
  void sample_reference(RngStream& rng, std::span<double> x) const override;
  Evaluation evaluate(std::span<const double> x) const override;

 private:
  std::size_t dimension_;
  Sampler sampler_;
  Density log_reference_;
  Density log_target_;
  std::vector<SoftConstraint> constraints_;
  std::vector<Density> kappas_;
  Predicate admissible_;
};

enum class ResamplingScheme { Multinomial, Systematic };

/// Walk coordinates of quantum models: Gell-Mann coordinates with hard physicality, or
/// POM probability coordinates with soft physicality.
enum class WalkMode { Matrix, Simplex };

struct ScmcConfig {
  std::size_t n_particles = 1000;
  std::size_t n_steps = 10;
  std::size_t n_mc = 15;
  double ess_threshold_fraction = 0.8;
  std::size_t final_mc_iterations = 20;
  /// Multiplier on the 2.38 / sqrt(m) covariance-shaped proposal; adapted per bridge step.
  double step_scale = 1.0;
  WalkMode walk_mode = WalkMode::Matrix;
  ResamplingScheme resampling = ResamplingScheme::Multinomial;
  bool adapt_step = true;
  double acceptance_low = 0.2;
  double acceptance_high = 0.5;
  /// Isotropic floor added to the proposal covariance (as a standard deviation).
  double min_proposal_std = 1e-4;
  /// Resample before the final sweeps when the weights are not already uniform.
  bool final_resample = true;
  std::uint64_t seed = 1;
  /// Worker threads; 0 uses the OpenMP default. Never changes results.
  int threads = 0;

  /// \throws ConfigError on inconsistent values.
  void validate() const;
};

/// N particles in R^m (one column each) with log importance weights and cached
/// evaluations.
struct ParticleEnsemble {
  Eigen::MatrixXd points;
  std::vector<double> log_weights;
  std::vector<Evaluation> evaluations;
  std::size_t generation = 0;

  std::size_t size() const noexcept { return log_weights.size(); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(points.rows()); }
  std::span<const double> point(std::size_t k) const {
    return {points.col(static_cast<Eigen::Index>(k)).data(), static_cast<std::size_t>(points.rows())};
  }
  /// Normalized weights exp(log_weights).
  std::vector<double> weights() const;
};

/// tau * log_f + (1 - tau) * log_g; a zero exponent drops its term, so -inf propagates
/// only through terms that are actually present.
double bridge_log_density(double log_f, double log_g, double tau);

/// ln([1 + tanh(a tau kappa)] / 2), evaluated as -log1p(exp(-2z)) without underflow.
double soft_indicator_log(double kappa, double a, double tau);

/// Bridge density times the soft indicators; hard constraints give 0 or -inf.
double constrained_log_density(const Evaluation& e, std::span<const SoftConstraint> constraints,
                               double tau);

/// 1 / sum_k w_k^2 with w normalized from `log_weights`.
/// \throws DegenerateEnsemble when every weight is zero.
double effective_sample_size(std::span<const double> log_weights);

/// Shifts log weights so that their exponentials sum to one.
/// \throws DegenerateEnsemble when every weight is zero.
void normalize_log_weights(std::span<double> log_weights);

/// Adds new - old to every log weight and normalizes. Particles already at zero weight,
/// or with old = -inf, stay at zero weight.
void reweight(ParticleEnsemble& ensemble, std::span<const double> old_log_density,
              std::span<const double> new_log_density);
void reweight(ParticleEnsemble& ensemble, const std::function<double(std::size_t)>& old_log_density,
              const std::function<double(std::size_t)>& new_log_density);

/// Ancestor indices proportional to the weights.
std::vector<std::size_t> resample_indices(std::span<const double> log_weights, std::size_t count,
                                          RngStream& rng,
                                          ResamplingScheme scheme = ResamplingScheme::Multinomial);

/// Replaces the population by N draws from its weights; weights reset to 1/N.
void resample(ParticleEnsemble& ensemble, RngStream& rng,
              ResamplingScheme scheme = ResamplingScheme::Multinomial);

/// Gaussian random-walk proposal x' = x + scale * factor * z, z ~ N(0, 1_m).
struct ProposalShape {
  Eigen::MatrixXd factor;
  double scale = 1.0;
};

/// factor = (weighted ensemble covariance + min_std^2 1)^(1/2), scale = 2.38 / sqrt(m).
ProposalShape proposal_from_ensemble(const ParticleEnsemble& ensemble, double min_std);

struct PassStats {
  std::size_t proposed = 0;
  std::size_t accepted = 0;
  double rate() const noexcept {
    return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  }
};

/// `iterations` Metropolis sweeps at bridge parameter tau. Each particle draws from its
/// own stream keyed by (seed, step_key, particle index); inadmissible proposals are
/// rejected outright.
PassStats metropolis_propagate(ParticleEnsemble& ensemble, const Model& model, double tau,
                               const ProposalShape& shape, std::size_t iterations,
                               std::uint64_t seed, std::uint64_t step_key, int threads = 0);

struct StepDiagnostics {
  std::size_t step = 0;
  double tau = 0.0;
  double ess = 0.0;
  bool resampled = false;
  double acceptance_rate = 0.0;
  double step_scale = 0.0;
};

struct RunDiagnostics {
  std::vector<StepDiagnostics> steps;
  double final_acceptance_rate = 0.0;
  bool final_resampled = false;
  std::size_t n_initial = 0;
  std::size_t n_accepted = 0;

  double yield() const noexcept {
    return n_initial == 0 ? 0.0 : static_cast<double>(n_accepted) / static_cast<double>(n_initial);
  }
  std::vector<double> ess_trace() const;
  double min_ess() const;
};

struct RunResult {
  /// Survivors of the final hard rejection, uniform weights.
  ParticleEnsemble accepted;
  /// The population after the final sweeps, before hard rejection.
  ParticleEnsemble final_population;
  RunDiagnostics diagnostics;
};

/// Observer invoked with the population after step 0 (reference) and after every bridge
/// step's sweeps.
using StepObserver = std::function<void(std::size_t step, double tau, const ParticleEnsemble&)>;

/// Draws and evaluates the reference population.
ParticleEnsemble initialize_ensemble(const Model& model, const ScmcConfig& config);

/// Evaluates every particle of `ensemble` in place.
void evaluate_ensemble(ParticleEnsemble& ensemble, const Model& model, int threads = 0);

/// Full sampler from a fresh reference population.
/// \throws DegenerateEnsemble when all weights vanish.
RunResult scmc_run(const Model& model, const ScmcConfig& config, const StepObserver& observer = {});

/// Full sampler from a given population (warm start); it is re-evaluated under `model`
/// and its weights are reset to uniform.
RunResult scmc_run(const Model& model, const ScmcConfig& config, ParticleEnsemble initial,
                   const StepObserver& observer = {});

/// Whether every constraint holds in hard form and the point is in the target support.
bool passes_hard_constraints(const Evaluation& e, std::span<const SoftConstraint> constraints);

/// Direction presets for exploration filters. These are heuristics: they change which
/// directions the walk favours, not its stationary distribution.
enum class ExplorePreset {
  Ensemble,   // current ensemble covariance
  Isotropic,  // identity
  Principal,  // leading principal axes of the ensemble covariance only
};

struct ExploreOptions {
  ExplorePreset preset = ExplorePreset::Ensemble;
  std::size_t iterations = 50;
  std::size_t principal_axes = 3;
  double step_scale = 1.0;
  std::uint64_t seed = 1;
  int threads = 0;
  /// Moves are accepted only into points satisfying the predicate (in addition to
  /// admissibility and the tau = 1 density ratio).
  std::function<bool(const Evaluation&)> predicate;
};

/// Post-processing filter: further Metropolis sweeps with a chosen kernel.
PassStats explore(ParticleEnsemble& ensemble, const Model& model, const ExploreOptions& options);

}  // namespace qscmc

#endif  // QSCMC_ENGINE_HPP
