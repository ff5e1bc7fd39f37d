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

#include "qscmc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <omp.h>

#include "qscmc/error.hpp"
#include "qscmc/simd/kernels.hpp"

namespace qscmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int resolve_threads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

/// Runs body(k) for k in [0, n) on a static schedule; the first exception is rethrown.
template <typename Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  std::exception_ptr failure;
  std::mutex guard;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(static)
  for (std::int64_t k = 0; k < count; ++k) {
    try {
      body(static_cast<std::size_t>(k));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) {
        failure = std::current_exception();
      }
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

double log_sum_exp(std::span<const double> values) {
  double top = -kInf;
  for (double v : values) {
    top = std::max(top, v);
  }
  if (top == -kInf) {
    return -kInf;
  }
  double total = 0.0;
  for (double v : values) {
    total += std::exp(v - top);
  }
  return top + std::log(total);
}

void gather(ParticleEnsemble& ensemble, const std::vector<std::size_t>& ancestors) {
  const auto m = ensemble.points.rows();
  Eigen::MatrixXd points(m, static_cast<Eigen::Index>(ancestors.size()));
  std::vector<Evaluation> evaluations(ancestors.size());
  for (std::size_t k = 0; k < ancestors.size(); ++k) {
    points.col(static_cast<Eigen::Index>(k)) = ensemble.points.col(static_cast<Eigen::Index>(ancestors[k]));
    evaluations[k] = ensemble.evaluations[ancestors[k]];
  }
  ensemble.points = std::move(points);
  ensemble.evaluations = std::move(evaluations);
  ensemble.log_weights.assign(ancestors.size(), -std::log(static_cast<double>(ancestors.size())));
  ++ensemble.generation;
}

bool weights_uniform(std::span<const double> log_weights) {
  if (log_weights.empty()) {
    return true;
  }
  const double first = log_weights.front();
  return std::all_of(log_weights.begin(), log_weights.end(),
                     [first](double v) { return std::abs(v - first) <= 1e-12; });
}

Eigen::MatrixXd weighted_covariance(const ParticleEnsemble& ensemble) {
  const auto n = ensemble.points.cols();
  const std::vector<double> w = ensemble.weights();
  Eigen::Map<const Eigen::VectorXd> weights(w.data(), n);
  const Eigen::VectorXd mean = ensemble.points * weights;
  Eigen::MatrixXd centered = ensemble.points.colwise() - mean;
  Eigen::MatrixXd scaled = centered;
  for (Eigen::Index k = 0; k < n; ++k) {
    scaled.col(k) *= weights(k);
  }
  Eigen::MatrixXd cov = scaled * centered.transpose();
  return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& a, std::size_t keep_axes = 0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  Eigen::VectorXd values = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  if (keep_axes > 0 && keep_axes < static_cast<std::size_t>(values.size())) {
    // Eigenvalues ascend; only the leading `keep_axes` directions remain.
    const auto drop = values.size() - static_cast<Eigen::Index>(keep_axes);
    values.head(drop).setZero();
  }
  return solver.eigenvectors() * values.asDiagonal() * solver.eigenvectors().transpose();
}

/// Metropolis sweeps of one particle; returns the number of accepted moves.
std::size_t walk_particle(Eigen::Ref<Eigen::VectorXd> x, Evaluation& e, const Model& model,
                          double tau, const Eigen::MatrixXd& factor, double scale,
                          std::size_t iterations, RngStream& rng,
                          const std::function<bool(const Evaluation&)>* predicate) {
  const auto constraints = model.constraints();
  const auto m = x.size();
  const simd::KernelTable& kernels = simd::active_kernels();
  Eigen::VectorXd z(m);
  Eigen::VectorXd proposal(m);
  double current = constrained_log_density(e, constraints, tau);
  std::size_t accepted = 0;
  for (std::size_t it = 0; it < iterations; ++it) {
    for (Eigen::Index i = 0; i < m; ++i) {
      z(i) = rng.normal();
    }
    kernels.scale(z.data(), static_cast<std::size_t>(m), scale);
    // factor is symmetric, so its column-major storage doubles as row-major.
    kernels.affine_gemv(factor.data(), static_cast<std::size_t>(m), static_cast<std::size_t>(m),
                        z.data(), x.data(), proposal.data());
    const double u = rng.uniform();
    const Evaluation candidate = model.evaluate({proposal.data(), static_cast<std::size_t>(m)});
    if (!candidate.admissible) {
      continue;
    }
    if (predicate != nullptr && *predicate && !(*predicate)(candidate)) {
      continue;
    }
    const double next = constrained_log_density(candidate, constraints, tau);
    if (next == -kInf) {
      continue;
    }
    const double delta = next - current;
    if (current == -kInf || delta >= 0.0 || u < std::exp(delta)) {
      x = proposal;
      e = candidate;
      current = next;
      ++accepted;
    }
  }
  return accepted;
}

}  // namespace

// -- FunctionModel ----------------------------------------------------------------------

FunctionModel::FunctionModel(std::size_t dimension, Sampler reference_sampler, Density log_reference,
                             Density log_target)
    : dimension_(dimension),
      sampler_(std::move(reference_sampler)),
      log_reference_(std::move(log_reference)),
      log_target_(std::move(log_target)) {
  if (dimension_ == 0) {
    throw InvalidInput("model dimension must be positive");
  }
}

FunctionModel& FunctionModel::add_constraint(SoftConstraint constraint, Density kappa) {
  if (constraints_.size() == kMaxConstraints) {
    throw InvalidInput("at most " + std::to_string(kMaxConstraints) + " constraints are supported");
  }
  if (constraint.mode == ConstraintMode::Soft && !(constraint.tolerance > 0.0)) {
    throw InvalidParameter("constraint tolerance must be positive");
  }
  constraints_.push_back(std::move(constraint));
  kappas_.push_back(std::move(kappa));
  return *this;
}

FunctionModel& FunctionModel::set_admissible(Predicate admissible) {
  admissible_ = std::move(admissible);
  return *this;
}

void FunctionModel::sample_reference(RngStream& rng, std::span<double> x) const { sampler_(rng, x); }

Evaluation FunctionModel::evaluate(std::span<const double> x) const {
  Evaluation e;
  if (admissible_ && !admissible_(x)) {
    e.admissible = false;
    e.log_target = -kInf;
    e.log_reference = -kInf;
    return e;
  }
  e.log_target = log_target_(x);
  e.log_reference = log_reference_(x);
  for (std::size_t c = 0; c < kappas_.size(); ++c) {
    e.kappa[c] = kappas_[c](x);
  }
  return e;
}

// -- configuration ----------------------------------------------------------------------

void ScmcConfig::validate() const {
  if (n_particles < 2) {
    throw ConfigError("n_particles must be at least 2");
  }
  if (n_steps == 0) {
    throw ConfigError("n_steps must be positive");
  }
  if (n_steps > 0xFFFFF0u) {
    throw ConfigError("n_steps is too large");
  }
  if (!(ess_threshold_fraction >= 0.0 && ess_threshold_fraction <= 1.0)) {
    throw ConfigError("ess_threshold_fraction must lie in [0, 1]");
  }
  if (!(step_scale > 0.0) || !std::isfinite(step_scale)) {
    throw ConfigError("step_scale must be positive");
  }
  if (!(acceptance_low >= 0.0 && acceptance_low < acceptance_high && acceptance_high <= 1.0)) {
    throw ConfigError("acceptance band must satisfy 0 <= low < high <= 1");
  }
  if (!(min_proposal_std >= 0.0)) {
    throw ConfigError("min_proposal_std must be non-negative");
  }
  if (threads < 0) {
    throw ConfigError("threads must be non-negative");
  }
}

std::vector<double> ParticleEnsemble::weights() const {
  std::vector<double> w(log_weights.size());
  const double norm = log_sum_exp(log_weights);
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] = std::exp(log_weights[k] - norm);
  }
  return w;
}

// -- densities --------------------------------------------------------------------------

double bridge_log_density(double log_f, double log_g, double tau) {
  double out = 0.0;
  const simd::KernelTable& kernels = simd::active_kernels();
  kernels.bridge_combine(&log_f, &log_g, 1, tau, &out);
  return out;
}

double soft_indicator_log(double kappa, double a, double tau) {
  if (tau == 0.0) {
    return -std::log(2.0);
  }
  const double z = a * tau * kappa;
  if (std::isnan(z)) {
    return -kInf;
  }
  if (z >= 0.0) {
    return -std::log1p(std::exp(-2.0 * z));
  }
  return 2.0 * z - std::log1p(std::exp(2.0 * z));
}

double constrained_log_density(const Evaluation& e, std::span<const SoftConstraint> constraints,
                               double tau) {
  double value = bridge_log_density(e.log_target, e.log_reference, tau);
  if (value == -kInf) {
    return value;
  }
  for (std::size_t c = 0; c < constraints.size(); ++c) {
    const SoftConstraint& constraint = constraints[c];
    if (constraint.mode == ConstraintMode::Hard) {
      if (!constraint.satisfied(e.kappa[c])) {
        return -kInf;
      }
      continue;
    }
    value += soft_indicator_log(e.kappa[c], constraint.tolerance, tau);
  }
  return value;
}

bool passes_hard_constraints(const Evaluation& e, std::span<const SoftConstraint> constraints) {
  if (!e.admissible || e.log_target == -kInf || std::isnan(e.log_target)) {
    return false;
  }
  for (std::size_t c = 0; c < constraints.size(); ++c) {
    if (!constraints[c].satisfied(e.kappa[c])) {
      return false;
    }
  }
  return true;
}

// -- weights ----------------------------------------------------------------------------

void normalize_log_weights(std::span<double> log_weights) {
  const double norm = log_sum_exp(log_weights);
  if (!std::isfinite(norm)) {
    throw DegenerateEnsemble(0, {});
  }
  for (double& v : log_weights) {
    v -= norm;
  }
}

double effective_sample_size(std::span<const double> log_weights) {
  const double norm = log_sum_exp(log_weights);
  if (!std::isfinite(norm)) {
    throw DegenerateEnsemble(0, {});
  }
  double sum_sq = 0.0;
  for (double v : log_weights) {
    const double w = std::exp(v - norm);
    sum_sq += w * w;
  }
  return 1.0 / sum_sq;
}

void reweight(ParticleEnsemble& ensemble, std::span<const double> old_log_density,
              std::span<const double> new_log_density) {
  if (old_log_density.size() != ensemble.size() || new_log_density.size() != ensemble.size()) {
    throw InvalidInput("reweight needs one density value per particle");
  }
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    double& lw = ensemble.log_weights[k];
    if (lw == -kInf || old_log_density[k] == -kInf || new_log_density[k] == -kInf ||
        std::isnan(new_log_density[k])) {
      lw = -kInf;
    } else {
      lw += new_log_density[k] - old_log_density[k];
    }
  }
  normalize_log_weights(ensemble.log_weights);
}

void reweight(ParticleEnsemble& ensemble, const std::function<double(std::size_t)>& old_log_density,
              const std::function<double(std::size_t)>& new_log_density) {
  std::vector<double> old_values(ensemble.size());
  std::vector<double> new_values(ensemble.size());
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    old_values[k] = old_log_density(k);
    new_values[k] = new_log_density(k);
  }
  reweight(ensemble, old_values, new_values);
}

std::vector<std::size_t> resample_indices(std::span<const double> log_weights, std::size_t count,
                                          RngStream& rng, ResamplingScheme scheme) {
  const double norm = log_sum_exp(log_weights);
  if (!std::isfinite(norm)) {
    throw DegenerateEnsemble(0, {});
  }
  std::vector<double> cumulative(log_weights.size());
  double running = 0.0;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    running += std::exp(log_weights[k] - norm);
    cumulative[k] = running;
  }
  const double total = running;
  std::vector<double> points(count);
  if (scheme == ResamplingScheme::Systematic) {
    const double u = rng.uniform();
    for (std::size_t j = 0; j < count; ++j) {
      points[j] = (static_cast<double>(j) + u) / static_cast<double>(count) * total;
    }
  } else {
    for (std::size_t j = 0; j < count; ++j) {
      points[j] = rng.uniform() * total;
    }
  }
  std::vector<std::size_t> out(count);
  for (std::size_t j = 0; j < count; ++j) {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), points[j]);
    auto index = static_cast<std::size_t>(std::distance(cumulative.begin(), it));
    index = std::min(index, log_weights.size() - 1);
    // Skip zero-weight entries that share a cumulative value with their predecessor.
    while (log_weights[index] == -kInf && index > 0) {
      --index;
    }
    out[j] = index;
  }
  if (scheme == ResamplingScheme::Multinomial) {
    std::sort(out.begin(), out.end());
  }
  return out;
}

void resample(ParticleEnsemble& ensemble, RngStream& rng, ResamplingScheme scheme) {
  const auto ancestors = resample_indices(ensemble.log_weights, ensemble.size(), rng, scheme);
  gather(ensemble, ancestors);
}

// -- proposals --------------------------------------------------------------------------

ProposalShape proposal_from_ensemble(const ParticleEnsemble& ensemble, double min_std) {
  const auto m = static_cast<Eigen::Index>(ensemble.dimension());
  Eigen::MatrixXd cov = weighted_covariance(ensemble);
  cov.diagonal().array() += min_std * min_std;
  ProposalShape shape;
  shape.factor = symmetric_sqrt(cov);
  shape.scale = 2.38 / std::sqrt(static_cast<double>(m));
  return shape;
}

PassStats metropolis_propagate(ParticleEnsemble& ensemble, const Model& model, double tau,
                               const ProposalShape& shape, std::size_t iterations, std::uint64_t seed,
                               std::uint64_t step_key, int threads) {
  const std::size_t n = ensemble.size();
  std::vector<std::size_t> accepted(n, 0);
  parallel_for(n, threads, [&](std::size_t k) {
    RngStream rng(seed, stream_key(StreamPurpose::kPropagate, step_key, k));
    accepted[k] = walk_particle(ensemble.points.col(static_cast<Eigen::Index>(k)), ensemble.evaluations[k],
                                model, tau, shape.factor, shape.scale, iterations, rng, nullptr);
  });
  PassStats stats;
  stats.proposed = n * iterations;
  stats.accepted = std::accumulate(accepted.begin(), accepted.end(), std::size_t{0});
  return stats;
}

// -- diagnostics ------------------------------------------------------------------------

std::vector<double> RunDiagnostics::ess_trace() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) {
    out.push_back(s.ess);
  }
  return out;
}

double RunDiagnostics::min_ess() const {
  double out = kInf;
  for (const auto& s : steps) {
    out = std::min(out, s.ess);
  }
  return out;
}

// -- driver -----------------------------------------------------------------------------

void evaluate_ensemble(ParticleEnsemble& ensemble, const Model& model, int threads) {
  ensemble.evaluations.resize(ensemble.size());
  parallel_for(ensemble.size(), threads, [&](std::size_t k) {
    ensemble.evaluations[k] = model.evaluate(ensemble.point(k));
  });
}

ParticleEnsemble initialize_ensemble(const Model& model, const ScmcConfig& config) {
  config.validate();
  const std::size_t n = config.n_particles;
  const std::size_t m = model.dimension();
  ParticleEnsemble ensemble;
  ensemble.points.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  ensemble.log_weights.assign(n, -std::log(static_cast<double>(n)));
  parallel_for(n, config.threads, [&](std::size_t k) {
    RngStream rng(config.seed, stream_key(StreamPurpose::kReference, 0, k));
    model.sample_reference(rng, {ensemble.points.col(static_cast<Eigen::Index>(k)).data(), m});
  });
  evaluate_ensemble(ensemble, model, config.threads);
  return ensemble;
}

RunResult scmc_run(const Model& model, const ScmcConfig& config, const StepObserver& observer) {
  return scmc_run(model, config, initialize_ensemble(model, config), observer);
}

RunResult scmc_run(const Model& model, const ScmcConfig& config, ParticleEnsemble initial,
                   const StepObserver& observer) {
  config.validate();
  if (initial.dimension() != model.dimension() || initial.size() == 0) {
    throw InvalidInput("initial ensemble does not match the model");
  }
  evaluate_ensemble(initial, model, config.threads);
  const auto constraints = model.constraints();
  const std::size_t n = initial.size();
  const auto n_steps = config.n_steps;
  ParticleEnsemble ensemble = std::move(initial);
  ensemble.log_weights.assign(n, -std::log(static_cast<double>(n)));

  RunResult result;
  result.diagnostics.n_initial = n;
  if (observer) {
    observer(0, 0.0, ensemble);
  }

  std::vector<double> old_density(n);
  std::vector<double> new_density(n);
  double step_scale = config.step_scale;
  for (std::size_t i = 1; i <= n_steps; ++i) {
    const double tau_prev = static_cast<double>(i - 1) / static_cast<double>(n_steps);
    const double tau = static_cast<double>(i) / static_cast<double>(n_steps);
    parallel_for(n, config.threads, [&](std::size_t k) {
      old_density[k] = constrained_log_density(ensemble.evaluations[k], constraints, tau_prev);
      new_density[k] = constrained_log_density(ensemble.evaluations[k], constraints, tau);
    });
    StepDiagnostics diag;
    diag.step = i;
    diag.tau = tau;
    try {
      reweight(ensemble, old_density, new_density);
    } catch (const DegenerateEnsemble&) {
      auto trace = result.diagnostics.ess_trace();
      trace.push_back(0.0);
      throw DegenerateEnsemble(i, std::move(trace));
    }
    diag.ess = effective_sample_size(ensemble.log_weights);
    if (diag.ess < config.ess_threshold_fraction * static_cast<double>(n)) {
      RngStream rng(config.seed, stream_key(StreamPurpose::kResample, i, 0));
      resample(ensemble, rng, config.resampling);
      diag.resampled = true;
    }
    ProposalShape shape = proposal_from_ensemble(ensemble, config.min_proposal_std);
    shape.scale *= step_scale;
    const PassStats stats =
        metropolis_propagate(ensemble, model, tau, shape, config.n_mc, config.seed, i, config.threads);
    diag.acceptance_rate = stats.rate();
    diag.step_scale = step_scale;
    if (config.adapt_step) {
      if (diag.acceptance_rate > config.acceptance_high) {
        step_scale *= 1.5;
      } else if (diag.acceptance_rate < config.acceptance_low) {
        step_scale /= 1.5;
      }
    }
    result.diagnostics.steps.push_back(diag);
    if (observer) {
      observer(i, tau, ensemble);
    }
  }

  if (config.final_resample && !weights_uniform(ensemble.log_weights)) {
    RngStream rng(config.seed, stream_key(StreamPurpose::kResample, n_steps + 1, 0));
    resample(ensemble, rng, config.resampling);
    result.diagnostics.final_resampled = true;
  }
  if (config.final_mc_iterations > 0) {
    ProposalShape shape = proposal_from_ensemble(ensemble, config.min_proposal_std);
    shape.scale *= step_scale;
    const PassStats stats = metropolis_propagate(ensemble, model, 1.0, shape, config.final_mc_iterations,
                                                 config.seed, n_steps + 1, config.threads);
    result.diagnostics.final_acceptance_rate = stats.rate();
  }

  std::vector<std::size_t> survivors;
  survivors.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (ensemble.log_weights[k] != -kInf && passes_hard_constraints(ensemble.evaluations[k], constraints)) {
      survivors.push_back(k);
    }
  }
  result.final_population = ensemble;
  ParticleEnsemble accepted;
  accepted.points.resize(ensemble.points.rows(), static_cast<Eigen::Index>(survivors.size()));
  accepted.evaluations.resize(survivors.size());
  for (std::size_t j = 0; j < survivors.size(); ++j) {
    accepted.points.col(static_cast<Eigen::Index>(j)) = ensemble.points.col(static_cast<Eigen::Index>(survivors[j]));
    accepted.evaluations[j] = ensemble.evaluations[survivors[j]];
  }
  accepted.log_weights.assign(survivors.size(),
                              survivors.empty() ? 0.0 : -std::log(static_cast<double>(survivors.size())));
  accepted.generation = ensemble.generation;
  result.accepted = std::move(accepted);
  result.diagnostics.n_accepted = survivors.size();
  return result;
}

// -- exploration ------------------------------------------------------------------------

PassStats explore(ParticleEnsemble& ensemble, const Model& model, const ExploreOptions& options) {
  const auto m = static_cast<Eigen::Index>(ensemble.dimension());
  ProposalShape shape;
  switch (options.preset) {
    case ExplorePreset::Isotropic:
      shape.factor = Eigen::MatrixXd::Identity(m, m);
      break;
    case ExplorePreset::Principal:
      shape.factor = symmetric_sqrt(weighted_covariance(ensemble), options.principal_axes);
      break;
    case ExplorePreset::Ensemble:
    default:
      shape.factor = symmetric_sqrt(weighted_covariance(ensemble));
      break;
  }
  shape.scale = options.step_scale * 2.38 / std::sqrt(static_cast<double>(m));
  const std::size_t n = ensemble.size();
  std::vector<std::size_t> accepted(n, 0);
  const std::function<bool(const Evaluation&)>* predicate = options.predicate ? &options.predicate : nullptr;
  parallel_for(n, options.threads, [&](std::size_t k) {
    RngStream rng(options.seed, stream_key(StreamPurpose::kExplore, 0, k));
    accepted[k] = walk_particle(ensemble.points.col(static_cast<Eigen::Index>(k)), ensemble.evaluations[k],
                                model, 1.0, shape.factor, shape.scale, options.iterations, rng, predicate);
  });
  PassStats stats;
  stats.proposed = n * options.iterations;
  stats.accepted = std::accumulate(accepted.begin(), accepted.end(), std::size_t{0});
  return stats;
}

}  // namespace qscmc
