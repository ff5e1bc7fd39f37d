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

#include "qscmc/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "qscmc/error.hpp"

namespace qscmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_pom(const Pom& a, const Pom& b) {
  if (a.dim() != b.dim() || a.size() != b.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.size(); ++k) {
    if ((a[k] - b[k]).cwiseAbs().maxCoeff() > 1e-14) {
      return false;
    }
  }
  return true;
}

CMatrix gradient(const CMatrix& rho, const DirichletTarget& target) {
  std::vector<double> p(target.pom.size());
  pom_probabilities(rho, target.pom, p);
  CMatrix g = CMatrix::Zero(rho.rows(), rho.cols());
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (target.alphas[k] != 0.0) {
      g += (target.alphas[k] / p[k]) * target.pom[k];
    }
  }
  return g;
}

}  // namespace

// -- Dirichlet target -------------------------------------------------------------------

double DirichletTarget::total() const { return std::accumulate(alphas.begin(), alphas.end(), 0.0); }

void DirichletTarget::validate() const {
  if (alphas.size() != pom.size()) {
    throw InvalidParameter("target has " + std::to_string(alphas.size()) + " exponents for a POM with " +
                           std::to_string(pom.size()) + " outcomes");
  }
  for (double a : alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw InvalidParameter("target exponents must be finite and non-negative");
    }
  }
}

DirichletTarget DirichletTarget::from_clicks(Pom pom, const DensityMatrix& truth, std::size_t clicks,
                                             std::uint64_t seed) {
  const std::vector<double> p = pom_probabilities(truth, pom);
  std::vector<double> weights(p.size());
  std::transform(p.begin(), p.end(), weights.begin(), [](double v) { return std::max(v, 0.0); });
  RngStream rng(seed, stream_key(StreamPurpose::kAux, 0, 0));
  std::discrete_distribution<std::size_t> outcome(weights.begin(), weights.end());
  std::vector<double> counts(p.size(), 0.0);
  for (std::size_t n = 0; n < clicks; ++n) {
    counts[outcome(rng.engine())] += 1.0;
  }
  DirichletTarget target{std::move(pom), std::move(counts)};
  target.validate();
  return target;
}

double dirichlet_log_density(std::span<const double> p, std::span<const double> alphas) {
  double value = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (alphas[k] == 0.0) {
      continue;
    }
    if (!(p[k] > 0.0)) {
      return -kInf;
    }
    value += alphas[k] * std::log(p[k]);
  }
  return value;
}

double dirichlet_log_density(const CMatrix& rho, const DirichletTarget& target) {
  if (static_cast<std::size_t>(rho.rows()) != target.pom.dim()) {
    throw InvalidInput("state dimension does not match the target POM");
  }
  std::vector<double> p(target.pom.size());
  pom_probabilities(rho, target.pom, p);
  return dirichlet_log_density(p, target.alphas);
}

double dirichlet_log_density(const DensityMatrix& rho, const DirichletTarget& target) {
  return dirichlet_log_density(rho.matrix(), target);
}

// -- entanglement -----------------------------------------------------------------------

void BoundEntanglementConstraints::validate() const {
  if (dims.a < 2 || dims.b < 2) {
    throw InvalidParameter("bipartite factors must have dimension at least 2");
  }
  if (!(a_p > 0.0) || !(a_e > 0.0)) {
    throw InvalidParameter("constraint tolerances must be positive");
  }
  if (!use_ppt && !use_ccnr) {
    throw InvalidParameter("at least one entanglement criterion must be enabled");
  }
}

EntanglementKappas bound_entanglement_kappas(const CMatrix& rho, const BipartiteDims& dims) {
  return {min_pt_eigenvalue(rho, dims), ccnr_value(rho, dims) - 1.0};
}

EntanglementKappas bound_entanglement_kappas(const DensityMatrix& rho, const BipartiteDims& dims) {
  return bound_entanglement_kappas(rho.matrix(), dims);
}

// -- lambda regions ---------------------------------------------------------------------

void LambdaRegion::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidParameter("lambda must lie in [0, 1]");
  }
  if (!std::isfinite(peak_log_f)) {
    throw InvalidParameter("peak log density must be finite");
  }
}

double LambdaRegion::kappa(double log_f) const {
  if (lambda == 0.0) {
    return kInf;
  }
  return log_f - std::log(lambda) - peak_log_f;
}

double lambda_region_log_indicator(const DensityMatrix& rho, const LambdaRegion& region,
                                   const DirichletTarget& target, double a, double tau) {
  region.validate();
  if (region.lambda == 0.0) {
    return 0.0;
  }
  return soft_indicator_log(region.kappa(dirichlet_log_density(rho, target)), a, tau);
}

// -- peak -------------------------------------------------------------------------------

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  // Sort-based Euclidean projection onto {x >= 0, sum x = 1}.
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double running = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    running += u[j];
    const double t = (running - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) {
      theta = t;
    }
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

CMatrix project_to_states(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian_part(m));
  const Eigen::VectorXd values = project_to_simplex(solver.eigenvalues());
  const Eigen::MatrixXcd& v = solver.eigenvectors();
  return hermitian_part(v * values.cast<Complex>().asDiagonal() * v.adjoint());
}

namespace {

/// ||P(rho + t g) - rho|| / t with t ||g|| = 1e-3.
double projected_residual(const CMatrix& rho, const CMatrix& g, bool real) {
  const double t = 1e-3 / g.norm();
  CMatrix moved = project_to_states(rho + t * g);
  if (real) {
    moved = moved.real().cast<Complex>();
  }
  return (moved - rho).norm() / t;
}

/// Fixed-point iteration rho <- P(rho + eta grad) near the maximum, where single-step
/// improvements fall below the resolution of the log density. Steps are kept while the
/// projected residual decreases.
Peak polish_peak(CMatrix rho, const DirichletTarget& target, double eta, std::size_t iterations,
                 const PeakConfig& config) {
  const bool real = target.pom.field() == Field::Real;
  CMatrix g = gradient(rho, target);
  double residual = projected_residual(rho, g, real);
  std::size_t it = iterations;
  while (residual > config.stationarity && it < config.max_iterations && eta * g.norm() > 1e-14) {
    ++it;
    CMatrix candidate = project_to_states(rho + eta * g);
    if (real) {
      candidate = candidate.real().cast<Complex>();
    }
    const double fc = dirichlet_log_density(candidate, target);
    if (!std::isfinite(fc)) {
      eta *= 0.5;
      continue;
    }
    const CMatrix gc = gradient(candidate, target);
    const double rc = projected_residual(candidate, gc, real);
    if (rc < residual) {
      rho = std::move(candidate);
      g = gc;
      residual = rc;
    } else {
      eta *= 0.5;
    }
  }
  if (residual > config.stationarity && it >= config.max_iterations) {
    throw NonConvergence("peak search hit the iteration cap; projected gradient residual " +
                         std::to_string(residual));
  }
  Peak peak;
  peak.log_f = dirichlet_log_density(rho, target);
  peak.rho = DensityMatrix::from_trusted(std::move(rho));
  peak.iterations = it;
  peak.stationarity = residual;
  return peak;
}

}  // namespace

Peak find_peak(const DirichletTarget& target, const PeakConfig& config) {
  target.validate();
  const double total = target.total();
  if (!(total > 0.0)) {
    throw InvalidParameter("peak finding needs a positive total count");
  }
  const Pom& pom = target.pom;
  const bool real = pom.field() == Field::Real;

  std::vector<double> mode(target.alphas.size());
  std::transform(target.alphas.begin(), target.alphas.end(), mode.begin(),
                 [total](double a) { return a / total; });
  try {
    const PomInverse inverse(pom);
    CMatrix rho = inverse.reconstruct(mode);
    std::vector<double> p(pom.size());
    pom_probabilities(rho, pom, p);
    double mismatch = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      mismatch = std::max(mismatch, std::abs(p[k] - mode[k]));
    }
    if (mismatch <= 1e-12 && min_eigenvalue(rho) >= 0.0) {
      Peak peak;
      peak.log_f = dirichlet_log_density(mode, target.alphas);
      peak.rho = DensityMatrix::from_trusted(std::move(rho));
      peak.simplex_mode = true;
      return peak;
    }
  } catch (const InvalidPom&) {
    // Not informationally complete: the mode has no unique state, ascend instead.
  }

  CMatrix rho = DensityMatrix::maximally_mixed(pom.dim()).matrix();
  double f = dirichlet_log_density(rho, target);
  CMatrix g = gradient(rho, target);
  double eta = 1.0 / g.norm();
  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    CMatrix candidate;
    double fc = -kInf;
    bool improved = false;
    for (int halving = 0; halving < 80; ++halving) {
      candidate = project_to_states(rho + eta * g);
      if (real) {
        candidate = candidate.real().cast<Complex>();
      }
      fc = dirichlet_log_density(candidate, target);
      if (fc > f) {
        improved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!improved || fc - f < config.tolerance) {
      if (improved) {
        rho = candidate;
        f = fc;
      }
      return polish_peak(std::move(rho), target, eta, it, config);
    }
    rho = std::move(candidate);
    f = fc;
    g = gradient(rho, target);
    eta *= 2.0;
  }
  throw NonConvergence("peak search hit the iteration cap; best log density " + std::to_string(f));
}

// -- QuantumModel -----------------------------------------------------------------------

WalkMode walk_mode_for(const ReferenceSpec& reference) {
  return reference.kind == ReferenceKind::Dirichlet || reference.kind == ReferenceKind::DirichletPeaked
             ? WalkMode::Simplex
             : WalkMode::Matrix;
}

QuantumModel::QuantumModel(QuantumModelSpec spec) : spec_(std::move(spec)), mode_(walk_mode_for(spec_.reference)) {
  if (spec_.dim < 2) {
    throw ConfigError("state dimension must be at least 2");
  }
  if (spec_.target) {
    spec_.target->validate();
    if (spec_.target->pom.dim() != spec_.dim) {
      throw ConfigError("target POM dimension does not match the state dimension");
    }
  }
  if (mode_ == WalkMode::Simplex) {
    if (!spec_.chart_pom) {
      if (!spec_.target) {
        throw ConfigError("a Dirichlet reference needs a POM (chart_pom or a target)");
      }
      spec_.chart_pom = spec_.target->pom;
    }
    if (spec_.chart_pom->dim() != spec_.dim) {
      throw ConfigError("chart POM dimension does not match the state dimension");
    }
    chart_ = StateMap::probability(*spec_.chart_pom);
    if (chart_.field() != spec_.field) {
      throw ConfigError("chart POM field does not match the requested field");
    }
    target_on_chart_ = spec_.target && same_pom(spec_.target->pom, *spec_.chart_pom);
    const std::size_t k = spec_.chart_pom->size();
    if (spec_.reference.kind == ReferenceKind::Dirichlet) {
      if (!spec_.reference.dirichlet) {
        throw ConfigError("Dirichlet reference needs exponents");
      }
      spec_.reference.dirichlet->validate();
      if (spec_.reference.dirichlet->alphas.size() != k) {
        throw ConfigError("Dirichlet reference exponents do not match the chart POM");
      }
    } else {
      if (!target_on_chart_) {
        throw ConfigError("a peaked Dirichlet reference needs a target on the chart POM");
      }
      const double total = spec_.target->total();
      std::vector<double> center(k);
      for (std::size_t j = 0; j < k; ++j) {
        center[j] = spec_.target->alphas[j] / total;
      }
      spec_.reference.dirichlet = DirichletParams::centered(std::move(center), spec_.reference.peaked_concentration);
    }
    reference_alphas_ = spec_.reference.dirichlet->alphas;
    SoftConstraint physical;
    physical.name = "physical";
    physical.tolerance = spec_.physicality_tolerance;
    if (!(physical.tolerance > 0.0)) {
      throw ConfigError("physicality tolerance must be positive");
    }
    physical_slot_ = static_cast<int>(constraints_.size());
    constraints_.push_back(physical);
  } else {
    chart_ = StateMap::hermitian(spec_.dim, spec_.field);
    uniform_.emplace(WishartParams::uniform(spec_.dim, spec_.field));
    if (spec_.reference.kind == ReferenceKind::Wishart) {
      if (!spec_.reference.wishart) {
        throw ConfigError("Wishart reference needs parameters");
      }
      if (spec_.reference.wishart->dim != spec_.dim || spec_.reference.wishart->field != spec_.field) {
        throw ConfigError("Wishart reference does not match the state space");
      }
      wishart_.emplace(*spec_.reference.wishart);
    }
  }

  if (spec_.entanglement) {
    spec_.entanglement->validate();
    if (spec_.entanglement->dims.total() != spec_.dim) {
      throw ConfigError("bipartite dimensions do not multiply to the state dimension");
    }
    if (spec_.entanglement->use_ppt) {
      SoftConstraint ppt;
      ppt.name = "ppt";
      ppt.tolerance = spec_.entanglement->a_p;
      ppt.hard_floor = 0.0;
      ppt_slot_ = static_cast<int>(constraints_.size());
      constraints_.push_back(ppt);
    }
    if (spec_.entanglement->use_ccnr) {
      SoftConstraint ccnr;
      ccnr.name = "ccnr";
      ccnr.tolerance = spec_.entanglement->a_e;
      ccnr.hard_floor = 0.0;
      ccnr.strict = true;
      ccnr_slot_ = static_cast<int>(constraints_.size());
      constraints_.push_back(ccnr);
    }
  }
  if (spec_.region) {
    spec_.region->target.validate();
    spec_.region->region.validate();
    if (spec_.region->target.pom.dim() != spec_.dim) {
      throw ConfigError("region target POM dimension does not match the state dimension");
    }
    SoftConstraint region;
    region.name = "lambda";
    region.tolerance = spec_.region->tolerance;
    region.mode = spec_.region->mode;
    region.hard_floor = 0.0;
    region_slot_ = static_cast<int>(constraints_.size());
    region_on_chart_ = mode_ == WalkMode::Simplex && same_pom(spec_.region->target.pom, *spec_.chart_pom);
    constraints_.push_back(region);
  }
}

int QuantumModel::slot(const std::string& name) const {
  for (std::size_t c = 0; c < constraints_.size(); ++c) {
    if (constraints_[c].name == name) {
      return static_cast<int>(c);
    }
  }
  return -1;
}

CMatrix QuantumModel::state(std::span<const double> x) const {
  CMatrix rho;
  chart_.to_matrix(x, rho);
  return rho;
}

void QuantumModel::sample_reference(RngStream& rng, std::span<double> x) const {
  switch (spec_.reference.kind) {
    case ReferenceKind::Uniform:
    case ReferenceKind::Wishart: {
      CMatrix rho;
      (wishart_ ? *wishart_ : *uniform_).sample_matrix(rng, rho);
      chart_.from_matrix(rho, x);
      return;
    }
    case ReferenceKind::Dirichlet:
    case ReferenceKind::DirichletPeaked: {
      const std::vector<double> p = sample_dirichlet(*spec_.reference.dirichlet, rng);
      std::copy(p.begin(), p.end() - 1, x.begin());
      return;
    }
  }
}

Evaluation QuantumModel::evaluate(std::span<const double> x) const {
  Evaluation e;
  CMatrix rho;
  chart_.to_matrix(x, rho);

  std::vector<double> p;
  if (mode_ == WalkMode::Simplex) {
    p.assign(x.begin(), x.end());
    p.push_back(1.0 - std::accumulate(x.begin(), x.end(), 0.0));
    if (std::any_of(p.begin(), p.end(), [](double v) { return v < 0.0; })) {
      e.admissible = false;
      e.log_target = -kInf;
      e.log_reference = -kInf;
      return e;
    }
  }
  const double lowest = min_eigenvalue(rho);
  bool physical = lowest >= 0.0;
  if (mode_ == WalkMode::Matrix && !physical) {
    e.admissible = false;
    e.log_target = -kInf;
    e.log_reference = -kInf;
    return e;
  }
  if (physical_slot_ >= 0) {
    e.kappa[static_cast<std::size_t>(physical_slot_)] = lowest;
    physical = lowest >= -kPhysicalTolerance;
  }

  if (spec_.target) {
    e.log_target = target_on_chart_ ? dirichlet_log_density(p, spec_.target->alphas)
                                    : dirichlet_log_density(rho, *spec_.target);
  }
  switch (spec_.reference.kind) {
    case ReferenceKind::Uniform:
      e.log_reference = physical ? 0.0 : -kInf;
      break;
    case ReferenceKind::Wishart:
      e.log_reference = physical ? wishart_->log_density(rho) : -kInf;
      break;
    case ReferenceKind::Dirichlet:
    case ReferenceKind::DirichletPeaked:
      e.log_reference = log_density_dirichlet(p, reference_alphas_);
      break;
  }

  if (ppt_slot_ >= 0) {
    e.kappa[static_cast<std::size_t>(ppt_slot_)] = min_pt_eigenvalue(rho, spec_.entanglement->dims);
  }
  if (ccnr_slot_ >= 0) {
    e.kappa[static_cast<std::size_t>(ccnr_slot_)] = ccnr_value(rho, spec_.entanglement->dims) - 1.0;
  }
  if (region_slot_ >= 0) {
    const auto& region = *spec_.region;
    const double log_f = region_on_chart_ ? dirichlet_log_density(p, region.target.alphas)
                                  : dirichlet_log_density(rho, region.target);
    e.kappa[static_cast<std::size_t>(region_slot_)] = region.region.kappa(log_f);
  }
  return e;
}

}  // namespace qscmc
