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

#include "qscmc/otj.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <string>

#include "qscmc/error.hpp"

namespace qscmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Linear interpolation of y over a strictly decreasing grid in ln lambda.
double interpolate_log(const std::vector<double>& lambdas, const std::vector<double>& y, double lambda,
                       double at_zero, double at_one) {
  if (lambda <= 0.0) {
    return at_zero;
  }
  if (lambda >= 1.0) {
    return at_one;
  }
  if (lambda >= lambdas.front()) {
    const double t = (lambda - lambdas.front()) / (1.0 - lambdas.front());
    return y.front() + t * (at_one - y.front());
  }
  if (lambda <= lambdas.back()) {
    return y.back();
  }
  const auto it = std::lower_bound(lambdas.begin(), lambdas.end(), lambda, std::greater<>());
  const auto hi = static_cast<std::size_t>(std::distance(lambdas.begin(), it));
  const std::size_t lo = hi - 1;
  const double t = (std::log(lambda) - std::log(lambdas[lo])) / (std::log(lambdas[hi]) - std::log(lambdas[lo]));
  return y[lo] + t * (y[hi] - y[lo]);
}

}  // namespace

// -- grid -------------------------------------------------------------------------------

void LambdaGrid::validate() const {
  if (values.empty()) {
    throw InvalidParameter("lambda grid is empty");
  }
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!(values[j] > 0.0 && values[j] <= 1.0)) {
      throw InvalidParameter("lambda grid values must lie in (0, 1]");
    }
    if (j > 0 && !(values[j] < values[j - 1])) {
      throw InvalidParameter("lambda grid must be strictly decreasing");
    }
  }
}

LambdaGrid LambdaGrid::log_spaced(double lambda_max, double lambda_min, std::size_t points) {
  if (points < 2 || !(lambda_min > 0.0) || !(lambda_max > lambda_min) || lambda_max > 1.0) {
    throw InvalidParameter("log-spaced grid needs 0 < lambda_min < lambda_max <= 1 and two points");
  }
  LambdaGrid grid;
  const double hi = std::log(lambda_max);
  const double lo = std::log(lambda_min);
  for (std::size_t j = 0; j < points; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(points - 1);
    grid.values.push_back(j + 1 == points ? lambda_min : std::exp(hi + t * (lo - hi)));
  }
  grid.values.front() = lambda_max;
  return grid;
}

LambdaGrid LambdaGrid::descending(double lambda_min, std::size_t per_decade) {
  if (!(lambda_min > 0.0 && lambda_min < 1.0) || per_decade == 0) {
    throw InvalidParameter("descending grid needs 0 < lambda_min < 1 and a positive density");
  }
  const double decades = -std::log10(lambda_min);
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(decades * static_cast<double>(per_decade))));
  const double step = std::log(lambda_min) / static_cast<double>(n);
  LambdaGrid grid;
  for (std::size_t j = 1; j <= n; ++j) {
    grid.values.push_back(j == n ? lambda_min : std::exp(step * static_cast<double>(j)));
  }
  return grid;
}

// -- estimators -------------------------------------------------------------------------

std::vector<double> content_from_sample(std::span<const double> log_f, double log_F,
                                        std::span<const double> lambdas) {
  if (log_f.empty()) {
    throw InvalidInput("content needs a non-empty sample");
  }
  std::vector<double> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    if (lambda <= 0.0) {
      out.push_back(1.0);
      continue;
    }
    const double threshold = std::log(lambda) + log_F;
    const auto inside = std::count_if(log_f.begin(), log_f.end(), [threshold](double v) { return v >= threshold; });
    out.push_back(static_cast<double>(inside) / static_cast<double>(log_f.size()));
  }
  return out;
}

double region_log_average(std::span<const double> log_f, double lambda, double log_F, double tolerance) {
  if (log_f.empty()) {
    throw InvalidInput("region average needs a non-empty sample");
  }
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw InvalidParameter("region average needs 0 < lambda <= 1");
  }
  const double shift = std::log(lambda) + log_F;
  double total = 0.0;
  for (double v : log_f) {
    const double kappa = v - shift;
    if (kappa < -tolerance || std::isnan(kappa)) {
      throw InvalidSample("sample point lies outside the lambda region (kappa = " + std::to_string(kappa) + ")");
    }
    total += std::max(kappa, 0.0);
  }
  return total / static_cast<double>(log_f.size());
}

namespace {

/// Integral of 1/g over a segment of length du with end values ga and gb. LogMean:
/// du * ln(gb / ga) / (gb - ga).
double inverse_segment(double du, double ga, double gb, SizeQuadrature rule) {
  if (rule == SizeQuadrature::Trapezoid) {
    return du * 0.5 * (1.0 / ga + 1.0 / gb);
  }
  const double r = gb / ga - 1.0;
  if (std::abs(r) < 1e-6) {
    return du / ga * (1.0 - r / 2.0 + r * r / 3.0);
  }
  return du * std::log1p(r) / (gb - ga);
}

}  // namespace

std::vector<double> monotone_region_averages(std::span<const double> lambdas, std::span<const double> g,
                                             std::span<const double> weights) {
  if (lambdas.size() != g.size() || weights.size() != g.size()) {
    throw InvalidInput("monotone fit needs one average and one weight per grid point");
  }
  const std::size_t n = g.size();
  // Blocks of pooled h = g + ln lambda, oriented so that h must be non-decreasing in index.
  const bool descending = n > 1 && lambdas[0] > lambdas[1];
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = descending ? n - 1 - i : i;
    if (!(weights[j] > 0.0)) {
      throw InvalidInput("monotone fit weights must be positive");
    }
    blocks.push_back({g[j] + std::log(lambdas[j]), weights[j], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block top = blocks.back();
      blocks.pop_back();
      Block& below = blocks.back();
      const double weight = below.weight + top.weight;
      below.mean = (below.mean * below.weight + top.mean * top.weight) / weight;
      below.weight = weight;
      below.count += top.count;
    }
  }
  std::vector<double> fit(n);
  std::size_t i = 0;
  for (const Block& b : blocks) {
    for (std::size_t k = 0; k < b.count; ++k, ++i) {
      const std::size_t j = descending ? n - 1 - i : i;
      fit[j] = b.count == 1 ? g[j] : b.mean - std::log(lambdas[j]);
    }
  }
  return fit;
}

std::vector<double> size_integral(std::span<const double> lambdas, std::span<const double> g,
                                  std::size_t anchor_index, double s_anchor, SizeQuadrature rule) {
  if (lambdas.size() != g.size() || lambdas.empty() || anchor_index >= lambdas.size()) {
    throw InvalidInput("size integral needs matching grid and averages and a valid anchor");
  }
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (!(g[j] > 0.0)) {
      throw SingularIntegrand(lambdas[j]);
    }
  }
  const std::size_t n = lambdas.size();
  std::vector<double> integral(n, 0.0);
  for (std::size_t j = anchor_index + 1; j < n; ++j) {
    integral[j] = integral[j - 1] + inverse_segment(std::log(lambdas[j]) - std::log(lambdas[j - 1]), g[j - 1], g[j], rule);
  }
  for (std::size_t j = anchor_index; j-- > 0;) {
    integral[j] = integral[j + 1] + inverse_segment(std::log(lambdas[j]) - std::log(lambdas[j + 1]), g[j + 1], g[j], rule);
  }
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) {
    s[j] = s_anchor * (g[anchor_index] / g[j]) * std::exp(-integral[j]);
  }
  return s;
}

std::vector<double> size_to_content(std::span<const double> lambdas, std::span<const double> s) {
  if (lambdas.size() != s.size() || lambdas.empty()) {
    throw InvalidInput("size-to-content needs one size per grid point");
  }
  const std::size_t n = lambdas.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool decreasing = n > 1 && lambdas[0] > lambdas[1];
  if (decreasing) {
    std::reverse(order.begin(), order.end());
  }
  // Ascending copy augmented with (0, 1), unless lambda = 0 is given, and (1, 0).
  std::vector<double> x{0.0};
  std::vector<double> y{1.0};
  std::vector<std::size_t> position(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lambda = lambdas[order[k]];
    if (k == 0 && lambda == 0.0) {
      y[0] = s[order[k]];
      position[k] = 0;
      continue;
    }
    if (!(lambda > x.back()) || lambda > 1.0) {
      throw InvalidInput("size-to-content grid must be strictly monotone inside [0, 1]");
    }
    x.push_back(lambda);
    y.push_back(s[order[k]]);
    position[k] = x.size() - 1;
  }
  if (x.back() < 1.0) {
    x.push_back(1.0);
    y.push_back(0.0);
  }
  // tail[i] = integral of s from x[i] to 1.
  std::vector<double> tail(x.size(), 0.0);
  for (std::size_t i = x.size() - 1; i-- > 0;) {
    tail[i] = tail[i + 1] + 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  }
  const double denominator = tail[0];
  std::vector<double> c(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = position[k];
    c[order[k]] = (x[i] * y[i] + tail[i]) / denominator;
  }
  return c;
}

// -- runs -------------------------------------------------------------------------------

double OtjRun::content_at(double lambda) const {
  return interpolate_log(grid.values, c, lambda, 1.0, 0.0);
}

double OtjRun::size_at(double lambda) const { return interpolate_log(grid.values, s, lambda, 1.0, 0.0); }

void OtjRun::write_csv(std::ostream& out) const {
  out << "lambda,g,g_fit,s,c,sample_size,ess_min\n";
  out << std::setprecision(17);
  for (std::size_t j = 0; j < grid.values.size(); ++j) {
    out << grid.values[j] << ',' << g[j] << ',' << (j < g_fit.size() ? g_fit[j] : g[j]) << ','
        << (j < s.size() ? s[j] : 0.0) << ',' << (j < c.size() ? c[j] : 0.0) << ',' << sample_size[j] << ','
        << ess_min[j] << '\n';
  }
}

Calibration calibrate_anchor(const DirichletTarget& target, const Peak& peak, const OtjConfig& config) {
  if (config.calibration_samples == 0) {
    throw ConfigError("calibration needs a positive sample size");
  }
  const Field field = target.pom.field();
  const WishartDistribution flat(WishartParams::uniform(target.pom.dim(), field));
  std::vector<double> delta(config.calibration_samples);
  for (std::size_t k = 0; k < delta.size(); ++k) {
    RngStream rng(config.seed, stream_key(StreamPurpose::kAux, 1, k));
    CMatrix rho;
    flat.sample_matrix(rng, rho);
    delta[k] = dirichlet_log_density(rho, target) - peak.log_f;
  }
  Calibration cal;
  cal.samples = delta.size();
  double log_lambda0 = 0.0;
  if (config.lambda0) {
    if (!(*config.lambda0 > 0.0 && *config.lambda0 < 1.0)) {
      throw ConfigError("lambda0 must lie in (0, 1)");
    }
    log_lambda0 = std::log(*config.lambda0);
  } else {
    if (!(config.anchor_quantile > 0.0 && config.anchor_quantile < 1.0)) {
      throw ConfigError("anchor quantile must lie in (0, 1)");
    }
    std::vector<double> sorted = delta;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const auto index = static_cast<std::size_t>(config.anchor_quantile * static_cast<double>(sorted.size()));
    log_lambda0 = std::min(sorted[std::min(index, sorted.size() - 1)], -1e-12);
  }
  const auto inside = std::count_if(delta.begin(), delta.end(), [log_lambda0](double v) { return v >= log_lambda0; });
  cal.lambda0 = config.lambda0 ? *config.lambda0 : std::exp(log_lambda0);
  cal.fraction = static_cast<double>(inside) / static_cast<double>(delta.size());
  if (cal.fraction < config.min_anchor_fraction) {
    throw AnchorTooDeep(log_lambda0 / std::log(10.0), cal.fraction);
  }
  return cal;
}

OtjRun descend_regions(const DirichletTarget& target, const Peak& peak, const LambdaGrid& grid,
                       const OtjConfig& config) {
  grid.validate();
  const std::size_t dim = target.pom.dim();
  const Field field = target.pom.field();
  const std::size_t n = config.region.n_particles;

  QuantumModelSpec spec;
  spec.dim = dim;
  spec.field = field;
  spec.reference.kind = ReferenceKind::Uniform;
  RegionConstraint region{target, LambdaRegion{grid.values.front(), peak.log_f}, config.region_tolerance,
                          config.region_mode};
  spec.region = region;

  // Common starting point: the peak pulled slightly into the interior.
  const CMatrix mixed = DensityMatrix::maximally_mixed(dim).matrix();
  const CMatrix start = (1.0 - config.start_offset) * peak.rho.matrix() + config.start_offset * mixed;
  const StateMap chart = StateMap::hermitian(dim, field);
  const std::vector<double> x0 = chart.coordinates(DensityMatrix::from_trusted(start));
  ParticleEnsemble ensemble;
  ensemble.points.resize(static_cast<Eigen::Index>(x0.size()), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    std::copy(x0.begin(), x0.end(), ensemble.points.col(static_cast<Eigen::Index>(k)).data());
  }
  ensemble.log_weights.assign(n, -std::log(static_cast<double>(n)));

  OtjRun run;
  run.grid = grid;
  for (std::size_t j = 0; j < grid.values.size(); ++j) {
    const double lambda = grid.values[j];
    spec.region->region.lambda = lambda;
    const QuantumModel model(spec);
    ScmcConfig cfg = config.region;
    cfg.seed = splitmix64(config.seed ^ splitmix64(j + 1));
    if (j == 0) {
      cfg.n_steps = std::max(cfg.n_steps, config.initial_steps);
    }
    RunResult result = scmc_run(model, cfg, std::move(ensemble));
    const std::size_t slot = static_cast<std::size_t>(model.slot("lambda"));
    const std::size_t survivors = result.accepted.size();
    if (survivors == 0) {
      throw DegenerateEnsemble(j, result.diagnostics.ess_trace());
    }
    std::vector<double> log_f(survivors);
    const double shift = std::log(lambda) + peak.log_f;
    for (std::size_t k = 0; k < survivors; ++k) {
      log_f[k] = result.accepted.evaluations[k].kappa[slot] + shift;
    }
    run.g.push_back(region_log_average(log_f, lambda, peak.log_f));
    run.sample_size.push_back(survivors);
    run.ess_min.push_back(result.diagnostics.min_ess());

    ensemble = std::move(result.accepted);
    if (survivors < n) {
      RngStream rng(cfg.seed, stream_key(StreamPurpose::kResample, 0xFFFFFF, 0));
      const auto ancestors = resample_indices(ensemble.log_weights, n, rng, ResamplingScheme::Systematic);
      ParticleEnsemble refilled;
      refilled.points.resize(ensemble.points.rows(), static_cast<Eigen::Index>(n));
      for (std::size_t k = 0; k < n; ++k) {
        refilled.points.col(static_cast<Eigen::Index>(k)) = ensemble.points.col(static_cast<Eigen::Index>(ancestors[k]));
      }
      refilled.log_weights.assign(n, -std::log(static_cast<double>(n)));
      ensemble = std::move(refilled);
    }
    ensemble.evaluations.clear();
  }
  return run;
}

namespace {

std::vector<double> fitted_averages(const OtjRun& run) {
  const std::vector<double> weights(run.sample_size.begin(), run.sample_size.end());
  return monotone_region_averages(run.grid.values, run.g, weights);
}

}  // namespace

OtjResult otj_protocol(const DirichletTarget& target, const Peak& peak, const OtjConfig& config) {
  OtjResult result;
  result.anchor = calibrate_anchor(target, peak, config);
  const LambdaGrid grid = LambdaGrid::descending(result.anchor.lambda0, config.points_per_decade);
  OtjRun run = descend_regions(target, peak, grid, config);
  run.lambda0 = result.anchor.lambda0;
  run.s0 = result.anchor.fraction;
  run.anchor_index = grid.values.size() - 1;
  run.g_fit = fitted_averages(run);
  run.s = size_integral(run.grid.values, run.g_fit, run.anchor_index, run.s0, config.size_rule);
  run.c = size_to_content(run.grid.values, run.s);
  result.calibration = std::move(run);

  if (config.precision_lambda) {
    const double lambda1 = *config.precision_lambda;
    if (!(lambda1 >= result.anchor.lambda0 && lambda1 < 1.0)) {
      throw ConfigError("precision lambda must lie in [lambda0, 1)");
    }
    const LambdaGrid fine = LambdaGrid::descending(lambda1, config.precision_points_per_decade);
    OtjConfig precise = config;
    precise.seed = splitmix64(config.seed ^ 0x5052454349534Eull);
    OtjRun p = descend_regions(target, peak, fine, precise);
    p.lambda0 = lambda1;
    p.s0 = result.calibration.size_at(lambda1);
    p.anchor_index = fine.values.size() - 1;
    p.g_fit = fitted_averages(p);
    p.s = size_integral(p.grid.values, p.g_fit, p.anchor_index, p.s0, config.size_rule);
    p.c = size_to_content(p.grid.values, p.s);
    result.precision = std::move(p);
  }
  return result;
}

}  // namespace qscmc
