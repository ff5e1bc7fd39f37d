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

#ifndef QSCMC_OTJ_HPP
#define QSCMC_OTJ_HPP

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "qscmc/engine.hpp"
#include "qscmc/targets.hpp"

/**
 * \file
 * \brief Size and content of the nested regions f >= lambda F.
 *
 * The size s_lambda is the flat-measure fraction of the region and the content c_lambda
 * its target probability. Content follows from a target sample by counting; size follows
 * from region averages g_lambda = <ln f - ln lambda - ln F> over flat region samples:
 *
 *   s_lambda = s_0 (g_0 / g_lambda) exp(-int_{ln lambda_0}^{ln lambda} du / g),
 *   c_lambda = [lambda s_lambda + int_lambda^1 s] / int_0^1 s.
 */

namespace qscmc {

/// Strictly decreasing lambda values in (0, 1].
struct LambdaGrid {
  std::vector<double> values;

  /// \throws InvalidParameter when not strictly decreasing inside (0, 1].
  void validate() const;

  /// n points equally spaced in ln lambda from lambda_max down to lambda_min (both kept).
  static LambdaGrid log_spaced(double lambda_max, double lambda_min, std::size_t points);

  /// Points from just below 1 down to lambda_min at `per_decade` points per decade; 1 is
  /// excluded and lambda_min is the last point.
  static LambdaGrid descending(double lambda_min, std::size_t per_decade);
};

/// Fraction of the sample with log_f >= ln lambda + log_F, per lambda; 1 for lambda = 0.
/// \throws InvalidInput for an empty sample.
std::vector<double> content_from_sample(std::span<const double> log_f, double log_F,
                                        std::span<const double> lambdas);

/// Mean of log_f - ln lambda - log_F over a flat sample of the region.
/// \throws InvalidInput for an empty sample.
/// \throws InvalidSample when a member lies outside the region by more than `tolerance`.
double region_log_average(std::span<const double> log_f, double lambda, double log_F,
                          double tolerance = 1e-9);

/// Least-squares fit of sampled region averages consistent with nested regions: the mean
/// of ln(f / F) over the region, g + ln lambda, is non-increasing along a descending grid.
/// Weighted pool-adjacent-violators on g + ln lambda; a monotone input is returned as is.
/// With the fitted averages the log-mean size integral is non-increasing in lambda.
std::vector<double> monotone_region_averages(std::span<const double> lambdas, std::span<const double> g,
                                             std::span<const double> weights);

/// Quadrature of the integral of 1/g over u = ln lambda between grid points.
enum class SizeQuadrature {
  /// Exact for g piecewise linear in u, including where g vanishes at the top of the grid.
  LogMean,
  Trapezoid,
};

/// Sizes on a monotone lambda grid from the region averages and the anchor
/// (grid[anchor_index], s_anchor).
/// \throws SingularIntegrand when some g <= 0.
std::vector<double> size_integral(std::span<const double> lambdas, std::span<const double> g,
                                  std::size_t anchor_index, double s_anchor,
                                  SizeQuadrature rule = SizeQuadrature::LogMean);

/// Contents from sizes on a strictly monotone grid in [0, 1]. The grid is augmented with
/// (0, 1) unless lambda = 0 is present and with (1, 0) unless lambda = 1 is present;
/// integrals use the trapezoid rule in lambda. Output follows the input order.
/// \throws InvalidInput for a grid that is not strictly monotone inside [0, 1].
std::vector<double> size_to_content(std::span<const double> lambdas, std::span<const double> s);

struct OtjConfig {
  /// Anchor lambda_0; absent means the calibration quantile decides.
  std::optional<double> lambda0;
  /// Fraction of the calibration sample the automatic anchor keeps.
  double anchor_quantile = 0.03;
  std::size_t calibration_samples = 100000;
  /// Below this calibration fraction the anchor is rejected.
  double min_anchor_fraction = 1e-3;
  std::size_t points_per_decade = 20;
  /// Region sampler per grid point: flat target, region constraint, warm start.
  ScmcConfig region;
  /// Bridge steps of the first region run, which starts from a single point.
  std::size_t initial_steps = 20;
  ConstraintMode region_mode = ConstraintMode::Hard;
  double region_tolerance = 1e3;
  /// Optional precision run re-anchored at this lambda from the calibration run's size.
  std::optional<double> precision_lambda;
  std::size_t precision_points_per_decade = 40;
  SizeQuadrature size_rule = SizeQuadrature::LogMean;
  /// Offset towards the maximally mixed state of the common starting point.
  double start_offset = 1e-9;
  std::uint64_t seed = 1;
};

struct OtjRun {
  LambdaGrid grid;
  /// Sampled region averages and their monotone fit, which enters the size integral.
  std::vector<double> g;
  std::vector<double> g_fit;
  std::vector<double> s;
  std::vector<double> c;
  std::vector<std::size_t> sample_size;
  std::vector<double> ess_min;
  double lambda0 = 0.0;
  double s0 = 0.0;
  std::size_t anchor_index = 0;

  /// Content at lambda by linear interpolation in ln lambda, 1 at lambda = 0, 0 at
  /// lambda = 1; below the grid the smallest-lambda value is extended.
  double content_at(double lambda) const;
  /// Size at lambda, interpolated the same way.
  double size_at(double lambda) const;

  /// Columns lambda, g, g_fit, s, c, sample_size, ess_min at 17 significant digits.
  void write_csv(std::ostream& out) const;
};

struct Calibration {
  double lambda0 = 0.0;
  double fraction = 0.0;
  std::size_t samples = 0;
};

/// Fraction of a flat state sample inside the lambda_0 region.
/// \throws AnchorTooDeep when the fraction is below `min_anchor_fraction`.
Calibration calibrate_anchor(const DirichletTarget& target, const Peak& peak, const OtjConfig& config);

/// Flat samples of each region, descending from lambda near 1 with warm starts. Fills
/// g, sample_size, ess_min; s and c are left empty.
OtjRun descend_regions(const DirichletTarget& target, const Peak& peak, const LambdaGrid& grid,
                       const OtjConfig& config);

struct OtjResult {
  OtjRun calibration;
  std::optional<OtjRun> precision;
  Calibration anchor;
};

/// Calibration, region descent, size integral and size-to-content, followed by the
/// optional precision run.
OtjResult otj_protocol(const DirichletTarget& target, const Peak& peak, const OtjConfig& config);

}  // namespace qscmc

#endif  // QSCMC_OTJ_HPP
