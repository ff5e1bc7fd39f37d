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

#ifndef QSCMC_PIPELINES_HPP
#define QSCMC_PIPELINES_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qscmc/engine.hpp"
#include "qscmc/io.hpp"
#include "qscmc/otj.hpp"
#include "qscmc/targets.hpp"

/**
 * \file
 * \brief Run configuration and the end-to-end pipelines behind the command-line tool.
 *
 * Every pipeline is split into a pure `run_*` step returning its results in memory and a
 * `write_*` step emitting files. Output files never contain timings or thread counts, so
 * a rerun of the same resolved configuration reproduces them byte for byte.
 */

namespace qscmc {

inline constexpr int kSchemaVersion = 1;

enum class Pipeline { BoundEntangled, TargetSample, Otj, Demo1d, DemoQubit };

std::string to_string(Pipeline pipeline);
/// \throws ConfigError for unknown names.
Pipeline pipeline_from_string(const std::string& name);

struct TargetConfig {
  /// "trine" (one rebit), "tetrahedron" (product POM on `qubits` qubits) or "computational".
  std::string pom = "trine";
  std::size_t qubits = 1;
  /// Dimension of the computational POM.
  std::size_t dim = 2;
  /// Explicit exponents; empty means simulated clicks, or the trine default when
  /// `clicks` is zero.
  std::vector<double> alphas;
  std::size_t clicks = 0;
  /// True state of the simulated clicks: "zero", "maximally-mixed" or "random-pure".
  std::string truth = "zero";
  std::uint64_t click_seed = 7;
};

struct ReferenceConfig {
  /// "uniform", "wishart", "dirichlet" or "dirichlet-peaked".
  std::string kind = "uniform";
  /// Wishart degrees of freedom; 0 means the dimension.
  std::size_t dof = 0;
  /// Exponents of the plain Dirichlet reference; empty means all zero.
  std::vector<double> alphas;
  /// Total concentration of the peaked Dirichlet; 0 means the target's.
  double concentration = 0.0;
};

struct ContentGridConfig {
  double lambda_min = 1e-10;
  double lambda_max = 0.5;
  std::size_t points = 20;

  std::vector<double> lambdas() const;
};

struct OtjPipelineConfig {
  std::optional<double> lambda0;
  double anchor_quantile = 0.03;
  std::size_t calibration_samples = 100000;
  std::size_t points_per_decade = 20;
  std::size_t region_particles = 1000;
  std::size_t region_steps = 2;
  std::size_t region_mc_iterations = 15;
  std::size_t region_final_mc_iterations = 20;
  std::size_t initial_steps = 20;
  std::optional<double> precision_lambda;
  std::size_t precision_points_per_decade = 40;
  /// "log-mean" or "trapezoid".
  std::string size_rule = "log-mean";
  /// Also run direct SCMC on the target and compare content curves on the content grid.
  bool compare_direct = true;
};

struct DemoConfig {
  std::size_t bins = 60;
  double histogram_min = -5.0;
  double histogram_max = 5.0;
  /// Grid points of the exact bridge densities.
  std::size_t curve_points = 401;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  Pipeline pipeline = Pipeline::TargetSample;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out = "out";

  std::size_t particles = 1000;
  std::size_t steps = 10;
  std::size_t mc_iterations = 15;
  std::size_t final_mc_iterations = 20;
  double ess_threshold = 0.8;
  ResamplingScheme resampling = ResamplingScheme::Multinomial;
  double step_scale = 1.0;
  bool adapt_step = true;
  double min_proposal_std = 1e-4;

  std::array<std::size_t, 2> dims{3, 3};
  double a_p = 5e4;
  double a_e = 5e4;
  bool use_ppt = true;
  bool use_ccnr = true;

  TargetConfig target;
  ReferenceConfig reference;
  double physicality_tolerance = 1e3;
  ContentGridConfig content;
  OtjPipelineConfig otj;
  DemoConfig demo;

  /// Sampler settings with the run seed and thread count.
  ScmcConfig scmc() const;
  /// \throws ConfigError on inconsistent values.
  void validate() const;
};

/// Defaults suited to each pipeline (the 3x3 bound-entangled run, the trine target, ...).
RunConfig default_config(Pipeline pipeline);

/// Parses a configuration document onto the pipeline defaults. A run manifest is also
/// accepted; its embedded configuration is used.
/// \throws ConfigError for unknown fields, wrong types or a missing or unsupported
/// schema_version.
RunConfig parse_config(const nlohmann::json& document);
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration.
nlohmann::json to_json(const RunConfig& config);

/// Hex digest of the resolved configuration without `threads` and `out`.
std::string config_hash(const RunConfig& config);

/// Output of `git describe` for this build.
std::string build_version();

/// Run manifest: resolved configuration and build information.
nlohmann::json manifest(const RunConfig& config);

struct BoundEntangledResult {
  RunResult run;
  std::vector<CMatrix> accepted;
  /// (min PT eigenvalue, realignment norm) of the reference population and of the
  /// accepted states.
  std::vector<std::array<double, 2>> reference_scatter;
  std::vector<std::array<double, 2>> accepted_scatter;
  /// Accepted states failing the independent check with the SVD realignment norm.
  std::size_t reverification_failures = 0;
};

BoundEntangledResult run_bound_entangled(const RunConfig& config);
void write_bound_entangled(const RunConfig& config, const BoundEntangledResult& result,
                           const std::filesystem::path& dir);

struct TargetSampleResult {
  RunResult run;
  std::vector<CMatrix> accepted;
  std::vector<double> log_f;
  Peak peak;
  std::vector<double> lambdas;
  std::vector<double> content;
  /// Fraction of the reference population that is physical.
  double initial_physical_fraction = 0.0;
};

DirichletTarget build_target(const TargetConfig& target);
/// Model of the configured target and reference.
QuantumModelSpec target_model_spec(const RunConfig& config, const DirichletTarget& target);

TargetSampleResult run_target_sample(const RunConfig& config);
void write_target_sample(const RunConfig& config, const TargetSampleResult& result,
                         const std::filesystem::path& dir);

struct OtjPipelineResult {
  OtjResult otj;
  Peak peak;
  std::vector<double> lambdas;
  std::vector<double> content_otj;
  /// Present when `compare_direct` is set.
  std::optional<TargetSampleResult> direct;
};

OtjConfig otj_config(const RunConfig& config);
OtjPipelineResult run_otj(const RunConfig& config);
void write_otj(const RunConfig& config, const OtjPipelineResult& result,
               const std::filesystem::path& dir);

/// Two-peak mixture target reached from a single gaussian reference.
struct TwoPeakDemo {
  double reference_mean = 0.0;
  double reference_std = 2.0;
  std::array<double, 2> means{-2.0, 2.5};
  std::array<double, 2> stds{0.5, 0.7};
  std::array<double, 2> weights{0.4, 0.6};

  double log_reference(double x) const;
  double log_target(double x) const;
  double target_cdf(double x) const;
  FunctionModel model() const;
};

struct Demo1dResult {
  RunResult run;
  std::vector<double> taus;
  /// Per step: weighted histogram densities on the configured bins.
  std::vector<std::vector<double>> histograms;
  /// Per step: exact normalized bridge density on the curve grid.
  std::vector<std::vector<double>> curves;
  std::vector<double> curve_x;
  std::vector<double> final_sample;
  double ks_distance = 0.0;
};

Demo1dResult run_demo_1d(const RunConfig& config);
void write_demo_1d(const RunConfig& config, const Demo1dResult& result,
                   const std::filesystem::path& dir);

/// Largest |F_n(x) - F(x)| of the sample against the CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

struct QubitCloudPoint {
  double x = 0.0;
  double z = 0.0;
  double weight = 0.0;
  bool physical = false;
};

struct DemoQubitResult {
  RunResult run;
  std::vector<double> taus;
  std::vector<std::vector<QubitCloudPoint>> clouds;
  std::vector<QubitCloudPoint> accepted;
  std::array<std::size_t, 20> bin_counts{};
  double chi_square = 0.0;
};

/// Equal-area disk bin: four rings of equal area times five equal sectors.
std::size_t disk_bin(double x, double z);

DemoQubitResult run_demo_qubit(const RunConfig& config);
void write_demo_qubit(const RunConfig& config, const DemoQubitResult& result,
                      const std::filesystem::path& dir);

/// Runs the configured pipeline and writes its outputs, the resolved configuration and
/// the manifest into `config.out`. Progress goes to `log`.
void execute(const RunConfig& config, std::ostream& log);

}  // namespace qscmc

#endif  // QSCMC_PIPELINES_HPP
