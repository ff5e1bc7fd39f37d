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

#include "qscmc/pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "qscmc/error.hpp"
#include "qscmc/simd/kernels.hpp"

#ifndef QSCMC_GIT_DESCRIBE
#define QSCMC_GIT_DESCRIBE "unknown"
#endif

namespace qscmc {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// -- strict JSON reading ------------------------------------------------------------------

/// Reads the fields of one JSON object and rejects whatever it did not consume.
/// Unsigned, or a signed integer that is not negative (documents built in code).
bool is_non_negative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) {
      throw ConfigError(where() + " must be an object");
    }
  }

  bool has(const char* key) const { return object_.contains(key); }

  void read(const char* key, std::size_t& out) {
    if (const json* v = take(key)) {
      if (!is_non_negative_integer(*v)) {
        throw ConfigError(where(key) + " must be a non-negative integer");
      }
      out = v->get<std::size_t>();
    }
  }
  void read(const char* key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) {
        throw ConfigError(where(key) + " must be an integer");
      }
      out = v->get<int>();
    }
  }
  void read(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) {
        throw ConfigError(where(key) + " must be a number");
      }
      out = v->get<double>();
    }
  }
  void read(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) {
        throw ConfigError(where(key) + " must be true or false");
      }
      out = v->get<bool>();
    }
  }
  void read(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) {
        throw ConfigError(where(key) + " must be a string");
      }
      out = v->get<std::string>();
    }
  }
  void read(const char* key, std::optional<double>& out) {
    if (const json* v = take(key)) {
      if (v->is_null()) {
        out.reset();
      } else if (v->is_number()) {
        out = v->get<double>();
      } else {
        throw ConfigError(where(key) + " must be a number or null");
      }
    }
  }
  void read(const char* key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) {
        throw ConfigError(where(key) + " must be an array of numbers");
      }
      out.clear();
      for (const json& item : *v) {
        if (!item.is_number()) {
          throw ConfigError(where(key) + " must be an array of numbers");
        }
        out.push_back(item.get<double>());
      }
    }
  }

  /// Nested object, or null when absent.
  const json* child(const char* key) { return take(key); }

  void finish() const {
    for (const auto& item : object_.items()) {
      if (!used_.count(item.key())) {
        throw ConfigError("unknown field " + where(item.key().c_str()));
      }
    }
  }

  std::string where(const char* key = nullptr) const {
    if (!key) {
      return path_.empty() ? std::string("config") : path_;
    }
    return "'" + (path_.empty() ? std::string(key) : path_ + "." + key) + "'";
  }


 private:
  const json* take(const char* key) {
    const auto it = object_.find(key);
    if (it == object_.end()) {
      return nullptr;
    }
    used_.insert(key);
    return &*it;
  }

  const json& object_;
  std::string path_;
  std::set<std::string> used_;
};

std::string resampling_name(ResamplingScheme scheme) {
  return scheme == ResamplingScheme::Systematic ? "systematic" : "multinomial";
}

ResamplingScheme resampling_from(const std::string& name) {
  if (name == "multinomial") {
    return ResamplingScheme::Multinomial;
  }
  if (name == "systematic") {
    return ResamplingScheme::Systematic;
  }
  throw ConfigError("unknown resampling scheme '" + name + "'");
}

void parse_scmc(const json& j, const std::string& path, RunConfig& c) {
  ObjectReader r(j, path);
  r.read("particles", c.particles);
  r.read("steps", c.steps);
  r.read("mc_iterations", c.mc_iterations);
  r.read("final_mc_iterations", c.final_mc_iterations);
  r.read("ess_threshold", c.ess_threshold);
  std::string resampling = resampling_name(c.resampling);
  r.read("resampling", resampling);
  c.resampling = resampling_from(resampling);
  r.read("step_scale", c.step_scale);
  r.read("adapt_step", c.adapt_step);
  r.read("min_proposal_std", c.min_proposal_std);
  r.finish();
}

void parse_bipartite(const json& j, const std::string& path, RunConfig& c) {
  ObjectReader r(j, path);
  std::vector<double> dims;
  r.read("dims", dims);
  if (!dims.empty()) {
    if (dims.size() != 2 || dims[0] < 1 || dims[1] < 1 || dims[0] != std::floor(dims[0]) ||
        dims[1] != std::floor(dims[1])) {
      throw ConfigError(r.where("dims") + " must be two positive integers");
    }
    c.dims = {static_cast<std::size_t>(dims[0]), static_cast<std::size_t>(dims[1])};
  }
  r.read("a_p", c.a_p);
  r.read("a_e", c.a_e);
  r.read("ppt", c.use_ppt);
  r.read("ccnr", c.use_ccnr);
  r.finish();
}

void parse_target(const json& j, const std::string& path, TargetConfig& t) {
  ObjectReader r(j, path);
  r.read("pom", t.pom);
  r.read("qubits", t.qubits);
  r.read("dim", t.dim);
  r.read("alphas", t.alphas);
  r.read("clicks", t.clicks);
  r.read("truth", t.truth);
  r.read("click_seed", t.click_seed);
  r.finish();
}

void parse_reference(const json& j, const std::string& path, ReferenceConfig& ref) {
  ObjectReader r(j, path);
  r.read("kind", ref.kind);
  r.read("dof", ref.dof);
  r.read("alphas", ref.alphas);
  r.read("concentration", ref.concentration);
  r.finish();
}

void parse_content(const json& j, const std::string& path, ContentGridConfig& g) {
  ObjectReader r(j, path);
  r.read("lambda_min", g.lambda_min);
  r.read("lambda_max", g.lambda_max);
  r.read("points", g.points);
  r.finish();
}

void parse_otj(const json& j, const std::string& path, OtjPipelineConfig& o) {
  ObjectReader r(j, path);
  r.read("lambda0", o.lambda0);
  r.read("anchor_quantile", o.anchor_quantile);
  r.read("calibration_samples", o.calibration_samples);
  r.read("points_per_decade", o.points_per_decade);
  r.read("region_particles", o.region_particles);
  r.read("region_steps", o.region_steps);
  r.read("region_mc_iterations", o.region_mc_iterations);
  r.read("region_final_mc_iterations", o.region_final_mc_iterations);
  r.read("initial_steps", o.initial_steps);
  r.read("precision_lambda", o.precision_lambda);
  r.read("precision_points_per_decade", o.precision_points_per_decade);
  r.read("size_rule", o.size_rule);
  r.read("compare_direct", o.compare_direct);
  r.finish();
}

void parse_demo(const json& j, const std::string& path, DemoConfig& d) {
  ObjectReader r(j, path);
  r.read("bins", d.bins);
  r.read("histogram_min", d.histogram_min);
  r.read("histogram_max", d.histogram_max);
  r.read("curve_points", d.curve_points);
  r.finish();
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// -- shared helpers -----------------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> dump_header(const RunConfig& config,
                                                             const std::string& dims) {
  return {{"pipeline", to_string(config.pipeline)},
          {"dims", dims},
          {"seed", std::to_string(config.seed)},
          {"git_describe", build_version()},
          {"config_hash", config_hash(config)}};
}

std::vector<CMatrix> accepted_states(const QuantumModel& model, const ParticleEnsemble& ensemble) {
  std::vector<CMatrix> states;
  states.reserve(ensemble.size());
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    states.push_back(model.state(ensemble.point(k)));
  }
  return states;
}

std::string diagnostics_csv(const RunDiagnostics& d) {
  std::ostringstream out;
  out << "step,tau,ess,resampled,acceptance_rate,step_scale\n";
  for (const StepDiagnostics& s : d.steps) {
    out << s.step << ',' << format_double(s.tau) << ',' << format_double(s.ess) << ','
        << (s.resampled ? 1 : 0) << ',' << format_double(s.acceptance_rate) << ','
        << format_double(s.step_scale) << '\n';
  }
  return out.str();
}

json diagnostics_summary(const RunDiagnostics& d) {
  return json{{"n_initial", d.n_initial},
              {"n_accepted", d.n_accepted},
              {"yield", d.yield()},
              {"min_ess", d.steps.empty() ? 0.0 : d.min_ess()},
              {"final_acceptance_rate", d.final_acceptance_rate},
              {"final_resampled", d.final_resampled}};
}

void write_json(const std::filesystem::path& path, const json& value) {
  write_text(path, value.dump(2) + "\n");
}

/// Bloch coordinates (x, z) of a 2 x 2 state.
std::array<double, 2> bloch_xz(const CMatrix& rho) {
  return {2.0 * rho(0, 1).real(), (rho(0, 0) - rho(1, 1)).real()};
}

double normal_log_pdf(double x, double mean, double sd) {
  const double u = (x - mean) / sd;
  return -0.5 * u * u - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double log_add(double a, double b) {
  if (a == -kInf) {
    return b;
  }
  if (b == -kInf) {
    return a;
  }
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

// -- configuration --------------------------------------------------------------------------

std::string to_string(Pipeline pipeline) {
  switch (pipeline) {
    case Pipeline::BoundEntangled:
      return "bound-entangled";
    case Pipeline::TargetSample:
      return "target-sample";
    case Pipeline::Otj:
      return "otj";
    case Pipeline::Demo1d:
      return "demo-1d";
    case Pipeline::DemoQubit:
      return "demo-qubit";
  }
  return "unknown";
}

Pipeline pipeline_from_string(const std::string& name) {
  for (Pipeline p : {Pipeline::BoundEntangled, Pipeline::TargetSample, Pipeline::Otj, Pipeline::Demo1d,
                     Pipeline::DemoQubit}) {
    if (to_string(p) == name) {
      return p;
    }
  }
  throw ConfigError("unknown pipeline '" + name + "'");
}

std::vector<double> ContentGridConfig::lambdas() const {
  if (points == 0) {
    return {};
  }
  if (points == 1) {
    return {lambda_max};
  }
  std::vector<double> values(points);
  const double lo = std::log(lambda_min);
  const double hi = std::log(lambda_max);
  for (std::size_t j = 0; j < points; ++j) {
    values[j] = std::exp(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(points - 1));
  }
  values.front() = lambda_min;
  values.back() = lambda_max;
  return values;
}

ScmcConfig RunConfig::scmc() const {
  ScmcConfig c;
  c.n_particles = particles;
  c.n_steps = steps;
  c.n_mc = mc_iterations;
  c.final_mc_iterations = final_mc_iterations;
  c.ess_threshold_fraction = ess_threshold;
  c.resampling = resampling;
  c.step_scale = step_scale;
  c.adapt_step = adapt_step;
  c.min_proposal_std = min_proposal_std;
  c.seed = seed;
  c.threads = threads;
  return c;
}

void RunConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(schema_version));
  }
  if (threads < 0) {
    throw ConfigError("threads must be non-negative");
  }
  scmc().validate();
  if (!(physicality_tolerance > 0.0)) {
    throw ConfigError("physicality_tolerance must be positive");
  }
  if (pipeline == Pipeline::BoundEntangled) {
    if (dims[0] < 2 || dims[1] < 2) {
      throw ConfigError("bipartite dims must both be at least 2");
    }
    if (!(a_p > 0.0) || !(a_e > 0.0)) {
      throw ConfigError("a_p and a_e must be positive");
    }
    if (!use_ppt && !use_ccnr) {
      throw ConfigError("at least one of the ppt and ccnr criteria must be enabled");
    }
  }
  if (pipeline == Pipeline::TargetSample || pipeline == Pipeline::Otj) {
    if (!(content.lambda_min > 0.0) || !(content.lambda_max < 1.0) ||
        !(content.lambda_min <= content.lambda_max)) {
      throw ConfigError("content grid needs 0 < lambda_min <= lambda_max < 1");
    }
    static const std::set<std::string> kinds{"uniform", "wishart", "dirichlet", "dirichlet-peaked"};
    if (!kinds.count(reference.kind)) {
      throw ConfigError("unknown reference kind '" + reference.kind + "'");
    }
    static const std::set<std::string> poms{"trine", "tetrahedron", "computational"};
    if (!poms.count(target.pom)) {
      throw ConfigError("unknown target pom '" + target.pom + "'");
    }
    static const std::set<std::string> truths{"zero", "maximally-mixed", "random-pure"};
    if (!truths.count(target.truth)) {
      throw ConfigError("unknown click truth '" + target.truth + "'");
    }
  }
  if (pipeline == Pipeline::Otj) {
    otj_config(*this).region.validate();
    if (otj.points_per_decade == 0 || otj.precision_points_per_decade == 0) {
      throw ConfigError("points_per_decade must be positive");
    }
    if (otj.lambda0 && !(*otj.lambda0 > 0.0 && *otj.lambda0 < 1.0)) {
      throw ConfigError("otj.lambda0 must lie in (0, 1)");
    }
    if (!(otj.anchor_quantile > 0.0 && otj.anchor_quantile < 1.0)) {
      throw ConfigError("otj.anchor_quantile must lie in (0, 1)");
    }
  }
  if (pipeline == Pipeline::Demo1d) {
    if (demo.bins == 0 || demo.curve_points < 2 || !(demo.histogram_min < demo.histogram_max)) {
      throw ConfigError("demo histogram settings are inconsistent");
    }
  }
}

RunConfig default_config(Pipeline pipeline) {
  RunConfig c;
  c.pipeline = pipeline;
  switch (pipeline) {
    case Pipeline::BoundEntangled:
      c.out = "out/bound-entangled";
      c.particles = 1000;
      c.steps = 300;
      break;
    case Pipeline::TargetSample:
      c.out = "out/target-sample";
      c.particles = 10000;
      c.steps = 10;
      break;
    case Pipeline::Otj:
      c.out = "out/otj";
      c.particles = 10000;
      c.steps = 10;
      break;
    case Pipeline::Demo1d:
      c.out = "out/demo-1d";
      c.particles = 10000;
      c.steps = 10;
      break;
    case Pipeline::DemoQubit:
      c.out = "out/demo-qubit";
      c.particles = 10000;
      c.steps = 10;
      c.reference.kind = "dirichlet";
      break;
  }
  return c;
}

RunConfig parse_config(const json& document) {
  const json* body = &document;
  if (document.is_object() && document.contains("manifest_version")) {
    if (!document.contains("config")) {
      throw ConfigError("manifest has no config");
    }
    body = &document.at("config");
  }
  ObjectReader r(*body, "");
  if (!r.has("schema_version")) {
    throw ConfigError("config is missing schema_version");
  }
  if (!r.has("pipeline")) {
    throw ConfigError("config is missing pipeline");
  }
  int schema = 0;
  r.read("schema_version", schema);
  if (schema != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(schema));
  }
  std::string pipeline;
  r.read("pipeline", pipeline);
  RunConfig c = default_config(pipeline_from_string(pipeline));
  std::uint64_t seed = c.seed;
  if (const json* v = r.child("seed")) {
    if (!is_non_negative_integer(*v)) {
      throw ConfigError(r.where("seed") + " must be a non-negative integer");
    }
    seed = v->get<std::uint64_t>();
  }
  c.seed = seed;
  r.read("threads", c.threads);
  r.read("out", c.out);
  r.read("physicality_tolerance", c.physicality_tolerance);
  if (const json* v = r.child("scmc")) {
    parse_scmc(*v, "scmc", c);
  }
  if (const json* v = r.child("bipartite")) {
    parse_bipartite(*v, "bipartite", c);
  }
  if (const json* v = r.child("target")) {
    parse_target(*v, "target", c.target);
  }
  if (const json* v = r.child("reference")) {
    parse_reference(*v, "reference", c.reference);
  }
  if (const json* v = r.child("content")) {
    parse_content(*v, "content", c.content);
  }
  if (const json* v = r.child("otj")) {
    parse_otj(*v, "otj", c.otj);
  }
  if (const json* v = r.child("demo")) {
    parse_demo(*v, "demo", c.demo);
  }
  r.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config " + path.string());
  }
  json document;
  try {
    document = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(document);
}

json to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["pipeline"] = to_string(c.pipeline);
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out"] = c.out;
  j["physicality_tolerance"] = c.physicality_tolerance;
  j["scmc"] = {{"particles", c.particles},
               {"steps", c.steps},
               {"mc_iterations", c.mc_iterations},
               {"final_mc_iterations", c.final_mc_iterations},
               {"ess_threshold", c.ess_threshold},
               {"resampling", resampling_name(c.resampling)},
               {"step_scale", c.step_scale},
               {"adapt_step", c.adapt_step},
               {"min_proposal_std", c.min_proposal_std}};
  j["bipartite"] = {{"dims", {c.dims[0], c.dims[1]}},
                    {"a_p", c.a_p},
                    {"a_e", c.a_e},
                    {"ppt", c.use_ppt},
                    {"ccnr", c.use_ccnr}};
  j["target"] = {{"pom", c.target.pom},
                 {"qubits", c.target.qubits},
                 {"dim", c.target.dim},
                 {"alphas", c.target.alphas},
                 {"clicks", c.target.clicks},
                 {"truth", c.target.truth},
                 {"click_seed", c.target.click_seed}};
  j["reference"] = {{"kind", c.reference.kind},
                    {"dof", c.reference.dof},
                    {"alphas", c.reference.alphas},
                    {"concentration", c.reference.concentration}};
  j["content"] = {{"lambda_min", c.content.lambda_min},
                  {"lambda_max", c.content.lambda_max},
                  {"points", c.content.points}};
  j["otj"] = {{"lambda0", optional_number(c.otj.lambda0)},
              {"anchor_quantile", c.otj.anchor_quantile},
              {"calibration_samples", c.otj.calibration_samples},
              {"points_per_decade", c.otj.points_per_decade},
              {"region_particles", c.otj.region_particles},
              {"region_steps", c.otj.region_steps},
              {"region_mc_iterations", c.otj.region_mc_iterations},
              {"region_final_mc_iterations", c.otj.region_final_mc_iterations},
              {"initial_steps", c.otj.initial_steps},
              {"precision_lambda", optional_number(c.otj.precision_lambda)},
              {"precision_points_per_decade", c.otj.precision_points_per_decade},
              {"size_rule", c.otj.size_rule},
              {"compare_direct", c.otj.compare_direct}};
  j["demo"] = {{"bins", c.demo.bins},
               {"histogram_min", c.demo.histogram_min},
               {"histogram_max", c.demo.histogram_max},
               {"curve_points", c.demo.curve_points}};
  return j;
}

std::string config_hash(const RunConfig& config) {
  json j = to_json(config);
  j.erase("threads");
  j.erase("out");
  // FNV-1a over the canonical serialization; stable across builds and platforms.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

std::string build_version() { return QSCMC_GIT_DESCRIBE; }

json manifest(const RunConfig& config) {
  return json{{"manifest_version", 1},
              {"config", to_json(config)},
              {"config_hash", config_hash(config)},
              {"build",
               {{"git_describe", build_version()},
                {"compiler", __VERSION__},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                              "." + std::to_string(EIGEN_MINOR_VERSION)},
                {"simd", simd::active_kernels().name}}}};
}

// -- bound entanglement ---------------------------------------------------------------------

BoundEntangledResult run_bound_entangled(const RunConfig& config) {
  config.validate();
  QuantumModelSpec spec;
  const BipartiteDims dims{config.dims[0], config.dims[1]};
  spec.dim = dims.total();
  spec.field = Field::Complex;
  spec.reference.kind = ReferenceKind::Uniform;
  BoundEntanglementConstraints be;
  be.dims = dims;
  be.a_p = config.a_p;
  be.a_e = config.a_e;
  be.use_ppt = config.use_ppt;
  be.use_ccnr = config.use_ccnr;
  spec.entanglement = be;
  const QuantumModel model(spec);

  BoundEntangledResult result;
  auto observer = [&](std::size_t step, double, const ParticleEnsemble& ensemble) {
    if (step != 0) {
      return;
    }
    result.reference_scatter.resize(ensemble.size());
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
      const CMatrix rho = model.state(ensemble.point(k));
      result.reference_scatter[k] = {min_pt_eigenvalue(rho, dims), ccnr_value(rho, dims)};
    }
  };
  result.run = scmc_run(model, config.scmc(), observer);
  result.accepted = accepted_states(model, result.run.accepted);
  for (const CMatrix& rho : result.accepted) {
    const double mu = min_pt_eigenvalue(rho, dims);
    const double r = ccnr_value(rho, dims);
    result.accepted_scatter.push_back({mu, r});
    const bool ppt_ok = !config.use_ppt || mu >= 0.0;
    const bool ccnr_ok = !config.use_ccnr || ccnr_value_svd(rho, dims) > 1.0;
    if (!ppt_ok || !ccnr_ok || min_eigenvalue(rho) < -kPhysicalTolerance) {
      ++result.reverification_failures;
    }
  }
  return result;
}

void write_bound_entangled(const RunConfig& config, const BoundEntangledResult& result,
                           const std::filesystem::path& dir) {
  SampleDump dump;
  dump.header = dump_header(config, std::to_string(config.dims[0]) + "x" + std::to_string(config.dims[1]));
  dump.dim = config.dims[0] * config.dims[1];
  dump.states = result.accepted;
  dump.extra_names = {"min_pt_eigenvalue", "realignment_norm"};
  for (const auto& s : result.accepted_scatter) {
    dump.extra.push_back({s[0], s[1]});
  }
  write_sample_csv(dump, dir / "samples.csv");
  write_sample_bin(dump, dir / "samples.bin");
  write_text(dir / "diagnostics.csv", diagnostics_csv(result.run.diagnostics));

  std::ostringstream scatter;
  scatter << "population,min_pt_eigenvalue,realignment_norm\n";
  for (const auto& s : result.reference_scatter) {
    scatter << "reference," << format_double(s[0]) << ',' << format_double(s[1]) << '\n';
  }
  for (const auto& s : result.accepted_scatter) {
    scatter << "accepted," << format_double(s[0]) << ',' << format_double(s[1]) << '\n';
  }
  write_text(dir / "scatter.csv", scatter.str());

  json summary = diagnostics_summary(result.run.diagnostics);
  summary["reverification_failures"] = result.reverification_failures;
  write_json(dir / "summary.json", summary);
}

// -- target sampling ------------------------------------------------------------------------

DirichletTarget build_target(const TargetConfig& t) {
  Pom pom = [&] {
    if (t.pom == "trine") {
      return build_trine_pom();
    }
    if (t.pom == "tetrahedron") {
      if (t.qubits < 1) {
        throw ConfigError("target.qubits must be at least 1");
      }
      return build_product_tetrahedron_pom(t.qubits);
    }
    if (t.pom == "computational") {
      if (t.dim < 2) {
        throw ConfigError("target.dim must be at least 2");
      }
      return build_computational_pom(t.dim);
    }
    throw ConfigError("unknown target pom '" + t.pom + "'");
  }();
  if (!t.alphas.empty()) {
    if (t.alphas.size() != pom.size()) {
      throw ConfigError("target.alphas has " + std::to_string(t.alphas.size()) + " entries, the POM has " +
                        std::to_string(pom.size()) + " outcomes");
    }
    DirichletTarget target{std::move(pom), t.alphas};
    try {
      target.validate();
    } catch (const InvalidParameter& e) {
      throw ConfigError(std::string("target.alphas: ") + e.what());
    }
    return target;
  }
  if (t.clicks == 0) {
    if (t.pom != "trine") {
      throw ConfigError("target needs alphas or a click count");
    }
    return DirichletTarget{std::move(pom), {1802.0, 315.0, 303.0}};
  }
  const std::size_t d = pom.dim();
  DensityMatrix truth = DensityMatrix::maximally_mixed(d);
  if (t.truth == "zero") {
    CVector psi = CVector::Zero(static_cast<Eigen::Index>(d));
    psi(0) = 1.0;
    truth = DensityMatrix::pure(psi);
  } else if (t.truth == "random-pure") {
    RngStream rng(t.click_seed, stream_key(StreamPurpose::kAux, 1, 0));
    CVector psi(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      psi(i) = pom.field() == Field::Real ? Complex(rng.normal(), 0.0) : rng.complex_normal();
    }
    truth = DensityMatrix::pure(psi / psi.norm());
  }
  return DirichletTarget::from_clicks(std::move(pom), truth, t.clicks, t.click_seed);
}

QuantumModelSpec target_model_spec(const RunConfig& config, const DirichletTarget& target) {
  QuantumModelSpec spec;
  spec.dim = target.pom.dim();
  spec.field = target.pom.field();
  spec.target = target;
  spec.physicality_tolerance = config.physicality_tolerance;
  const ReferenceConfig& ref = config.reference;
  const std::size_t k = target.pom.size();
  if (ref.kind == "uniform") {
    spec.reference.kind = ReferenceKind::Uniform;
  } else if (ref.kind == "wishart") {
    spec.reference.kind = ReferenceKind::Wishart;
    WishartParams params = WishartParams::uniform(spec.dim, spec.field);
    if (ref.dof != 0) {
      params.dof = ref.dof;
    }
    try {
      params.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("reference: ") + e.what());
    }
    spec.reference.wishart = params;
  } else if (ref.kind == "dirichlet") {
    spec.reference.kind = ReferenceKind::Dirichlet;
    spec.chart_pom = target.pom;
    DirichletParams params;
    params.alphas = ref.alphas.empty() ? std::vector<double>(k, 0.0) : ref.alphas;
    if (params.alphas.size() != k) {
      throw ConfigError("reference.alphas must have one entry per POM outcome");
    }
    spec.reference.dirichlet = params;
  } else if (ref.kind == "dirichlet-peaked") {
    spec.reference.kind = ReferenceKind::DirichletPeaked;
    spec.chart_pom = target.pom;
    spec.reference.peaked_concentration =
        ref.concentration > 0.0 ? ref.concentration : target.total() + static_cast<double>(k);
  } else {
    throw ConfigError("unknown reference kind '" + ref.kind + "'");
  }
  return spec;
}

TargetSampleResult run_target_sample(const RunConfig& config) {
  config.validate();
  const DirichletTarget target = build_target(config.target);
  TargetSampleResult result;
  result.peak = find_peak(target);
  const QuantumModel model(target_model_spec(config, target));

  auto observer = [&](std::size_t step, double, const ParticleEnsemble& ensemble) {
    if (step != 0) {
      return;
    }
    std::size_t physical = 0;
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
      if (ensemble.evaluations[k].admissible && min_eigenvalue(model.state(ensemble.point(k))) >= -kPhysicalTolerance) {
        ++physical;
      }
    }
    result.initial_physical_fraction = static_cast<double>(physical) / static_cast<double>(ensemble.size());
  };
  ScmcConfig scmc = config.scmc();
  scmc.walk_mode = model.walk_mode();
  result.run = scmc_run(model, scmc, observer);
  result.accepted = accepted_states(model, result.run.accepted);
  result.log_f.reserve(result.accepted.size());
  for (const CMatrix& rho : result.accepted) {
    result.log_f.push_back(dirichlet_log_density(rho, target));
  }
  result.lambdas = config.content.lambdas();
  if (!result.log_f.empty()) {
    result.content = content_from_sample(result.log_f, result.peak.log_f, result.lambdas);
  }
  return result;
}

void write_target_sample(const RunConfig& config, const TargetSampleResult& result,
                         const std::filesystem::path& dir) {
  SampleDump dump;
  dump.header = dump_header(config, std::to_string(result.peak.rho.dim()));
  dump.dim = result.peak.rho.dim();
  dump.states = result.accepted;
  dump.extra_names = {"log_f"};
  for (double v : result.log_f) {
    dump.extra.push_back({v});
  }
  write_sample_csv(dump, dir / "samples.csv");
  write_sample_bin(dump, dir / "samples.bin");
  write_text(dir / "diagnostics.csv", diagnostics_csv(result.run.diagnostics));

  std::ostringstream content;
  content << "lambda,content\n";
  for (std::size_t j = 0; j < result.content.size(); ++j) {
    content << format_double(result.lambdas[j]) << ',' << format_double(result.content[j]) << '\n';
  }
  write_text(dir / "content.csv", content.str());

  json summary = diagnostics_summary(result.run.diagnostics);
  summary["peak_log_f"] = result.peak.log_f;
  summary["initial_physical_fraction"] = result.initial_physical_fraction;
  write_json(dir / "summary.json", summary);
}

// -- OTJ ------------------------------------------------------------------------------------

OtjConfig otj_config(const RunConfig& config) {
  OtjConfig o;
  o.lambda0 = config.otj.lambda0;
  o.anchor_quantile = config.otj.anchor_quantile;
  o.calibration_samples = config.otj.calibration_samples;
  o.points_per_decade = config.otj.points_per_decade;
  o.region = config.scmc();
  o.region.n_particles = config.otj.region_particles;
  o.region.n_steps = config.otj.region_steps;
  o.region.n_mc = config.otj.region_mc_iterations;
  o.region.final_mc_iterations = config.otj.region_final_mc_iterations;
  o.initial_steps = config.otj.initial_steps;
  o.precision_lambda = config.otj.precision_lambda;
  o.precision_points_per_decade = config.otj.precision_points_per_decade;
  if (config.otj.size_rule == "log-mean") {
    o.size_rule = SizeQuadrature::LogMean;
  } else if (config.otj.size_rule == "trapezoid") {
    o.size_rule = SizeQuadrature::Trapezoid;
  } else {
    throw ConfigError("unknown otj.size_rule '" + config.otj.size_rule + "'");
  }
  o.seed = config.seed;
  return o;
}

OtjPipelineResult run_otj(const RunConfig& config) {
  config.validate();
  const DirichletTarget target = build_target(config.target);
  OtjPipelineResult result;
  result.peak = find_peak(target);
  result.otj = otj_protocol(target, result.peak, otj_config(config));
  result.lambdas = config.content.lambdas();
  for (double lambda : result.lambdas) {
    result.content_otj.push_back(result.otj.calibration.content_at(lambda));
  }
  if (config.otj.compare_direct) {
    result.direct = run_target_sample(config);
  }
  return result;
}

void write_otj(const RunConfig& config, const OtjPipelineResult& result, const std::filesystem::path& dir) {
  {
    std::ostringstream out;
    result.otj.calibration.write_csv(out);
    write_text(dir / "otj.csv", out.str());
  }
  if (result.otj.precision) {
    std::ostringstream out;
    result.otj.precision->write_csv(out);
    write_text(dir / "otj_precision.csv", out.str());
  }
  std::ostringstream compare;
  compare << "lambda,content_otj" << (result.direct ? ",content_direct,abs_difference" : "") << '\n';
  for (std::size_t j = 0; j < result.lambdas.size(); ++j) {
    compare << format_double(result.lambdas[j]) << ',' << format_double(result.content_otj[j]);
    if (result.direct) {
      const double direct = result.direct->content[j];
      compare << ',' << format_double(direct) << ',' << format_double(std::abs(direct - result.content_otj[j]));
    }
    compare << '\n';
  }
  write_text(dir / "content_compare.csv", compare.str());

  json summary{{"lambda0", result.otj.anchor.lambda0},
               {"anchor_fraction", result.otj.anchor.fraction},
               {"calibration_samples", result.otj.anchor.samples},
               {"peak_log_f", result.peak.log_f},
               {"grid_points", result.otj.calibration.grid.values.size()}};
  if (result.direct) {
    double worst = 0.0;
    for (std::size_t j = 0; j < result.lambdas.size(); ++j) {
      worst = std::max(worst, std::abs(result.direct->content[j] - result.content_otj[j]));
    }
    summary["max_abs_content_difference"] = worst;
    write_target_sample(config, *result.direct, dir / "direct");
  }
  write_json(dir / "summary.json", summary);
}

// -- 1D demo --------------------------------------------------------------------------------

double TwoPeakDemo::log_reference(double x) const { return normal_log_pdf(x, reference_mean, reference_std); }

double TwoPeakDemo::log_target(double x) const {
  return log_add(std::log(weights[0]) + normal_log_pdf(x, means[0], stds[0]),
                 std::log(weights[1]) + normal_log_pdf(x, means[1], stds[1]));
}

double TwoPeakDemo::target_cdf(double x) const {
  double c = 0.0;
  for (int k = 0; k < 2; ++k) {
    c += weights[k] * 0.5 * std::erfc(-(x - means[k]) / (stds[k] * std::numbers::sqrt2));
  }
  return c;
}

FunctionModel TwoPeakDemo::model() const {
  const TwoPeakDemo demo = *this;
  return FunctionModel(
      1, [demo](RngStream& rng, std::span<double> x) { x[0] = demo.reference_mean + demo.reference_std * rng.normal(); },
      [demo](std::span<const double> x) { return demo.log_reference(x[0]); },
      [demo](std::span<const double> x) { return demo.log_target(x[0]); });
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) {
    throw InvalidInput("KS statistic of an empty sample");
  }
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

Demo1dResult run_demo_1d(const RunConfig& config) {
  config.validate();
  const TwoPeakDemo demo;
  const FunctionModel model = demo.model();
  const DemoConfig& dc = config.demo;
  const double width = (dc.histogram_max - dc.histogram_min) / static_cast<double>(dc.bins);

  Demo1dResult result;
  for (std::size_t i = 0; i < dc.curve_points; ++i) {
    result.curve_x.push_back(dc.histogram_min + (dc.histogram_max - dc.histogram_min) * static_cast<double>(i) /
                                                    static_cast<double>(dc.curve_points - 1));
  }
  // Normalizer of each bridge density from a wide fine grid (trapezoid rule).
  auto bridge_curve = [&](double tau) {
    constexpr int kFine = 12001;
    const double lo = -20.0;
    const double hi = 20.0;
    const double h = (hi - lo) / (kFine - 1);
    double z = 0.0;
    for (int i = 0; i < kFine; ++i) {
      const double x = lo + h * i;
      const double v = std::exp(bridge_log_density(demo.log_target(x), demo.log_reference(x), tau));
      z += (i == 0 || i == kFine - 1) ? 0.5 * v : v;
    }
    z *= h;
    std::vector<double> curve;
    for (double x : result.curve_x) {
      curve.push_back(std::exp(bridge_log_density(demo.log_target(x), demo.log_reference(x), tau)) / z);
    }
    return curve;
  };

  auto observer = [&](std::size_t, double tau, const ParticleEnsemble& ensemble) {
    result.taus.push_back(tau);
    std::vector<double> hist(dc.bins, 0.0);
    const std::vector<double> w = ensemble.weights();
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
      const double x = ensemble.points(0, static_cast<Eigen::Index>(k));
      const double b = std::floor((x - dc.histogram_min) / width);
      if (b >= 0.0 && b < static_cast<double>(dc.bins)) {
        hist[static_cast<std::size_t>(b)] += w[k] / width;
      }
    }
    result.histograms.push_back(std::move(hist));
    result.curves.push_back(bridge_curve(tau));
  };
  result.run = scmc_run(model, config.scmc(), observer);
  const ParticleEnsemble& accepted = result.run.accepted;
  for (std::size_t k = 0; k < accepted.size(); ++k) {
    result.final_sample.push_back(accepted.points(0, static_cast<Eigen::Index>(k)));
  }
  result.ks_distance = ks_statistic(result.final_sample, [&demo](double x) { return demo.target_cdf(x); });
  return result;
}

void write_demo_1d(const RunConfig& config, const Demo1dResult& result, const std::filesystem::path& dir) {
  const DemoConfig& dc = config.demo;
  const double width = (dc.histogram_max - dc.histogram_min) / static_cast<double>(dc.bins);
  std::ostringstream hist;
  hist << "step,tau,bin_lo,bin_hi,density\n";
  for (std::size_t s = 0; s < result.histograms.size(); ++s) {
    for (std::size_t b = 0; b < dc.bins; ++b) {
      const double lo = dc.histogram_min + width * static_cast<double>(b);
      hist << s << ',' << format_double(result.taus[s]) << ',' << format_double(lo) << ','
           << format_double(lo + width) << ',' << format_double(result.histograms[s][b]) << '\n';
    }
  }
  write_text(dir / "demo1d_histograms.csv", hist.str());

  std::ostringstream curves;
  curves << "step,tau,x,density\n";
  for (std::size_t s = 0; s < result.curves.size(); ++s) {
    for (std::size_t i = 0; i < result.curve_x.size(); ++i) {
      curves << s << ',' << format_double(result.taus[s]) << ',' << format_double(result.curve_x[i]) << ','
             << format_double(result.curves[s][i]) << '\n';
    }
  }
  write_text(dir / "demo1d_exact.csv", curves.str());

  std::ostringstream samples;
  for (const auto& [key, value] : dump_header(config, "1")) {
    samples << "# " << key << ": " << value << '\n';
  }
  samples << "x\n";
  for (double x : result.final_sample) {
    samples << format_double(x) << '\n';
  }
  write_text(dir / "demo1d_samples.csv", samples.str());
  write_text(dir / "diagnostics.csv", diagnostics_csv(result.run.diagnostics));

  json summary = diagnostics_summary(result.run.diagnostics);
  summary["ks_distance"] = result.ks_distance;
  write_json(dir / "summary.json", summary);
}

// -- qubit demo -----------------------------------------------------------------------------

std::size_t disk_bin(double x, double z) {
  const double r2 = x * x + z * z;
  const auto ring = std::min<std::size_t>(3, static_cast<std::size_t>(std::floor(4.0 * r2)));
  double angle = std::atan2(z, x);
  if (angle < 0.0) {
    angle += 2.0 * std::numbers::pi;
  }
  const auto sector = std::min<std::size_t>(4, static_cast<std::size_t>(std::floor(5.0 * angle / (2.0 * std::numbers::pi))));
  return ring * 5 + sector;
}

DemoQubitResult run_demo_qubit(const RunConfig& config) {
  config.validate();
  QuantumModelSpec spec;
  const Pom trine = build_trine_pom();
  spec.dim = 2;
  spec.field = Field::Real;
  spec.chart_pom = trine;
  spec.reference.kind = ReferenceKind::Dirichlet;
  DirichletParams params;
  params.alphas = config.reference.alphas.empty() ? std::vector<double>(3, 0.0) : config.reference.alphas;
  if (params.alphas.size() != 3) {
    throw ConfigError("reference.alphas must have three entries for the qubit demo");
  }
  spec.reference.dirichlet = params;
  spec.physicality_tolerance = config.physicality_tolerance;
  const QuantumModel model(spec);

  DemoQubitResult result;
  auto cloud_point = [&](std::span<const double> x, double weight) {
    const CMatrix rho = model.state(x);
    const auto [bx, bz] = bloch_xz(rho);
    return QubitCloudPoint{bx, bz, weight, min_eigenvalue(rho) >= -kPhysicalTolerance};
  };
  auto observer = [&](std::size_t, double tau, const ParticleEnsemble& ensemble) {
    result.taus.push_back(tau);
    const std::vector<double> w = ensemble.weights();
    std::vector<QubitCloudPoint> cloud;
    cloud.reserve(ensemble.size());
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
      cloud.push_back(cloud_point(ensemble.point(k), w[k]));
    }
    result.clouds.push_back(std::move(cloud));
  };
  ScmcConfig scmc = config.scmc();
  scmc.walk_mode = model.walk_mode();
  result.run = scmc_run(model, scmc, observer);
  const ParticleEnsemble& accepted = result.run.accepted;
  const double w = accepted.size() ? 1.0 / static_cast<double>(accepted.size()) : 0.0;
  for (std::size_t k = 0; k < accepted.size(); ++k) {
    const QubitCloudPoint p = cloud_point(accepted.point(k), w);
    result.accepted.push_back(p);
    ++result.bin_counts[disk_bin(p.x, p.z)];
  }
  const double expected = static_cast<double>(accepted.size()) / 20.0;
  if (expected > 0.0) {
    for (std::size_t c : result.bin_counts) {
      const double diff = static_cast<double>(c) - expected;
      result.chi_square += diff * diff / expected;
    }
  }
  return result;
}

void write_demo_qubit(const RunConfig& config, const DemoQubitResult& result, const std::filesystem::path& dir) {
  std::ostringstream clouds;
  clouds << "step,tau,x,z,weight,physical\n";
  for (std::size_t s = 0; s < result.clouds.size(); ++s) {
    for (const QubitCloudPoint& p : result.clouds[s]) {
      clouds << s << ',' << format_double(result.taus[s]) << ',' << format_double(p.x) << ',' << format_double(p.z)
             << ',' << format_double(p.weight) << ',' << (p.physical ? 1 : 0) << '\n';
    }
  }
  write_text(dir / "demo_qubit_clouds.csv", clouds.str());

  // Simplex corners are the states with a single nonzero trine probability.
  const PomInverse inverse(build_trine_pom());
  std::ostringstream geometry;
  geometry << "shape,x,z\n";
  for (int k = 0; k <= 3; ++k) {
    std::vector<double> p(3, 0.0);
    p[static_cast<std::size_t>(k % 3)] = 1.0;
    const auto [x, z] = bloch_xz(inverse.reconstruct(p));
    geometry << "triangle," << format_double(x) << ',' << format_double(z) << '\n';
  }
  constexpr int kCirclePoints = 360;
  for (int i = 0; i <= kCirclePoints; ++i) {
    const double t = 2.0 * std::numbers::pi * i / kCirclePoints;
    geometry << "circle," << format_double(std::cos(t)) << ',' << format_double(std::sin(t)) << '\n';
  }
  write_text(dir / "demo_qubit_geometry.csv", geometry.str());

  SampleDump dump;
  dump.header = dump_header(config, "2");
  dump.dim = 2;
  dump.extra_names = {"x", "z"};
  for (const QubitCloudPoint& p : result.accepted) {
    CMatrix rho(2, 2);
    rho << 0.5 * (1.0 + p.z), 0.5 * p.x, 0.5 * p.x, 0.5 * (1.0 - p.z);
    dump.states.push_back(rho);
    dump.extra.push_back({p.x, p.z});
  }
  write_sample_csv(dump, dir / "samples.csv");
  write_text(dir / "diagnostics.csv", diagnostics_csv(result.run.diagnostics));

  json summary = diagnostics_summary(result.run.diagnostics);
  summary["chi_square"] = result.chi_square;
  summary["bin_counts"] = result.bin_counts;
  write_json(dir / "summary.json", summary);
}

// -- dispatch -------------------------------------------------------------------------------

void execute(const RunConfig& config, std::ostream& log) {
  config.validate();
  const std::filesystem::path dir(config.out);
  std::filesystem::create_directories(dir);
  write_json(dir / "config.resolved.json", to_json(config));
  write_json(dir / "manifest.json", manifest(config));

  const auto start = std::chrono::steady_clock::now();
  log << "qscmc " << to_string(config.pipeline) << " seed " << config.seed << " -> " << dir.string() << '\n';
  switch (config.pipeline) {
    case Pipeline::BoundEntangled: {
      const auto r = run_bound_entangled(config);
      write_bound_entangled(config, r, dir);
      log << "accepted " << r.run.diagnostics.n_accepted << " of " << r.run.diagnostics.n_initial << " (yield "
          << r.run.diagnostics.yield() << "), reverification failures " << r.reverification_failures << '\n';
      break;
    }
    case Pipeline::TargetSample: {
      const auto r = run_target_sample(config);
      write_target_sample(config, r, dir);
      log << "accepted " << r.run.diagnostics.n_accepted << " of " << r.run.diagnostics.n_initial
          << ", peak log f " << r.peak.log_f << '\n';
      break;
    }
    case Pipeline::Otj: {
      const auto r = run_otj(config);
      write_otj(config, r, dir);
      log << "anchor lambda0 " << r.otj.anchor.lambda0 << " fraction " << r.otj.anchor.fraction << ", "
          << r.otj.calibration.grid.values.size() << " grid points\n";
      break;
    }
    case Pipeline::Demo1d: {
      const auto r = run_demo_1d(config);
      write_demo_1d(config, r, dir);
      log << "KS distance " << r.ks_distance << '\n';
      break;
    }
    case Pipeline::DemoQubit: {
      const auto r = run_demo_qubit(config);
      write_demo_qubit(config, r, dir);
      log << "accepted " << r.accepted.size() << ", chi-square " << r.chi_square << " (20 bins)\n";
      break;
    }
  }
  log << "elapsed " << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s\n";
}

}  // namespace qscmc
