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

// qscmc command-line tool. Exit codes: 0 success, 1 other failure, 2 configuration error,
// 3 degenerate ensemble.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qscmc/error.hpp"
#include "qscmc/pipelines.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::size_t> particles;
  std::optional<std::size_t> steps;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config, "JSON run configuration (or a run manifest)")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "Master seed");
  app->add_option("--out", o.out, "Output directory");
  app->add_option("--threads", o.threads, "Worker threads (0 = OpenMP default); never changes results")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--particles", o.particles, "Number of particles")->check(CLI::PositiveNumber);
  app->add_option("--steps", o.steps, "Number of bridge steps")->check(CLI::PositiveNumber);
}

qscmc::RunConfig resolve(qscmc::Pipeline pipeline, const CommonOptions& o) {
  qscmc::RunConfig config = o.config.empty() ? qscmc::default_config(pipeline) : qscmc::load_config(o.config);
  if (config.pipeline != pipeline) {
    throw qscmc::ConfigError("config file is for pipeline '" + qscmc::to_string(config.pipeline) +
                             "', not '" + qscmc::to_string(pipeline) + "'");
  }
  if (o.seed) {
    config.seed = *o.seed;
  }
  if (o.out) {
    config.out = *o.out;
  }
  if (o.threads) {
    config.threads = *o.threads;
  }
  if (o.particles) {
    config.particles = *o.particles;
  }
  if (o.steps) {
    config.steps = *o.steps;
  }
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequentially constrained Monte Carlo sampling of quantum states"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qscmc::build_version());

  CommonOptions be_opts;
  CLI::App* be = app.add_subcommand("bound-entangled", "Sample PPT states violating the realignment criterion");
  add_common(be, be_opts);
  std::vector<std::size_t> dims;
  be->add_option("--dims", dims, "Subsystem dimensions d_A d_B")->expected(2);

  CommonOptions ts_opts;
  CLI::App* ts = app.add_subcommand("target-sample", "Sample a Dirichlet target and its content curve");
  add_common(ts, ts_opts);
  std::optional<std::string> reference;
  ts->add_option("--reference", reference, "uniform, wishart, dirichlet or dirichlet-peaked");

  CommonOptions otj_opts;
  CLI::App* otj = app.add_subcommand("otj", "Size and content of the lambda regions from region averages");
  add_common(otj, otj_opts);

  CommonOptions demo_opts;
  CLI::App* demo = app.add_subcommand("demo", "Illustrative runs: 1D two-peak target and qubit simplex");
  add_common(demo, demo_opts);
  std::string kind = "all";
  demo->add_option("--kind", kind, "1d, qubit or all")->check(CLI::IsMember({"1d", "qubit", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    std::vector<qscmc::RunConfig> runs;
    if (be->parsed()) {
      qscmc::RunConfig c = resolve(qscmc::Pipeline::BoundEntangled, be_opts);
      if (!dims.empty()) {
        c.dims = {dims[0], dims[1]};
        c.validate();
      }
      runs.push_back(c);
    } else if (ts->parsed()) {
      qscmc::RunConfig c = resolve(qscmc::Pipeline::TargetSample, ts_opts);
      if (reference) {
        c.reference.kind = *reference;
        c.validate();
      }
      runs.push_back(c);
    } else if (otj->parsed()) {
      runs.push_back(resolve(qscmc::Pipeline::Otj, otj_opts));
    } else if (demo->parsed()) {
      if (kind == "1d" || kind == "all") {
        runs.push_back(resolve(qscmc::Pipeline::Demo1d, demo_opts));
      }
      if (kind == "qubit" || kind == "all") {
        runs.push_back(resolve(qscmc::Pipeline::DemoQubit, demo_opts));
      }
      if (runs.size() == 2 && demo_opts.out) {
        runs[0].out = (std::filesystem::path(*demo_opts.out) / "demo-1d").string();
        runs[1].out = (std::filesystem::path(*demo_opts.out) / "demo-qubit").string();
      }
    }
    for (const qscmc::RunConfig& c : runs) {
      qscmc::execute(c, std::cout);
    }
  } catch (const qscmc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const qscmc::DegenerateEnsemble& e) {
    std::cerr << "degenerate ensemble: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
