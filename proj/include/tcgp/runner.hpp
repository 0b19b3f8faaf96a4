// Copyright 2026 The TCGP Authors.
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

#ifndef TCGP_RUNNER_HPP_
#define TCGP_RUNNER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tcgp/engine.hpp"

namespace tcgp::runner {

enum class EnvironmentKind { kFl, kMovie, kGpSampled };

std::string ToString(EnvironmentKind kind);

struct ExperimentConfig {
  EnvironmentKind environment = EnvironmentKind::kFl;
  engine::Algorithm algorithm = engine::Algorithm::kTcgp;
  double zeta = 0.5;
  double delta = 0.05;
  double sigma = 0.05;
  int K = 1000;
  int T = 100;
  int n_trials = 8;
  std::uint64_t master_seed = 1;
  int max_arms = 1000;
  gp::PosteriorMode posterior_mode = gp::PosteriorMode::kSparse;
  int inducing_points = 10;
  gp::TwoOutputKernelSpec kernel;
  std::string output_dir = "tcgp_out";
  bool trace = false;

  env::FlConfig fl;
  env::MovieConfig movie;
  std::optional<std::string> ratings_path;
  std::optional<std::string> movies_path;
  std::uint64_t catalog_seed = 7;
  env::SyntheticCatalogConfig synthetic;
  env::GpEnvConfig gp_env;

  // Invariant check; appends messages.
  void Validate(std::vector<std::string>* out) const;
};

// Default experiment settings for an environment.
ExperimentConfig DefaultConfig(EnvironmentKind kind);

// Strict parse: unknown keys and wrong types are violations; everything is
// collected before throwing ValidationError.
ExperimentConfig ParseConfigJson(const std::string& text);
ExperimentConfig ParseConfig(const std::string& path);

// Strict parse of a kernel object shaped like the config "kernel" entry.
gp::TwoOutputKernelSpec ParseKernelJson(const std::string& text);

// Canonical JSON of a resolved config (round-trips through ParseConfigJson).
std::string ConfigToJson(const ExperimentConfig& config);

engine::LearnerConfig MakeLearner(const ExperimentConfig& config);
engine::TrialOptions MakeTrialOptions(const ExperimentConfig& config);
// Loads or synthesizes the movie catalog once and shares it across trials.
engine::EnvironmentFactory MakeEnvironmentFactory(
    const ExperimentConfig& config);

struct RunOutput {
  ExperimentConfig config;
  engine::ExperimentResult result;
  env::IngestStats catalog_stats;
};

RunOutput RunConfig(const ExperimentConfig& config);

// Column names of per_round.csv after `trial,t`.
const std::vector<std::string>& MetricColumns();

std::string PerRoundCsv(const RunOutput& run);
std::string AggregateCsv(const RunOutput& run);
std::string RunMetaJson(const RunOutput& run);
std::string TraceJson(const RunOutput& run);

// Writes per_round.csv, aggregate.csv, run_meta.json and, when tracing,
// trace.json into `dir` (created if needed). Throws IoError.
void WriteResults(const RunOutput& run, const std::string& dir);

std::vector<engine::RunTrace> ParseTraceJson(const std::string& text);
std::vector<engine::RunTrace> ReadTraceFile(const std::string& path);
std::string BoundReportJson(const std::vector<engine::BoundReport>& reports);

// Values linearly spaced over [lo, hi], inclusive.
std::vector<double> LinearSpace(double lo, double hi, int n);

// Subdirectory name used by sweep-zeta for one value.
std::string SweepDirName(int index, double zeta);

std::string FormatDouble(double v);

}  // namespace tcgp::runner

#endif  // TCGP_RUNNER_HPP_
