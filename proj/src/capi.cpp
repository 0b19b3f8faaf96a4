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

#include "tcgp/tcgp.h"

#include <cstring>
#include <exception>
#include <memory>
#include <string>

#include "json.hpp"
#include "tcgp/engine.hpp"
#include "tcgp/errors.hpp"
#include "tcgp/movielens.hpp"
#include "tcgp/posterior.hpp"
#include "tcgp/runner.hpp"

struct tcgp_config {
  tcgp::runner::ExperimentConfig config;
};

struct tcgp_result {
  tcgp::runner::RunOutput run;
};

struct tcgp_posterior {
  tcgp::gp::PosteriorState state;
  std::size_t dimension;
};

namespace {

using namespace tcgp;

thread_local std::string g_last_error;

tcgp_status Fail(tcgp_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs body and maps exceptions to status codes.
template <class F>
tcgp_status Guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return TCGP_OK;
  } catch (const Error& e) {
    return Fail(static_cast<tcgp_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(TCGP_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return Fail(TCGP_ERR_RUNTIME, e.what());
  }
}

char* CopyString(const std::string& s) {
  char* p = new char[s.size() + 1];
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

#define TCGP_REQUIRE(cond, what) \
  if (!(cond)) return Fail(TCGP_ERR_ARGUMENT, what)

template <class Mutate>
tcgp_status Update(tcgp_config* c, Mutate&& mutate) {
  TCGP_REQUIRE(c, "config is null");
  return Guard([&] {
    runner::ExperimentConfig next = c->config;
    mutate(next);
    std::vector<std::string> errs;
    next.Validate(&errs);
    if (!errs.empty()) throw ValidationError(errs);
    c->config = std::move(next);
  });
}

}  // namespace

extern "C" {

const char* tcgp_version(void) { return "0.1.0"; }

const char* tcgp_last_error_message(void) { return g_last_error.c_str(); }

void tcgp_string_free(char* s) { delete[] s; }

tcgp_status tcgp_config_default(const char* environment, tcgp_config** out) {
  TCGP_REQUIRE(environment && out, "null argument");
  *out = nullptr;
  return Guard([&] {
    std::string text = std::string("{\"environment\":") +
                       nlohmann::json(environment).dump() + "}";
    *out = new tcgp_config{runner::ParseConfigJson(text)};
  });
}

tcgp_status tcgp_config_load(const char* path, tcgp_config** out) {
  TCGP_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return Guard([&] { *out = new tcgp_config{runner::ParseConfig(path)}; });
}

tcgp_status tcgp_config_parse(const char* json, tcgp_config** out) {
  TCGP_REQUIRE(json && out, "null argument");
  *out = nullptr;
  return Guard([&] { *out = new tcgp_config{runner::ParseConfigJson(json)}; });
}

void tcgp_config_free(tcgp_config* config) { delete config; }

tcgp_status tcgp_config_to_json(const tcgp_config* config, char** out) {
  TCGP_REQUIRE(config && out, "null argument");
  return Guard([&] { *out = CopyString(runner::ConfigToJson(config->config)); });
}

tcgp_status tcgp_config_set_zeta(tcgp_config* config, double zeta) {
  return Update(config, [&](runner::ExperimentConfig& c) { c.zeta = zeta; });
}

tcgp_status tcgp_config_set_master_seed(tcgp_config* config, uint64_t seed) {
  return Update(config,
                [&](runner::ExperimentConfig& c) { c.master_seed = seed; });
}

tcgp_status tcgp_config_set_n_trials(tcgp_config* config, int n) {
  return Update(config, [&](runner::ExperimentConfig& c) { c.n_trials = n; });
}

tcgp_status tcgp_config_set_output_dir(tcgp_config* config, const char* dir) {
  TCGP_REQUIRE(dir, "dir is null");
  return Update(config,
                [&](runner::ExperimentConfig& c) { c.output_dir = dir; });
}

tcgp_status tcgp_config_get_zeta(const tcgp_config* config, double* out) {
  TCGP_REQUIRE(config && out, "null argument");
  *out = config->config.zeta;
  return TCGP_OK;
}

tcgp_status tcgp_config_get_output_dir(const tcgp_config* config, char** out) {
  TCGP_REQUIRE(config && out, "null argument");
  return Guard([&] { *out = CopyString(config->config.output_dir); });
}

tcgp_status tcgp_run(const tcgp_config* config, tcgp_result** out) {
  TCGP_REQUIRE(config && out, "null argument");
  *out = nullptr;
  return Guard([&] {
    auto r = std::make_unique<tcgp_result>();
    r->run = runner::RunConfig(config->config);
    *out = r.release();
  });
}

void tcgp_result_free(tcgp_result* result) { delete result; }

tcgp_status tcgp_result_write(const tcgp_result* result, const char* dir) {
  TCGP_REQUIRE(result && dir, "null argument");
  return Guard([&] { runner::WriteResults(result->run, dir); });
}

tcgp_status tcgp_result_trial_count(const tcgp_result* result, int* out) {
  TCGP_REQUIRE(result && out, "null argument");
  *out = static_cast<int>(result->run.result.trials.size());
  return TCGP_OK;
}

tcgp_status tcgp_result_failed_trials(const tcgp_result* result, int* out) {
  TCGP_REQUIRE(result && out, "null argument");
  *out = result->run.result.failed;
  return TCGP_OK;
}

tcgp_status tcgp_result_final_regret(const tcgp_result* result, int trial,
                                     double* group, double* super_arm,
                                     double* total) {
  TCGP_REQUIRE(result, "result is null");
  const auto& trials = result->run.result.trials;
  TCGP_REQUIRE(trial >= 0 && trial < static_cast<int>(trials.size()),
               "trial index out of range");
  const auto& tr = trials[trial];
  if (!tr.ok) return Fail(TCGP_ERR_RUNTIME, "trial failed: " + tr.error);
  const auto& l = tr.ledger;
  const bool any = l.size() > 0;
  if (group) *group = any ? l.cum_group().back() : 0.0;
  if (super_arm) *super_arm = any ? l.cum_super().back() : 0.0;
  if (total) *total = any ? l.cum_total().back() : 0.0;
  return TCGP_OK;
}

tcgp_status tcgp_result_summary_json(const tcgp_result* result, char** out) {
  TCGP_REQUIRE(result && out, "null argument");
  return Guard([&] {
    nlohmann::json trials = nlohmann::json::array();
    double g = 0, s = 0, t = 0;
    int ok = 0;
    for (const auto& tr : result->run.result.trials) {
      if (!tr.ok) {
        trials.push_back({{"trial", tr.trial}, {"ok", false}, {"error", tr.error}});
        continue;
      }
      const auto& l = tr.ledger;
      const double lg = l.size() ? l.cum_group().back() : 0.0;
      const double ls = l.size() ? l.cum_super().back() : 0.0;
      const double lt = l.size() ? l.cum_total().back() : 0.0;
      trials.push_back({{"trial", tr.trial}, {"ok", true},
                        {"group_regret", lg}, {"super_regret", ls},
                        {"total_regret", lt}});
      g += lg;
      s += ls;
      t += lt;
      ++ok;
    }
    nlohmann::json j = {{"trials", trials}, {"failed", result->run.result.failed}};
    if (ok > 0)
      j["mean"] = {{"group_regret", g / ok}, {"super_regret", s / ok},
                   {"total_regret", t / ok}};
    *out = CopyString(j.dump(2));
  });
}

tcgp_status tcgp_check_bounds_file(const char* trace_path, int* all_hold,
                                   char** report_json) {
  TCGP_REQUIRE(trace_path && all_hold, "null argument");
  return Guard([&] {
    const auto traces = runner::ReadTraceFile(trace_path);
    std::vector<engine::BoundReport> reports;
    bool hold = true;
    for (const auto& t : traces) {
      reports.push_back(engine::CheckBounds(t));
      hold = hold && reports.back().regret_within_bound &&
             reports.back().lower.holds;
    }
    *all_hold = hold ? 1 : 0;
    if (report_json) *report_json = CopyString(runner::BoundReportJson(reports));
  });
}

tcgp_status tcgp_ingest(const char* ratings_path, const char* movies_path,
                        uint64_t seed, char** stats_json) {
  TCGP_REQUIRE(ratings_path && movies_path && stats_json, "null argument");
  return Guard([&] {
    const auto cat = env::IngestMovieLens(ratings_path, movies_path, seed);
    const auto& s = cat.stats;
    nlohmann::json j = {{"rating_rows", s.rating_rows},
                        {"movie_rows", s.movie_rows},
                        {"malformed_rating_rows", s.malformed_rating_rows},
                        {"malformed_movie_rows", s.malformed_movie_rows},
                        {"unknown_movie_ratings", s.unknown_movie_ratings},
                        {"before_cutoff", s.before_cutoff},
                        {"users_seen", s.users_seen},
                        {"users_kept", s.users_kept},
                        {"movies_kept", cat.movie_ids.size()}};
    *stats_json = CopyString(j.dump(2));
  });
}

tcgp_status tcgp_sweep_dir_name(int index, double zeta, char** out) {
  TCGP_REQUIRE(out, "null argument");
  return Guard([&] { *out = CopyString(runner::SweepDirName(index, zeta)); });
}

tcgp_status tcgp_posterior_fit(const double* x, const double* y, size_t n,
                               size_t d, const char* kernel_json,
                               double noise_sigma, int sparse_points,
                               uint64_t seed, tcgp_posterior** out) {
  TCGP_REQUIRE(out, "out is null");
  *out = nullptr;
  TCGP_REQUIRE(n == 0 || (x && y), "null data with n > 0");
  TCGP_REQUIRE(d >= 1, "dimension must be at least 1");
  TCGP_REQUIRE(sparse_points >= 0, "sparse_points must be nonnegative");
  TCGP_REQUIRE(noise_sigma > 0, "noise_sigma must be positive");
  return Guard([&] {
    gp::TwoOutputKernelSpec kernel;
    if (kernel_json) kernel = runner::ParseKernelJson(kernel_json);
    gp::ObservationSet obs(noise_sigma);
    for (size_t i = 0; i < n; ++i) {
      obs.Append(Eigen::Map<const Eigen::VectorXd>(x + i * d,
                                                   static_cast<Eigen::Index>(d)),
                 Eigen::Vector2d(y[2 * i], y[2 * i + 1]));
    }
    auto p = std::make_unique<tcgp_posterior>();
    p->dimension = d;
    p->state = sparse_points == 0
                   ? gp::FitExactPosterior(obs, kernel)
                   : gp::FitSparsePosterior(obs, kernel, sparse_points, seed);
    *out = p.release();
  });
}

void tcgp_posterior_free(tcgp_posterior* posterior) { delete posterior; }

tcgp_status tcgp_posterior_predict(const tcgp_posterior* posterior,
                                   const double* x, size_t d, double mean[2],
                                   double std[2]) {
  TCGP_REQUIRE(posterior && x && mean && std, "null argument");
  if (d != posterior->dimension)
    return Fail(TCGP_ERR_INPUT, "dimension mismatch");
  return Guard([&] {
    const auto p = posterior->state.Predict(
        Eigen::Map<const Eigen::VectorXd>(x, static_cast<Eigen::Index>(d)));
    mean[0] = p.mean[0];
    mean[1] = p.mean[1];
    std[0] = p.std[0];
    std[1] = p.std[1];
  });
}

}  // extern "C"
