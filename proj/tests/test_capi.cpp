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

// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

#include "tcgp/tcgp.h"

namespace fs = std::filesystem;

namespace {

std::string Take(char* s) {
  std::string out = s ? s : "";
  tcgp_string_free(s);
  return out;
}

const char* kRbfKernel =
    R"({"output1":{"family":"rbf","lengthscale":0.5,"variance":1.0},)"
    R"("output2":{"family":"rbf","lengthscale":0.5,"variance":2.0}})";

}  // namespace

TEST_CASE("version and error state") {
  CHECK(std::strlen(tcgp_version()) > 0);
  tcgp_config* c = nullptr;
  CHECK(tcgp_config_default("mars", &c) == TCGP_ERR_VALIDATION);
  CHECK(c == nullptr);
  CHECK(std::strlen(tcgp_last_error_message()) > 0);
  CHECK(tcgp_config_default("fl", nullptr) == TCGP_ERR_ARGUMENT);
  CHECK(tcgp_config_default(nullptr, &c) == TCGP_ERR_ARGUMENT);
  // Free functions accept null.
  tcgp_config_free(nullptr);
  tcgp_result_free(nullptr);
  tcgp_posterior_free(nullptr);
  tcgp_string_free(nullptr);
}

TEST_CASE("config handles") {
  tcgp_config* c = nullptr;
  REQUIRE(tcgp_config_default("fl", &c) == TCGP_OK);
  double z = 0;
  CHECK(tcgp_config_get_zeta(c, &z) == TCGP_OK);
  CHECK(z == 0.5);
  CHECK(tcgp_config_set_zeta(c, 1.0) == TCGP_ERR_VALIDATION);
  CHECK(std::string(tcgp_last_error_message()).find("zeta") != std::string::npos);
  CHECK(tcgp_config_get_zeta(c, &z) == TCGP_OK);
  CHECK(z == 0.5);
  CHECK(tcgp_config_set_zeta(c, 0.2) == TCGP_OK);
  CHECK(tcgp_config_get_zeta(c, &z) == TCGP_OK);
  CHECK(z == 0.2);
  CHECK(tcgp_config_set_n_trials(c, 0) == TCGP_ERR_VALIDATION);
  CHECK(tcgp_config_set_output_dir(c, nullptr) == TCGP_ERR_ARGUMENT);
  CHECK(tcgp_config_set_output_dir(c, "elsewhere") == TCGP_OK);
  char* s = nullptr;
  CHECK(tcgp_config_get_output_dir(c, &s) == TCGP_OK);
  CHECK(Take(s) == "elsewhere");

  char* json = nullptr;
  REQUIRE(tcgp_config_to_json(c, &json) == TCGP_OK);
  const std::string text = Take(json);
  tcgp_config* d = nullptr;
  REQUIRE(tcgp_config_parse(text.c_str(), &d) == TCGP_OK);
  REQUIRE(tcgp_config_to_json(d, &json) == TCGP_OK);
  CHECK(Take(json) == text);
  tcgp_config_free(d);
  tcgp_config_free(c);

  CHECK(tcgp_config_parse(R"({"environment":"fl","oops":1})", &d) ==
        TCGP_ERR_VALIDATION);
  CHECK(tcgp_config_load("/nonexistent.json", &d) == TCGP_ERR_VALIDATION);
}

TEST_CASE("run, summarize and write") {
  tcgp_config* c = nullptr;
  REQUIRE(tcgp_config_parse(
              R"({"environment":"fl","T":5,"n_trials":2,"trace":true})", &c) ==
          TCGP_OK);
  tcgp_result* r = nullptr;
  REQUIRE(tcgp_run(c, &r) == TCGP_OK);
  int n = 0, failed = -1;
  CHECK(tcgp_result_trial_count(r, &n) == TCGP_OK);
  CHECK(n == 2);
  CHECK(tcgp_result_failed_trials(r, &failed) == TCGP_OK);
  CHECK(failed == 0);
  double g = 0, s = 0, tot = 0;
  CHECK(tcgp_result_final_regret(r, 1, &g, &s, &tot) == TCGP_OK);
  // Total regret weighs the two parts by zeta = 0.5.
  CHECK(tot == doctest::Approx(0.5 * g + 0.5 * s));
  CHECK(tcgp_result_final_regret(r, 2, &g, &s, &tot) == TCGP_ERR_ARGUMENT);
  char* summary = nullptr;
  CHECK(tcgp_result_summary_json(r, &summary) == TCGP_OK);
  CHECK(Take(summary).find("total_regret") != std::string::npos);

  const fs::path dir = fs::temp_directory_path() / "tcgp_capi_out";
  fs::remove_all(dir);
  REQUIRE(tcgp_result_write(r, dir.c_str()) == TCGP_OK);
  CHECK(fs::exists(dir / "per_round.csv"));
  CHECK(fs::exists(dir / "aggregate.csv"));
  CHECK(fs::exists(dir / "run_meta.json"));
  int hold = 0;
  char* report = nullptr;
  CHECK(tcgp_check_bounds_file((dir / "trace.json").c_str(), &hold, &report) ==
        TCGP_OK);
  CHECK(hold == 1);
  CHECK(Take(report).find("all_hold") != std::string::npos);
  CHECK(tcgp_check_bounds_file("/nonexistent/trace.json", &hold, &report) ==
        TCGP_ERR_IO);

  const fs::path blocker = fs::temp_directory_path() / "tcgp_capi_blocker";
  std::FILE* f = std::fopen(blocker.c_str(), "w");
  std::fclose(f);
  CHECK(tcgp_result_write(r, (blocker / "x").c_str()) == TCGP_ERR_IO);
  fs::remove(blocker);
  fs::remove_all(dir);
  tcgp_result_free(r);
  tcgp_config_free(c);
}

TEST_CASE("posterior through the C API") {
  const double x[] = {0.0};
  const double y[] = {1.0, -0.5};
  tcgp_posterior* p = nullptr;
  const double sigma = 0.1;
  REQUIRE(tcgp_posterior_fit(x, y, 1, 1, kRbfKernel, sigma, 0, 1, &p) == TCGP_OK);
  // One observation, worked by hand.
  const double q[] = {0.3};
  double mean[2], sd[2];
  REQUIRE(tcgp_posterior_predict(p, q, 1, mean, sd) == TCGP_OK);
  const double k = std::exp(-0.09 / (2 * 0.25));
  const double v[2] = {1.0, 2.0};
  for (int i = 0; i < 2; ++i) {
    const double gain = v[i] * k / (v[i] + sigma * sigma);
    CHECK(mean[i] == doctest::Approx(gain * y[i]).epsilon(1e-10));
    CHECK(sd[i] * sd[i] ==
          doctest::Approx(v[i] - v[i] * k * gain).epsilon(1e-10));
  }
  CHECK(tcgp_posterior_predict(p, q, 2, mean, sd) == TCGP_ERR_INPUT);
  CHECK(tcgp_posterior_predict(nullptr, q, 1, mean, sd) == TCGP_ERR_ARGUMENT);
  tcgp_posterior_free(p);

  CHECK(tcgp_posterior_fit(x, y, 1, 1, R"({"output1":{"family":"cubic"}})", sigma,
                           0, 1, &p) == TCGP_ERR_VALIDATION);
  CHECK(tcgp_posterior_fit(x, y, 1, 1, nullptr, -1.0, 0, 1, &p) != TCGP_OK);
  CHECK(tcgp_posterior_fit(nullptr, y, 1, 1, nullptr, sigma, 0, 1, &p) ==
        TCGP_ERR_ARGUMENT);

  // Sparse with more inducing points than data falls back to exact.
  const double xs[] = {0.0, 0.5, 1.0};
  const double ys[] = {0.0, 1.0, 0.5, 0.5, 1.0, 0.0};
  tcgp_posterior* e = nullptr;
  tcgp_posterior* s = nullptr;
  REQUIRE(tcgp_posterior_fit(xs, ys, 3, 1, kRbfKernel, sigma, 0, 1, &e) == TCGP_OK);
  REQUIRE(tcgp_posterior_fit(xs, ys, 3, 1, kRbfKernel, sigma, 10, 1, &s) == TCGP_OK);
  double m1[2], s1[2], m2[2], s2[2];
  tcgp_posterior_predict(e, q, 1, m1, s1);
  tcgp_posterior_predict(s, q, 1, m2, s2);
  for (int i = 0; i < 2; ++i) {
    CHECK(m1[i] == doctest::Approx(m2[i]).epsilon(1e-12));
    CHECK(s1[i] == doctest::Approx(s2[i]).epsilon(1e-12));
  }
  tcgp_posterior_free(e);
  tcgp_posterior_free(s);
}

TEST_CASE("ingest and sweep names") {
  char* out = nullptr;
  CHECK(tcgp_ingest("/nonexistent/r.csv", "/nonexistent/m.csv", 7, &out) ==
        TCGP_ERR_IO);
  CHECK(tcgp_sweep_dir_name(0, 0.001, &out) == TCGP_OK);
  CHECK(Take(out) == "zeta_00_0.001");
}
