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

// Command-line front end. Talks to the library only through tcgp.h.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tcgp/tcgp.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int ExitFor(tcgp_status s) {
  if (s == TCGP_OK) return kExitOk;
  if (s == TCGP_ERR_VALIDATION || s == TCGP_ERR_ARGUMENT) return kExitValidation;
  return kExitRuntime;
}

int Report(tcgp_status s) {
  std::cerr << "error: " << tcgp_last_error_message() << "\n";
  return ExitFor(s);
}

std::string Take(char* s) {
  std::string out = s ? s : "";
  tcgp_string_free(s);
  return out;
}

// Config handle with an optional output directory override.
int LoadConfig(const std::string& path, const std::string& out_dir,
               tcgp_config** cfg) {
  tcgp_status s = tcgp_config_load(path.c_str(), cfg);
  if (s != TCGP_OK) return Report(s);
  if (!out_dir.empty()) {
    s = tcgp_config_set_output_dir(*cfg, out_dir.c_str());
    if (s != TCGP_OK) {
      tcgp_config_free(*cfg);
      return Report(s);
    }
  }
  return kExitOk;
}

int RunOne(const tcgp_config* cfg, const std::string& dir,
           std::string* summary) {
  tcgp_result* res = nullptr;
  tcgp_status s = tcgp_run(cfg, &res);
  if (s != TCGP_OK) return Report(s);
  s = tcgp_result_write(res, dir.c_str());
  if (s == TCGP_OK) {
    char* text = nullptr;
    s = tcgp_result_summary_json(res, &text);
    if (s == TCGP_OK) *summary = Take(text);
  }
  tcgp_result_free(res);
  return s == TCGP_OK ? kExitOk : Report(s);
}

int CmdRun(const std::string& config, const std::string& out_dir) {
  tcgp_config* cfg = nullptr;
  if (int rc = LoadConfig(config, out_dir, &cfg)) return rc;
  char* dir = nullptr;
  tcgp_config_get_output_dir(cfg, &dir);
  const std::string target = Take(dir);
  std::string summary;
  const int rc = RunOne(cfg, target, &summary);
  tcgp_config_free(cfg);
  if (rc == kExitOk) std::cout << summary << "\nwrote " << target << "\n";
  return rc;
}

int CmdSweep(const std::string& config, const std::string& out_dir,
             std::vector<double> values) {
  tcgp_config* cfg = nullptr;
  if (int rc = LoadConfig(config, out_dir, &cfg)) return rc;
  char* dir = nullptr;
  tcgp_config_get_output_dir(cfg, &dir);
  const std::filesystem::path base = Take(dir);
  if (values.empty()) values = {0.001, 0.25, 0.5, 0.75, 0.999};

  std::string table =
      "index,zeta,dir,group_regret_mean,super_regret_mean,total_regret_mean\n";
  int rc = kExitOk;
  for (std::size_t i = 0; i < values.size() && rc == kExitOk; ++i) {
    tcgp_status s = tcgp_config_set_zeta(cfg, values[i]);
    if (s != TCGP_OK) {
      rc = Report(s);
      break;
    }
    char* name = nullptr;
    tcgp_sweep_dir_name(static_cast<int>(i), values[i], &name);
    const std::string sub = Take(name);
    std::string summary;
    rc = RunOne(cfg, (base / sub).string(), &summary);
    if (rc != kExitOk) break;
    const auto j = nlohmann::json::parse(summary);
    const auto& m = j.at("mean");
    char line[512];
    std::snprintf(line, sizeof line, "%zu,%.17g,%s,%.17g,%.17g,%.17g\n", i,
                  values[i], sub.c_str(), m.at("group_regret").get<double>(),
                  m.at("super_regret").get<double>(),
                  m.at("total_regret").get<double>());
    table += line;
    std::cout << "zeta " << values[i] << ": group "
              << m.at("group_regret").get<double>() << ", super "
              << m.at("super_regret").get<double>() << "\n";
  }
  tcgp_config_free(cfg);
  if (rc != kExitOk) return rc;
  std::ofstream out(base / "sweep_summary.csv", std::ios::binary);
  out << table;
  if (!out) {
    std::cerr << "error: cannot write " << (base / "sweep_summary.csv") << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int CmdCheckBounds(const std::string& trace) {
  int hold = 0;
  char* report = nullptr;
  tcgp_status s = tcgp_check_bounds_file(trace.c_str(), &hold, &report);
  if (s != TCGP_OK) return Report(s);
  std::cout << Take(report);
  if (!hold) {
    std::cerr << "bound violated on at least one trial\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int CmdIngest(const std::string& ratings, const std::string& movies,
              std::uint64_t seed) {
  char* stats = nullptr;
  tcgp_status s = tcgp_ingest(ratings.c_str(), movies.c_str(), seed, &stats);
  if (s != TCGP_OK) return Report(s);
  std::cout << Take(stats) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Threshold-constrained combinatorial GP bandits"};
  app.require_subcommand(1);

  std::string config, out_dir, trace, ratings, movies;
  std::vector<double> values;
  std::uint64_t seed = 7;

  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("config", config, "JSON config")->required();
  run->add_option("--out", out_dir, "Override output_dir");

  auto* sweep = app.add_subcommand("sweep-zeta", "Run a config for several zeta");
  sweep->add_option("config", config, "JSON config")->required();
  sweep->add_option("--values", values, "zeta values (default 5 in [0.001, 0.999])");
  sweep->add_option("--out", out_dir, "Override output_dir");

  auto* check = app.add_subcommand("check-bounds", "Replay a trace against the regret bound");
  check->add_option("trace", trace, "trace.json from a run with trace=true")->required();

  auto* ingest = app.add_subcommand("ingest", "Ingest MovieLens-style CSVs");
  ingest->add_option("ratings", ratings, "ratings.csv")->required();
  ingest->add_option("movies", movies, "movies.csv")->required();
  ingest->add_option("--seed", seed, "Location assignment seed");

  if (argc > 1 && argv[1][0] != '-') {
    bool known = false;
    for (const auto* sub : app.get_subcommands({}))
      known = known || sub->get_name() == argv[1];
    if (!known) {
      std::cerr << "unknown subcommand '" << argv[1] << "'\n\n" << app.help();
      return kExitValidation;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  if (*run) return CmdRun(config, out_dir);
  if (*sweep) return CmdSweep(config, out_dir, values);
  if (*check) return CmdCheckBounds(trace);
  if (*ingest) return CmdIngest(ratings, movies, seed);
  std::cerr << app.help();
  return kExitValidation;
}
