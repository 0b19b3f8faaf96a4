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

#include "tcgp/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tcgp/errors.hpp"

namespace tcgp::runner {
namespace {

using nlohmann::json;

// Typed access to one JSON object that remembers which keys were consumed
// and records every problem instead of stopping at the first.
class Reader {
 public:
  Reader(const json& obj, std::string prefix, std::vector<std::string>* errs)
      : obj_(obj), prefix_(std::move(prefix)), errs_(errs) {}

  bool Has(const std::string& key) {
    known_.insert(key);
    return obj_.contains(key);
  }

  void Number(const std::string& key, double* out) {
    if (!Has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number()) return Bad(key, "a number");
    *out = v.get<double>();
  }

  void Integer(const std::string& key, int* out) {
    if (!Has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) return Bad(key, "an integer");
    const auto i = v.get<long long>();
    if (i < -2147483647LL || i > 2147483647LL) return Bad(key, "a 32-bit integer");
    *out = static_cast<int>(i);
  }

  void Seed(const std::string& key, std::uint64_t* out) {
    if (!Has(key)) return;
    const json& v = obj_.at(key);
    if (v.is_number_unsigned()) {
      *out = v.get<std::uint64_t>();
    } else if (v.is_number_integer() && v.get<long long>() >= 0) {
      *out = static_cast<std::uint64_t>(v.get<long long>());
    } else {
      Bad(key, "a nonnegative integer");
    }
  }

  void Bool(const std::string& key, bool* out) {
    if (!Has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) return Bad(key, "a boolean");
    *out = v.get<bool>();
  }

  bool String(const std::string& key, std::string* out) {
    if (!Has(key)) return false;
    const json& v = obj_.at(key);
    if (!v.is_string()) {
      Bad(key, "a string");
      return false;
    }
    *out = v.get<std::string>();
    return true;
  }

  const json* Object(const std::string& key) {
    if (!Has(key)) return nullptr;
    const json& v = obj_.at(key);
    if (!v.is_object()) {
      Bad(key, "an object");
      return nullptr;
    }
    return &v;
  }

  std::string Path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  void Finish() {
    for (const auto& [key, value] : obj_.items())
      if (!known_.count(key)) errs_->push_back("unknown key '" + Path(key) + "'");
  }

 private:
  void Bad(const std::string& key, const std::string& what) {
    errs_->push_back(Path(key) + " must be " + what);
  }

  const json& obj_;
  std::string prefix_;
  std::vector<std::string>* errs_;
  std::set<std::string> known_;
};

void ReadKernel(const json& obj, const std::string& prefix,
                gp::KernelSpec* spec, std::vector<std::string>* errs) {
  Reader r(obj, prefix, errs);
  std::string family;
  if (r.String("family", &family)) {
    try {
      spec->family = gp::KernelFamilyFromString(family);
    } catch (const Error&) {
      errs->push_back(r.Path("family") +
                      " must be one of rbf, matern, linear, expnorm");
    }
  }
  r.Number("lengthscale", &spec->lengthscale);
  r.Number("variance", &spec->variance);
  r.Number("matern_nu", &spec->matern_nu);
  r.Finish();
}

json KernelJson(const gp::KernelSpec& k) {
  return {{"family", gp::ToString(k.family)},
          {"lengthscale", k.lengthscale},
          {"variance", k.variance},
          {"matern_nu", k.matern_nu}};
}

gp::KernelSpec KernelFromJson(const json& j) {
  gp::KernelSpec k;
  k.family = gp::KernelFamilyFromString(j.at("family").get<std::string>());
  k.lengthscale = j.at("lengthscale").get<double>();
  k.variance = j.at("variance").get<double>();
  k.matern_nu = j.at("matern_nu").get<double>();
  return k;
}

json TwoKernelJson(const gp::TwoOutputKernelSpec& k) {
  return {{"output1", KernelJson(k.output[0])},
          {"output2", KernelJson(k.output[1])},
          {"cross_correlation", k.cross_correlation}};
}

gp::TwoOutputKernelSpec TwoKernelFromJson(const json& j) {
  gp::TwoOutputKernelSpec k;
  k.output[0] = KernelFromJson(j.at("output1"));
  k.output[1] = KernelFromJson(j.at("output2"));
  k.cross_correlation = j.at("cross_correlation").get<double>();
  return k;
}

EnvironmentKind EnvironmentFromString(const std::string& s, bool* ok) {
  *ok = true;
  if (s == "fl") return EnvironmentKind::kFl;
  if (s == "movie") return EnvironmentKind::kMovie;
  if (s == "gp_sampled") return EnvironmentKind::kGpSampled;
  *ok = false;
  return EnvironmentKind::kFl;
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string ToString(EnvironmentKind kind) {
  switch (kind) {
    case EnvironmentKind::kFl: return "fl";
    case EnvironmentKind::kMovie: return "movie";
    case EnvironmentKind::kGpSampled: return "gp_sampled";
  }
  return "unknown";
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentConfig DefaultConfig(EnvironmentKind kind) {
  ExperimentConfig c;
  c.environment = kind;
  switch (kind) {
    case EnvironmentKind::kFl:
      c.sigma = 0.05;
      c.K = 1000;
      c.T = 100;
      c.n_trials = 8;
      c.max_arms = 1000;
      c.posterior_mode = gp::PosteriorMode::kSparse;
      c.inducing_points = 10;
      for (auto& k : c.kernel.output) k = gp::KernelSpec{};
      break;
    case EnvironmentKind::kMovie:
      c.sigma = 0.05;
      c.K = 20;
      c.T = 200;
      c.n_trials = 20;
      c.max_arms = 5000;
      c.posterior_mode = gp::PosteriorMode::kSparse;
      c.inducing_points = 5;
      for (auto& k : c.kernel.output) {
        k = gp::KernelSpec{};
        k.family = gp::KernelFamily::kMatern;
        k.matern_nu = 2.5;
      }
      break;
    case EnvironmentKind::kGpSampled:
      c.sigma = 0.1;
      c.K = 10;
      c.T = 100;
      c.n_trials = 5;
      c.max_arms = 1000;
      c.posterior_mode = gp::PosteriorMode::kSparse;
      c.inducing_points = 50;
      c.kernel = env::GpEnvConfig::DefaultKernel();
      break;
  }
  return c;
}

void ExperimentConfig::Validate(std::vector<std::string>* out) const {
  if (!(zeta > 0.0 && zeta < 1.0))
    out->push_back("zeta must lie strictly inside (0, 1), got " +
                   FormatDouble(zeta));
  if (!(delta > 0.0 && delta < 1.0))
    out->push_back("delta must lie strictly inside (0, 1), got " +
                   FormatDouble(delta));
  if (!(sigma > 0.0)) out->push_back("sigma must be positive");
  if (K < 1) out->push_back("K must be at least 1");
  if (T < 1) out->push_back("T must be at least 1");
  if (n_trials < 1) out->push_back("n_trials must be at least 1");
  if (max_arms < 1) out->push_back("max_arms must be at least 1");
  if (posterior_mode == gp::PosteriorMode::kSparse && inducing_points < 1)
    out->push_back("posterior.inducing_points must be at least 1");
  kernel.Validate(out);
  if (output_dir.empty()) out->push_back("output_dir must not be empty");
  switch (environment) {
    case EnvironmentKind::kFl:
      if (!(fl.mean_clients > 0)) out->push_back("fl.mean_clients must be positive");
      if (!(fl.mean_requests > 0)) out->push_back("fl.mean_requests must be positive");
      if (fl.grid_points < 1) out->push_back("fl.grid_points must be at least 1");
      if (fl.client_pool < 1) out->push_back("fl.client_pool must be at least 1");
      break;
    case EnvironmentKind::kMovie:
      if (!(movie.mean_movies > 0)) out->push_back("movie.mean_movies must be positive");
      if (!(movie.mean_users > 0)) out->push_back("movie.mean_users must be positive");
      if (movie.threshold_high < movie.threshold_low)
        out->push_back("movie.threshold_low must not exceed movie.threshold_high");
      if (ratings_path.has_value() != movies_path.has_value())
        out->push_back("movie.ratings_path and movie.movies_path go together");
      if (synthetic.movies < synthetic.min_ratings)
        out->push_back("movie.synthetic_movies must be at least " +
                       std::to_string(synthetic.min_ratings));
      if (synthetic.users < 1) out->push_back("movie.synthetic_users must be at least 1");
      break;
    case EnvironmentKind::kGpSampled:
      if (gp_env.pool_size < 1) out->push_back("gp_sampled.pool_size must be at least 1");
      if (gp_env.dimension < 1) out->push_back("gp_sampled.dimension must be at least 1");
      if (!(gp_env.mean_groups > 0)) out->push_back("gp_sampled.mean_groups must be positive");
      if (!(gp_env.mean_arms_per_group > 0))
        out->push_back("gp_sampled.mean_arms_per_group must be positive");
      if (gp_env.max_group_size < 1 || gp_env.max_group_size > oracle::kExhaustiveLimit)
        out->push_back("gp_sampled.max_group_size must lie in [1, " +
                       std::to_string(oracle::kExhaustiveLimit) + "]");
      if (!(gp_env.threshold_percentile >= 0 && gp_env.threshold_percentile <= 100))
        out->push_back("gp_sampled.threshold_percentile must lie in [0, 100]");
      break;
  }
}

ExperimentConfig ParseConfigJson(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("config is not valid JSON: ") + e.what()});
  }
  std::vector<std::string> errs;
  if (!root.is_object()) throw ValidationError({"config must be a JSON object"});

  Reader top(root, "", &errs);
  std::string env_name;
  EnvironmentKind kind = EnvironmentKind::kFl;
  if (!top.String("environment", &env_name)) {
    if (!root.contains("environment")) errs.push_back("environment is required");
  } else {
    bool ok;
    kind = EnvironmentFromString(env_name, &ok);
    if (!ok) errs.push_back("environment must be one of fl, movie, gp_sampled");
  }
  ExperimentConfig c = DefaultConfig(kind);

  std::string algorithm;
  if (top.String("algorithm", &algorithm)) {
    try {
      c.algorithm = engine::AlgorithmFromString(algorithm);
    } catch (const Error&) {
      errs.push_back("algorithm must be one of tcgp, baseline, satisfy_only");
    }
  }
  top.Number("zeta", &c.zeta);
  top.Number("delta", &c.delta);
  top.Number("sigma", &c.sigma);
  top.Integer("K", &c.K);
  top.Integer("T", &c.T);
  top.Integer("n_trials", &c.n_trials);
  top.Seed("master_seed", &c.master_seed);
  top.Integer("max_arms", &c.max_arms);
  top.String("output_dir", &c.output_dir);
  top.Bool("trace", &c.trace);

  if (const json* p = top.Object("posterior")) {
    Reader r(*p, "posterior", &errs);
    std::string mode;
    if (r.String("mode", &mode)) {
      if (mode == "exact") c.posterior_mode = gp::PosteriorMode::kExact;
      else if (mode == "sparse") c.posterior_mode = gp::PosteriorMode::kSparse;
      else errs.push_back("posterior.mode must be exact or sparse");
    }
    r.Integer("inducing_points", &c.inducing_points);
    r.Finish();
  }
  if (const json* k = top.Object("kernel")) {
    Reader r(*k, "kernel", &errs);
    if (const json* o = r.Object("output1"))
      ReadKernel(*o, "kernel.output1", &c.kernel.output[0], &errs);
    if (const json* o = r.Object("output2"))
      ReadKernel(*o, "kernel.output2", &c.kernel.output[1], &errs);
    r.Number("cross_correlation", &c.kernel.cross_correlation);
    r.Finish();
  }
  if (const json* f = top.Object("fl")) {
    Reader r(*f, "fl", &errs);
    r.Number("mean_clients", &c.fl.mean_clients);
    r.Number("mean_requests", &c.fl.mean_requests);
    r.Integer("grid_points", &c.fl.grid_points);
    r.Bool("persistent_clients", &c.fl.persistent_clients);
    r.Integer("client_pool", &c.fl.client_pool);
    r.Finish();
  }
  if (const json* m = top.Object("movie")) {
    Reader r(*m, "movie", &errs);
    r.Number("mean_movies", &c.movie.mean_movies);
    r.Number("mean_users", &c.movie.mean_users);
    r.Number("threshold_low", &c.movie.threshold_low);
    r.Number("threshold_high", &c.movie.threshold_high);
    std::string path;
    if (r.String("ratings_path", &path)) c.ratings_path = path;
    if (r.String("movies_path", &path)) c.movies_path = path;
    r.Seed("catalog_seed", &c.catalog_seed);
    r.Integer("synthetic_movies", &c.synthetic.movies);
    r.Integer("synthetic_users", &c.synthetic.users);
    r.Number("synthetic_mean_extra_ratings", &c.synthetic.mean_extra_ratings);
    r.Finish();
  }
  if (const json* g = top.Object("gp_sampled")) {
    Reader r(*g, "gp_sampled", &errs);
    r.Integer("pool_size", &c.gp_env.pool_size);
    r.Integer("dimension", &c.gp_env.dimension);
    r.Number("mean_groups", &c.gp_env.mean_groups);
    r.Number("mean_arms_per_group", &c.gp_env.mean_arms_per_group);
    r.Integer("max_group_size", &c.gp_env.max_group_size);
    r.Number("threshold_percentile", &c.gp_env.threshold_percentile);
    r.Finish();
  }
  top.Finish();

  c.Validate(&errs);
  if (!errs.empty()) throw ValidationError(errs);
  return c;
}

gp::TwoOutputKernelSpec ParseKernelJson(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("kernel is not valid JSON: ") + e.what()});
  }
  if (!root.is_object()) throw ValidationError({"kernel must be a JSON object"});
  std::vector<std::string> errs;
  gp::TwoOutputKernelSpec k;
  Reader r(root, "kernel", &errs);
  if (const json* o = r.Object("output1"))
    ReadKernel(*o, "kernel.output1", &k.output[0], &errs);
  if (const json* o = r.Object("output2"))
    ReadKernel(*o, "kernel.output2", &k.output[1], &errs);
  r.Number("cross_correlation", &k.cross_correlation);
  r.Finish();
  k.Validate(&errs);
  if (!errs.empty()) throw ValidationError(errs);
  return k;
}

ExperimentConfig ParseConfig(const std::string& path) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const IoError& e) {
    throw ValidationError({e.what()});
  }
  return ParseConfigJson(text);
}

std::string ConfigToJson(const ExperimentConfig& c) {
  json j = {
      {"environment", ToString(c.environment)},
      {"algorithm", engine::ToString(c.algorithm)},
      {"zeta", c.zeta},
      {"delta", c.delta},
      {"sigma", c.sigma},
      {"K", c.K},
      {"T", c.T},
      {"n_trials", c.n_trials},
      {"master_seed", c.master_seed},
      {"max_arms", c.max_arms},
      {"output_dir", c.output_dir},
      {"trace", c.trace},
      {"posterior",
       {{"mode", c.posterior_mode == gp::PosteriorMode::kSparse ? "sparse"
                                                                : "exact"},
        {"inducing_points", c.inducing_points}}},
      {"kernel", TwoKernelJson(c.kernel)},
  };
  switch (c.environment) {
    case EnvironmentKind::kFl:
      j["fl"] = {{"mean_clients", c.fl.mean_clients},
                 {"mean_requests", c.fl.mean_requests},
                 {"grid_points", c.fl.grid_points},
                 {"persistent_clients", c.fl.persistent_clients},
                 {"client_pool", c.fl.client_pool}};
      break;
    case EnvironmentKind::kMovie: {
      json m = {{"mean_movies", c.movie.mean_movies},
                {"mean_users", c.movie.mean_users},
                {"threshold_low", c.movie.threshold_low},
                {"threshold_high", c.movie.threshold_high},
                {"catalog_seed", c.catalog_seed},
                {"synthetic_movies", c.synthetic.movies},
                {"synthetic_users", c.synthetic.users},
                {"synthetic_mean_extra_ratings", c.synthetic.mean_extra_ratings}};
      if (c.ratings_path) m["ratings_path"] = *c.ratings_path;
      if (c.movies_path) m["movies_path"] = *c.movies_path;
      j["movie"] = m;
      break;
    }
    case EnvironmentKind::kGpSampled:
      j["gp_sampled"] = {{"pool_size", c.gp_env.pool_size},
                          {"dimension", c.gp_env.dimension},
                          {"mean_groups", c.gp_env.mean_groups},
                          {"mean_arms_per_group", c.gp_env.mean_arms_per_group},
                          {"max_group_size", c.gp_env.max_group_size},
                          {"threshold_percentile", c.gp_env.threshold_percentile}};
      break;
  }
  return j.dump(2);
}

engine::LearnerConfig MakeLearner(const ExperimentConfig& c) {
  engine::LearnerConfig l;
  l.algorithm = c.algorithm;
  l.zeta = c.zeta;
  l.delta = c.delta;
  l.kernel = c.kernel;
  l.noise_sigma = c.sigma;
  l.mode = c.posterior_mode;
  l.inducing_points = c.inducing_points;
  return l;
}

engine::TrialOptions MakeTrialOptions(const ExperimentConfig& c) {
  engine::TrialOptions o;
  o.horizon = c.T;
  o.record_trace = c.trace;
  return o;
}

namespace {

std::shared_ptr<const env::MovieCatalog> LoadCatalog(const ExperimentConfig& c) {
  if (c.ratings_path && c.movies_path)
    return std::make_shared<const env::MovieCatalog>(
        env::IngestMovieLens(*c.ratings_path, *c.movies_path, c.catalog_seed));
  return std::make_shared<const env::MovieCatalog>(
      env::SyntheticCatalog(c.synthetic, c.catalog_seed));
}

}  // namespace

engine::EnvironmentFactory MakeEnvironmentFactory(const ExperimentConfig& c) {
  switch (c.environment) {
    case EnvironmentKind::kFl: {
      env::FlConfig fl = c.fl;
      fl.budget = c.K;
      fl.max_arms = c.max_arms;
      fl.noise_sigma = c.sigma;
      return [fl](std::uint64_t seed) {
        return std::make_unique<env::FlEnvironment>(fl, seed);
      };
    }
    case EnvironmentKind::kMovie: {
      env::MovieConfig mc = c.movie;
      mc.budget = c.K;
      mc.max_arms = c.max_arms;
      mc.noise_sigma = c.sigma;
      auto catalog = LoadCatalog(c);
      return [mc, catalog](std::uint64_t seed) {
        return std::make_unique<env::MovieEnvironment>(catalog, mc, seed);
      };
    }
    case EnvironmentKind::kGpSampled: {
      env::GpEnvConfig g = c.gp_env;
      g.budget = c.K;
      g.max_arms = c.max_arms;
      g.noise_sigma = c.sigma;
      g.horizon = c.T;
      return [g](std::uint64_t seed) {
        return std::make_unique<env::GpEnvironment>(g, seed);
      };
    }
  }
  throw InputError("unknown environment");
}

RunOutput RunConfig(const ExperimentConfig& config) {
  std::vector<std::string> errs;
  config.Validate(&errs);
  if (!errs.empty()) throw ValidationError(errs);
  RunOutput run;
  run.config = config;
  engine::EnvironmentFactory factory;
  if (config.environment == EnvironmentKind::kMovie) {
    auto catalog = LoadCatalog(config);
    run.catalog_stats = catalog->stats;
    env::MovieConfig mc = config.movie;
    mc.budget = config.K;
    mc.max_arms = config.max_arms;
    mc.noise_sigma = config.sigma;
    factory = [mc, catalog](std::uint64_t seed) {
      return std::make_unique<env::MovieEnvironment>(catalog, mc, seed);
    };
  } else {
    factory = MakeEnvironmentFactory(config);
  }
  run.result = engine::RunExperiment(MakeLearner(config), factory,
                                     MakeTrialOptions(config),
                                     config.master_seed, config.n_trials);
  if (run.result.failed == config.n_trials)
    throw Error(ErrorKind::kRuntime,
                "every trial failed; first error: " +
                    run.result.trials.front().error);
  return run;
}

const std::vector<std::string>& MetricColumns() {
  static const std::vector<std::string> cols = {
      "super_reward_expected", "opt_value",        "super_regret",
      "group_regret",          "total_regret",     "satisfied_fraction",
      "cum_super_regret",      "cum_group_regret", "cum_total_regret"};
  return cols;
}

namespace {

std::vector<double> RowValues(const metrics::RegretLedger& ledger,
                              std::size_t i) {
  const metrics::RoundRecord& r = ledger.records()[i];
  return {r.super_reward_expected, r.opt_value,
          r.super_regret,          r.group_regret,
          ledger.TotalStep(i),     r.satisfied_fraction,
          ledger.cum_super()[i],   ledger.cum_group()[i],
          ledger.cum_total()[i]};
}

}  // namespace

std::string PerRoundCsv(const RunOutput& run) {
  std::string out = "trial,t";
  for (const auto& c : MetricColumns()) out += "," + c;
  out += "\n";
  for (const engine::TrialResult& tr : run.result.trials) {
    if (!tr.ok) continue;
    for (std::size_t i = 0; i < tr.ledger.size(); ++i) {
      out += std::to_string(tr.trial) + "," +
             std::to_string(tr.ledger.records()[i].t);
      for (double v : RowValues(tr.ledger, i)) out += "," + FormatDouble(v);
      out += "\n";
    }
  }
  return out;
}

std::string AggregateCsv(const RunOutput& run) {
  std::string out = "t";
  for (const auto& c : MetricColumns()) out += "," + c + "_mean," + c + "_std";
  out += "\n";
  std::vector<const engine::TrialResult*> ok;
  for (const auto& tr : run.result.trials)
    if (tr.ok) ok.push_back(&tr);
  if (ok.empty()) return out;
  const std::size_t rounds = ok.front()->ledger.size();
  const std::size_t ncol = MetricColumns().size();
  for (std::size_t i = 0; i < rounds; ++i) {
    std::vector<std::vector<double>> cols(ncol);
    for (const auto* tr : ok) {
      const auto row = RowValues(tr->ledger, i);
      for (std::size_t c = 0; c < ncol; ++c) cols[c].push_back(row[c]);
    }
    out += std::to_string(ok.front()->ledger.records()[i].t);
    for (const auto& v : cols) {
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= v.size();
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
      out += "," + FormatDouble(mean) + "," + FormatDouble(sd);
    }
    out += "\n";
  }
  return out;
}

std::string RunMetaJson(const RunOutput& run) {
  json trials = json::array();
  long long fallback = 0, infeasible = 0, approximate = 0, bench_inf = 0,
            bench_approx = 0, empty = 0;
  for (const auto& tr : run.result.trials) {
    json t = {{"trial", tr.trial}, {"seed", tr.seed}, {"ok", tr.ok}};
    if (!tr.ok) t["error"] = tr.error;
    t["observations"] = tr.observations;
    t["satisfying_index_evaluations"] = tr.satisfying_index_evaluations;
    trials.push_back(t);
    for (const auto& r : tr.ledger.records()) {
      fallback += r.fallback;
      infeasible += r.infeasible;
      approximate += r.approximate;
      bench_inf += r.benchmark_infeasible;
      bench_approx += r.benchmark_approximate;
      empty += r.empty_scene;
    }
  }
  json meta = {
      {"config", json::parse(ConfigToJson(run.config))},
      {"master_seed", run.config.master_seed},
      {"trials", trials},
      {"failed_trials", run.result.failed},
      {"round_flags",
       {{"fallback", fallback},
        {"oracle_infeasible", infeasible},
        {"oracle_approximate", approximate},
        {"benchmark_infeasible", bench_inf},
        {"benchmark_approximate", bench_approx},
        {"empty_scene", empty}}},
      {"benchmark_solver",
       "exact cardinality dynamic program on true outcomes; heuristic for "
       "groups above the enumeration limit"},
  };
  if (run.config.environment == EnvironmentKind::kMovie) {
    const auto& s = run.catalog_stats;
    meta["catalog"] = {{"source", run.config.ratings_path ? "movielens" : "synthetic"},
                       {"rating_rows", s.rating_rows},
                       {"movie_rows", s.movie_rows},
                       {"malformed_rating_rows", s.malformed_rating_rows},
                       {"malformed_movie_rows", s.malformed_movie_rows},
                       {"unknown_movie_ratings", s.unknown_movie_ratings},
                       {"before_cutoff", s.before_cutoff},
                       {"users_seen", s.users_seen},
                       {"users_kept", s.users_kept}};
  }
  return meta.dump(2) + "\n";
}

std::string TraceJson(const RunOutput& run) {
  json trials = json::array();
  for (const auto& tr : run.result.trials) {
    if (!tr.ok) continue;
    const engine::RunTrace& t = tr.trace;
    json rounds = json::array();
    for (const auto& round : t.rounds) {
      json r = json::array();
      for (const Context& x : round)
        r.push_back(std::vector<double>(x.data(), x.data() + x.size()));
      rounds.push_back(r);
    }
    trials.push_back({{"trial", tr.trial},
                      {"seed", tr.seed},
                      {"kernel", TwoKernelJson(t.kernel)},
                      {"noise_sigma", t.noise_sigma},
                      {"zeta", t.zeta},
                      {"delta", t.delta},
                      {"max_arms", t.max_arms},
                      {"budget", t.budget},
                      {"B", t.B},
                      {"B_prime", t.B_prime},
                      {"total_regret", t.total_regret},
                      {"group_regret", t.group_regret},
                      {"super_regret", t.super_regret},
                      {"rounds", rounds}});
  }
  return json{{"trials", trials}}.dump() + "\n";
}

void WriteResults(const RunOutput& run, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  WriteFile(fs::path(dir) / "per_round.csv", PerRoundCsv(run));
  WriteFile(fs::path(dir) / "aggregate.csv", AggregateCsv(run));
  WriteFile(fs::path(dir) / "run_meta.json", RunMetaJson(run));
  if (run.config.trace) WriteFile(fs::path(dir) / "trace.json", TraceJson(run));
}

std::vector<engine::RunTrace> ParseTraceJson(const std::string& text) {
  std::vector<engine::RunTrace> out;
  try {
    const json root = json::parse(text);
    for (const json& t : root.at("trials")) {
      engine::RunTrace r;
      r.kernel = TwoKernelFromJson(t.at("kernel"));
      r.noise_sigma = t.at("noise_sigma").get<double>();
      r.zeta = t.at("zeta").get<double>();
      r.delta = t.at("delta").get<double>();
      r.max_arms = t.at("max_arms").get<int>();
      r.budget = t.at("budget").get<int>();
      r.B = t.at("B").get<double>();
      r.B_prime = t.at("B_prime").get<double>();
      r.total_regret = t.at("total_regret").get<double>();
      r.group_regret = t.at("group_regret").get<double>();
      r.super_regret = t.at("super_regret").get<double>();
      for (const json& round : t.at("rounds")) {
        std::vector<Context> xs;
        for (const json& x : round) {
          const auto v = x.get<std::vector<double>>();
          xs.push_back(Eigen::Map<const Eigen::VectorXd>(
              v.data(), static_cast<Eigen::Index>(v.size())));
        }
        r.rounds.push_back(std::move(xs));
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed trace: ") + e.what());
  } catch (const Error&) {
    throw;
  }
  return out;
}

std::vector<engine::RunTrace> ReadTraceFile(const std::string& path) {
  return ParseTraceJson(ReadFile(path));
}

std::string BoundReportJson(const std::vector<engine::BoundReport>& reports) {
  json arr = json::array();
  bool all = true;
  for (const auto& r : reports) {
    const bool ok = r.regret_within_bound && r.lower.holds;
    all = all && ok;
    arr.push_back({{"rounds", r.rounds},
                   {"beta_T", r.beta_T},
                   {"lambda_star", r.lambda_star},
                   {"gamma_bar", r.gamma_bar},
                   {"bound_total", r.bound.total},
                   {"bound_group", r.bound.group},
                   {"bound_super", r.bound.super},
                   {"total_regret", r.total_regret},
                   {"regret_within_bound", r.regret_within_bound},
                   {"info_gain_lower_holds", r.lower.holds},
                   {"info_gain_lower_slack", r.lower.slack}});
  }
  return json{{"all_hold", all}, {"trials", arr}}.dump(2) + "\n";
}

std::vector<double> LinearSpace(double lo, double hi, int n) {
  std::vector<double> v;
  if (n == 1) return {lo};
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

std::string SweepDirName(int index, double zeta) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "zeta_%02d_%.6g", index, zeta);
  return buf;
}

}  // namespace tcgp::runner
