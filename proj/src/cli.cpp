// Copyright 2026 The HCFSLN Authors.
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

#include "hcfsln/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "hcfsln/ablation.hpp"
#include "hcfsln/config.hpp"
#include "hcfsln/data.hpp"
#include "hcfsln/gradcheck_suite.hpp"
#include "hcfsln/model_io.hpp"
#include "hcfsln/report.hpp"
#include "hcfsln/train.hpp"

namespace hcfsln::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Plan {
  std::string verb;
  std::optional<std::string> config_path;
  std::string out_dir = "out";
  std::size_t threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> data_path;
  std::optional<std::string> model_path;
  std::vector<std::string> overrides;
  RunConfig config;
};

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

const std::string& require(const std::optional<std::string>& path, const char* flag,
                           const std::string& verb) {
  if (!path) throw UsageError(verb + " needs " + flag);
  if (!fs::exists(*path)) throw DataFormatError(std::string(flag) + " " + *path + " does not exist");
  return *path;
}

Plan parse_plan(const std::vector<std::string>& args) {
  Plan plan;
  plan.verb = args.front();
  CLI::App app{"hcfsln " + plan.verb};
  app.add_option("--config", plan.config_path, "config file (key = value lines)");
  app.add_option("--out", plan.out_dir, "output directory");
  app.add_option("--threads", plan.threads, "worker thread cap")->check(CLI::PositiveNumber);
  app.add_option("--seed", plan.seed, "master seed");
  app.add_option("--data", plan.data_path, "dataset file");
  app.add_option("--model", plan.model_path, "model blob");
  app.add_option("overrides", plan.overrides, "key=value overrides");
  std::vector<std::string> rest(args.begin() + 1, args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  ConfigSources sources;
  sources.file = plan.config_path;
  sources.overrides = plan.overrides;
  sources.seed_flag = plan.seed;
  if (const char* env = std::getenv("HCFSLN_SEED")) sources.seed_env = env;
  plan.config = resolve_config(sources);
  return plan;
}

std::string prepare_out(const Plan& plan) {
  fs::create_directories(plan.out_dir);
  write_text_file((fs::path(plan.out_dir) / "resolved.cfg").string(), format_config(plan.config));
  return plan.out_dir;
}

std::string out_file(const Plan& plan, const char* name) {
  return (fs::path(plan.out_dir) / name).string();
}

void write_timing(const Plan& plan, double seconds) {
  Metrics t;
  t.add("verb", plan.verb);
  t.add("seconds", seconds);
  write_text_file(out_file(plan, "timing.tsv"), t.str());
}

Dataset load_for(const Plan& plan) {
  return load_dataset(require(plan.data_path, "--data", plan.verb));
}

int gen_data(const Plan& plan, std::ostream& out) {
  prepare_out(plan);
  const auto synth = generate_synthetic(plan.config.data);
  const std::string path = out_file(plan, "dataset.m2adx");
  save_dataset(synth.dataset, path);
  out << "dataset\t" << path << "\n";
  out << "samples\t" << synth.dataset.samples.size() << "\n";
  return kOk;
}

int train(const Plan& plan, std::ostream& out) {
  const Dataset data = load_for(plan);
  prepare_out(plan);
  const auto& cfg = plan.config.train;
  std::optional<ModelBundle> first;
  const RunReport report = run_repeats(
      data, cfg, plan.threads, [&](std::size_t repeat, const TrainedModel& m, const Split&) {
        if (repeat != 0) return;
        first = ModelBundle{m, cfg.seed, cfg.test_fraction};
      });
  Metrics metrics;
  add_config(metrics, plan.config);
  for (auto& e : run_report_metrics(report).entries) metrics.entries.push_back(std::move(e));
  write_text_file(out_file(plan, "metrics.tsv"), metrics.str());
  write_timing(plan, report.seconds);
  if (report.failed) throw NumericError(report.failure);
  save_model(*first, out_file(plan, "model.bin"));
  out << "mean_accuracy\t" << format_double(report.mean) << "\n";
  out << "std_accuracy\t" << format_double(report.stddev) << "\n";
  out << "metrics\t" << out_file(plan, "metrics.tsv") << "\n";
  out << "model\t" << out_file(plan, "model.bin") << "\n";
  return kOk;
}

struct Loaded {
  ModelBundle bundle;
  Dataset data;
  Split split;
};

Loaded load_model_and_data(const Plan& plan) {
  Loaded l{load_model(require(plan.model_path, "--model", plan.verb)), load_for(plan), {}};
  check_layout(l.bundle.model.params, l.data.meta);
  l.split = split_stratified(l.data, l.bundle.test_fraction, l.bundle.split_seed);
  return l;
}

int eval(const Plan& plan, std::ostream& out) {
  const Loaded l = load_model_and_data(plan);
  prepare_out(plan);
  const auto& cfg = plan.config.train;
  const double accuracy =
      evaluate(l.bundle.model, l.split.test, cfg.episode, cfg.eval_episodes, l.bundle.split_seed);
  Metrics m;
  add_config(m, plan.config);
  m.add("report", std::string("eval"));
  m.add_count("split_seed", l.bundle.split_seed);
  m.add_count("test_samples", l.split.test.size());
  m.add_count("episodes", cfg.eval_episodes);
  m.add("accuracy", accuracy);
  write_text_file(out_file(plan, "eval.tsv"), m.str());
  out << "accuracy\t" << format_double(accuracy) << "\n";
  return kOk;
}

int ablate(const Plan& plan, std::ostream& out) {
  const Dataset data = load_for(plan);
  prepare_out(plan);
  AblationGrid grid;
  grid.axis = plan.config.ablate_axis;
  grid.values = plan.config.ablate_values;
  grid.base = plan.config.train;
  const auto start = std::chrono::steady_clock::now();
  const AblationReport report = run_ablation(data, grid, plan.threads);
  Metrics m;
  add_config(m, plan.config);
  for (auto& e : ablation_report_metrics(report).entries) m.entries.push_back(std::move(e));
  write_text_file(out_file(plan, "ablation.tsv"), m.str());
  write_timing(plan, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  for (const auto& row : report.rows) {
    out << "row\t" << row.value << "\t" << format_double(row.run.mean) << "\t"
        << format_double(row.run.stddev) << "\n";
  }
  for (const auto& t : report.tests) {
    out << "welch\t" << report.rows[t.a].value << "\t" << report.rows[t.b].value << "\t"
        << format_double(t.welch.t_statistic) << "\t" << format_double(t.welch.p_value) << "\n";
  }
  return kOk;
}

int export_embeddings(const Plan& plan, std::ostream& out) {
  const Loaded l = load_model_and_data(plan);
  const ModelParams& params = l.bundle.model.params;
  if (params.options.kind != ModelKind::kHyperbolic) {
    throw UsageError("export-embeddings needs a hyperbolic model");
  }
  prepare_out(plan);
  std::vector<std::size_t> test_ids;
  for (const auto& s : l.split.test) test_ids.push_back(s.id);
  std::sort(test_ids.begin(), test_ids.end());
  const auto standardized =
      standardize_apply(l.bundle.model.scaler, l.data.samples, l.data.meta);
  NoGradScope no_grad;
  ForwardContext ctx{false, nullptr};
  std::string csv;
  for (const auto& s : standardized) {
    const auto point = embed(s, params, ctx);
    csv += std::to_string(s.id) + "," + std::to_string(s.label) + "," +
           (std::binary_search(test_ids.begin(), test_ids.end(), s.id) ? "test" : "train");
    for (double v : point.coords().values()) csv += "," + format_double(v);
    csv += "\n";
  }
  const std::string path = out_file(plan, "embeddings.csv");
  write_text_file(path, csv);
  out << "embeddings\t" << path << "\n";
  out << "rows\t" << standardized.size() << "\n";
  return kOk;
}

int gradcheck(const Plan&, std::ostream& out) {
  const auto result = run_gradcheck_suite();
  for (const auto& c : result.cases) {
    out << (c.report.passed ? "ok  " : "FAIL") << "\t" << c.name << "\t"
        << format_double(c.report.max_rel_error) << "\t" << c.report.checked << "\n";
  }
  out << "max_rel_error\t" << format_double(result.max_rel_error) << "\n";
  out << "seconds\t" << format_double(result.seconds) << "\n";
  if (!result.passed) throw NumericError("gradcheck: relative error above tolerance");
  return kOk;
}

void fail_line(std::ostream& err, int code, const char* kind, const std::string& reason) {
  std::string r = reason;
  for (char& c : r)
    if (c == '\n' || c == '\t') c = ' ';
  err << "error\tcode=" << code << "\tkind=" << kind << "\t" << r << "\n";
}

}  // namespace

std::string suggest_verb(const std::string& verb) {
  std::string best;
  std::size_t best_d = 4;
  for (const auto& v : verbs()) {
    const std::size_t d = edit_distance(verb, v);
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

std::string usage() {
  return "usage: hcfsln <verb> [--config FILE] [--out DIR] [--threads N] [--seed S]\n"
         "              [--data FILE] [--model FILE] [key=value ...]\n"
         "verbs:\n"
         "  gen-data           write a synthetic dataset (data.* keys)\n"
         "  train              repeated split/train/evaluate; writes metrics.tsv, model.bin\n"
         "  eval               accuracy of --model on the held-out split of --data\n"
         "  ablate             run_repeats per ablate.values on ablate.axis; writes ablation.tsv\n"
         "  export-embeddings  id,label,split,coords... for every sample of --data\n"
         "  gradcheck          finite-difference check of every differentiable op\n"
         "HCFSLN_SEED sets the master seed when neither --seed nor train.seed is given.\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << usage();
    return kUsage;
  }
  const std::string& verb = args.front();
  if (verb == "-h" || verb == "--help" || verb == "help") {
    out << usage();
    return kOk;
  }
  if (std::find(verbs().begin(), verbs().end(), verb) == verbs().end()) {
    const std::string s = suggest_verb(verb);
    fail_line(err, kUsage, "usage",
              "unknown verb '" + verb + "'" + (s.empty() ? "" : "; did you mean '" + s + "'?"));
    return kUsage;
  }
  try {
    const Plan plan = parse_plan(args);
    if (verb == "gen-data") return gen_data(plan, out);
    if (verb == "train") return train(plan, out);
    if (verb == "eval") return eval(plan, out);
    if (verb == "ablate") return ablate(plan, out);
    if (verb == "export-embeddings") return export_embeddings(plan, out);
    return gradcheck(plan, out);
  } catch (const UsageError& e) {
    fail_line(err, kUsage, "usage", e.what());
    return kUsage;
  } catch (const ConfigError& e) {
    fail_line(err, kUsage, "config", e.what());
    return kUsage;
  } catch (const NumericError& e) {
    fail_line(err, kNumericError, "numeric", e.what());
    return kNumericError;
  } catch (const DataFormatError& e) {
    fail_line(err, kDataError, "format", e.what());
    return kDataError;
  } catch (const InsufficientSamplesError& e) {
    fail_line(err, kDataError, "data", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    fail_line(err, kDataError, "io", e.what());
    return kDataError;
  }
}

}  // namespace hcfsln::cli
