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

#include "hcfsln/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hcfsln {

namespace {

constexpr char kSchemaLine[] = "schema=1";

std::string join_doubles(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += format_double(xs[i]);
  }
  return out;
}

double to_double(const std::string& text, const std::string& key) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ReportFormatError("report key " + key + ": bad number '" + text + "'");
  }
  return value;
}

std::vector<double> split_doubles(const std::string& text, const std::string& key) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    out.push_back(to_double(text.substr(start, comma - start), key));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string idx(const std::string& prefix, std::size_t i, const std::string& field = "") {
  return prefix + "." + std::to_string(i) + (field.empty() ? "" : "." + field);
}

}  // namespace

void Metrics::add(const std::string& key, const std::string& value) {
  if (key.find_first_of("\t\n") != std::string::npos ||
      value.find_first_of("\t\n") != std::string::npos) {
    throw ReportFormatError("metrics key/value may not contain tabs or newlines: " + key);
  }
  entries.emplace_back(key, value);
}

void Metrics::add(const std::string& key, double value) { add(key, format_double(value)); }

void Metrics::add_count(const std::string& key, std::uint64_t value) {
  add(key, std::to_string(value));
}

bool Metrics::has(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return true;
  return false;
}

const std::string& Metrics::get(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  throw ReportFormatError("report is missing key " + key);
}

double Metrics::get_double(const std::string& key) const { return to_double(get(key), key); }

std::uint64_t Metrics::get_count(const std::string& key) const {
  const std::string& text = get(key);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ReportFormatError("report key " + key + ": bad count '" + text + "'");
  }
  return value;
}

std::string Metrics::str() const {
  std::string out = std::string(kSchemaLine) + "\n";
  for (const auto& [k, v] : entries) out += k + "\t" + v + "\n";
  return out;
}

Metrics Metrics::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSchemaLine) {
    throw ReportFormatError("metrics report must start with " + std::string(kSchemaLine));
  }
  Metrics m;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ReportFormatError("metrics line without tab: " + line);
    m.entries.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return m;
}

void add_config(Metrics& m, const RunConfig& config) {
  for (const auto& [k, v] : parse_config_text(format_config(config))) m.add("config." + k, v);
}

Metrics run_report_metrics(const RunReport& r) {
  Metrics m;
  m.add("report", std::string("run"));
  m.add_count("repeats", r.accuracies.size());
  m.add("mean_accuracy", r.mean);
  m.add("std_accuracy", r.stddev);
  m.add("single_run", std::string(r.single_run ? "true" : "false"));
  m.add("failed", std::string(r.failed ? "true" : "false"));
  std::string failure = r.failure;
  for (char& c : failure)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  m.add("failure", failure);
  for (std::size_t i = 0; i < r.accuracies.size(); ++i) {
    m.add_count(idx("repeat", i, "seed"), r.seeds[i]);
    m.add(idx("repeat", i, "accuracy"), r.accuracies[i]);
    m.add(idx("repeat", i, "loss_curve"), join_doubles(r.loss_curves[i]));
    m.add_count(idx("repeat", i, "clip_events"), r.clip_events[i]);
    m.add_count(idx("repeat", i, "acosh_clamps"), r.acosh_clamps[i]);
    m.add_count(idx("repeat", i, "embeddings_checked"), r.embeddings_checked[i]);
    m.add(idx("repeat", i, "max_embedding_norm"), r.max_embedding_norm[i]);
  }
  return m;
}

RunReport parse_run_report(const Metrics& m) {
  if (m.get("report") != "run") throw ReportFormatError("not a run report");
  RunReport r;
  const std::size_t n = m.get_count("repeats");
  r.mean = m.get_double("mean_accuracy");
  r.stddev = m.get_double("std_accuracy");
  r.single_run = m.get("single_run") == "true";
  r.failed = m.get("failed") == "true";
  r.failure = m.get("failure");
  for (std::size_t i = 0; i < n; ++i) {
    r.seeds.push_back(m.get_count(idx("repeat", i, "seed")));
    r.accuracies.push_back(m.get_double(idx("repeat", i, "accuracy")));
    r.loss_curves.push_back(split_doubles(m.get(idx("repeat", i, "loss_curve")),
                                          idx("repeat", i, "loss_curve")));
    r.clip_events.push_back(m.get_count(idx("repeat", i, "clip_events")));
    r.acosh_clamps.push_back(m.get_count(idx("repeat", i, "acosh_clamps")));
    r.embeddings_checked.push_back(m.get_count(idx("repeat", i, "embeddings_checked")));
    r.max_embedding_norm.push_back(m.get_double(idx("repeat", i, "max_embedding_norm")));
  }
  return r;
}

Metrics ablation_report_metrics(const AblationReport& r) {
  Metrics m;
  m.add("report", std::string("ablation"));
  m.add("axis", to_string(r.axis));
  m.add("curvature", std::string(r.curvature_fixed ? "fixed" : "trainable"));
  m.add("multiple_comparison_correction", std::string(r.corrected ? "applied" : "none"));
  m.add_count("rows", r.rows.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const std::string p = idx("row", i);
    m.add(p + ".value", r.rows[i].value);
    for (const auto& [k, v] : run_report_metrics(r.rows[i].run).entries) {
      if (k != "report") m.add(p + "." + k, v);
    }
  }
  m.add_count("tests", r.tests.size());
  for (std::size_t i = 0; i < r.tests.size(); ++i) {
    const auto& t = r.tests[i];
    m.add_count(idx("test", i, "a"), t.a);
    m.add_count(idx("test", i, "b"), t.b);
    m.add(idx("test", i, "t"), t.welch.t_statistic);
    m.add(idx("test", i, "dof"), t.welch.degrees_of_freedom);
    m.add(idx("test", i, "p"), t.welch.p_value);
    m.add(idx("test", i, "mean_a"), t.welch.mean_a);
    m.add(idx("test", i, "mean_b"), t.welch.mean_b);
    m.add_count(idx("test", i, "n_a"), t.welch.n_a);
    m.add_count(idx("test", i, "n_b"), t.welch.n_b);
    m.add(idx("test", i, "degenerate"), std::string(t.welch.degenerate ? "true" : "false"));
  }
  return m;
}

AblationReport parse_ablation_report(const Metrics& m) {
  if (m.get("report") != "ablation") throw ReportFormatError("not an ablation report");
  AblationReport r;
  r.axis = parse_ablation_axis(m.get("axis"));
  r.curvature_fixed = m.get("curvature") == "fixed";
  r.corrected = m.get("multiple_comparison_correction") == "applied";
  const std::size_t rows = m.get_count("rows");
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string p = idx("row", i) + ".";
    Metrics sub;
    sub.add("report", std::string("run"));
    for (const auto& [k, v] : m.entries)
      if (k.rfind(p, 0) == 0 && k != p + "value") sub.entries.emplace_back(k.substr(p.size()), v);
    r.rows.push_back({m.get(p + "value"), parse_run_report(sub)});
  }
  const std::size_t tests = m.get_count("tests");
  for (std::size_t i = 0; i < tests; ++i) {
    AblationTest t;
    t.a = m.get_count(idx("test", i, "a"));
    t.b = m.get_count(idx("test", i, "b"));
    t.welch.t_statistic = m.get_double(idx("test", i, "t"));
    t.welch.degrees_of_freedom = m.get_double(idx("test", i, "dof"));
    t.welch.p_value = m.get_double(idx("test", i, "p"));
    t.welch.mean_a = m.get_double(idx("test", i, "mean_a"));
    t.welch.mean_b = m.get_double(idx("test", i, "mean_b"));
    t.welch.n_a = m.get_count(idx("test", i, "n_a"));
    t.welch.n_b = m.get_count(idx("test", i, "n_b"));
    t.welch.degenerate = m.get(idx("test", i, "degenerate")) == "true";
    r.tests.push_back(t);
  }
  return r;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hcfsln
