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

#ifndef HCFSLN_REPORT_HPP_
#define HCFSLN_REPORT_HPP_

#include <string>
#include <utility>
#include <vector>

#include "hcfsln/ablation.hpp"
#include "hcfsln/config.hpp"
#include "hcfsln/train.hpp"

namespace hcfsln {

class ReportFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Line-oriented metrics text: "schema=1", then key<TAB>value lines.
struct Metrics {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add_count(const std::string& key, std::uint64_t value);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_count(const std::string& key) const;

  std::string str() const;
  static Metrics parse(const std::string& text);
};

// Resolved config keys prefixed with "config.".
void add_config(Metrics& m, const RunConfig& config);

Metrics run_report_metrics(const RunReport& report);
RunReport parse_run_report(const Metrics& m);

Metrics ablation_report_metrics(const AblationReport& report);
AblationReport parse_ablation_report(const Metrics& m);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace hcfsln

#endif  // HCFSLN_REPORT_HPP_
