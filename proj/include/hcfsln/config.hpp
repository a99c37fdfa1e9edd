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

#ifndef HCFSLN_CONFIG_HPP_
#define HCFSLN_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hcfsln/ablation.hpp"
#include "hcfsln/data.hpp"
#include "hcfsln/train.hpp"

namespace hcfsln {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  TrainConfig train;
  SynthSpec data;
  AblationAxis ablate_axis = AblationAxis::kCurvature;
  std::vector<std::string> ablate_values = default_ablation_values(AblationAxis::kCurvature);
};

// Strict number parsing; `key` only names the field in the error.
double parse_double_value(const std::string& text, const std::string& key);
std::uint64_t parse_uint_value(const std::string& text, const std::string& key);
bool parse_bool_value(const std::string& text, const std::string& key);

// Shortest text that reads back to the same double.
std::string format_double(double value);

// Every recognised key, in the order format_config writes them.
const std::vector<std::string>& config_keys();

// Closest key by edit distance.
std::string nearest_key(const std::string& key);

// Sets one dotted key. Unknown keys and unparseable values throw
// ConfigError.
void apply_setting(RunConfig& config, const std::string& key,
                   const std::string& value);

// `key = value` lines; `#` starts a comment, blank lines are skipped.
std::vector<std::pair<std::string, std::string>> parse_config_text(
    const std::string& text);

// "key=value"
std::pair<std::string, std::string> parse_override(const std::string& text);

struct ConfigSources {
  std::optional<std::string> file;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed_flag;
  std::optional<std::string> seed_env;
};

// Defaults, then the file, then overrides. The master seed comes from the
// flag, else an explicit train.seed, else the environment value.
RunConfig resolve_config(const ConfigSources& sources);

// Every key with its resolved value; parses back to the same config.
std::string format_config(const RunConfig& config);

}  // namespace hcfsln

#endif  // HCFSLN_CONFIG_HPP_
