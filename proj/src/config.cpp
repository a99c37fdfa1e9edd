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

#include "hcfsln/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace hcfsln {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += xs[i];
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define HCFSLN_DOUBLE(KEY, EXPR)                                         \
  Field {                                                                \
    KEY, [](const RunConfig& c) { return format_double(c.EXPR); },       \
        [](RunConfig& c, const std::string& v) {                         \
          c.EXPR = parse_double_value(v, KEY);                           \
        }                                                                \
  }
#define HCFSLN_SIZE(KEY, EXPR)                                           \
  Field {                                                                \
    KEY, [](const RunConfig& c) { return std::to_string(c.EXPR); },      \
        [](RunConfig& c, const std::string& v) {                         \
          c.EXPR = static_cast<decltype(c.EXPR)>(parse_uint_value(v, KEY)); \
        }                                                                \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      HCFSLN_SIZE("model.embed_dim", train.model.embed_dim),
      HCFSLN_SIZE("model.heads", train.model.heads),
      HCFSLN_DOUBLE("model.dropout", train.model.dropout),
      {"model.pooling", [](const RunConfig& c) { return to_string(c.train.model.pooling); },
       [](RunConfig& c, const std::string& v) { c.train.model.pooling = parse_pooling(v); }},
      {"model.kind", [](const RunConfig& c) { return to_string(c.train.model.kind); },
       [](RunConfig& c, const std::string& v) { c.train.model.kind = parse_model_kind(v); }},
      HCFSLN_DOUBLE("model.alpha_init", train.model.alpha_init),
      {"model.alpha_trainable",
       [](const RunConfig& c) { return std::string(c.train.model.alpha_trainable ? "true" : "false"); },
       [](RunConfig& c, const std::string& v) {
         c.train.model.alpha_trainable = parse_bool_value(v, "model.alpha_trainable");
       }},
      HCFSLN_DOUBLE("loss.gamma", train.loss.gamma),
      HCFSLN_DOUBLE("loss.lambda", train.loss.lambda),
      {"loss.mode", [](const RunConfig& c) { return to_string(c.train.loss.mode); },
       [](RunConfig& c, const std::string& v) { c.train.loss.mode = parse_loss_mode(v); }},
      {"loss.angular_form",
       [](const RunConfig& c) { return to_string(c.train.loss.angular_form); },
       [](RunConfig& c, const std::string& v) {
         c.train.loss.angular_form = parse_angular_form(v);
       }},
      HCFSLN_DOUBLE("train.learning_rate", train.adam.learning_rate),
      HCFSLN_DOUBLE("train.beta1", train.adam.beta1),
      HCFSLN_DOUBLE("train.beta2", train.adam.beta2),
      HCFSLN_DOUBLE("train.epsilon", train.adam.epsilon),
      HCFSLN_SIZE("train.epochs", train.epochs),
      HCFSLN_SIZE("train.episodes_per_epoch", train.episodes_per_epoch),
      HCFSLN_SIZE("train.k", train.episode.k),
      HCFSLN_SIZE("train.b", train.episode.b),
      HCFSLN_SIZE("train.seed", train.seed),
      HCFSLN_SIZE("train.repeats", train.repeats),
      HCFSLN_DOUBLE("train.test_fraction", train.test_fraction),
      HCFSLN_SIZE("train.eval_episodes", train.eval_episodes),
      HCFSLN_DOUBLE("train.clip_norm", train.clip_norm),
      HCFSLN_SIZE("data.n_per_class", data.n_per_class),
      {"data.modalities",
       [](const RunConfig& c) { return format_modality_dims(c.data.modalities); },
       [](RunConfig& c, const std::string& v) {
         try {
           c.data.modalities = parse_modality_dims(v);
         } catch (const std::exception& e) {
           throw ConfigError("data.modalities: " + std::string(e.what()));
         }
       }},
      HCFSLN_SIZE("data.seq_len", data.seq_len),
      HCFSLN_DOUBLE("data.separation", data.separation),
      HCFSLN_DOUBLE("data.noise_sigma", data.noise_sigma),
      HCFSLN_SIZE("data.hierarchy_depth", data.hierarchy_depth),
      HCFSLN_SIZE("data.branching", data.branching),
      HCFSLN_SIZE("data.latent_dim", data.latent_dim),
      HCFSLN_DOUBLE("data.cluster_spread", data.cluster_spread),
      HCFSLN_DOUBLE("data.drift_amplitude", data.drift_amplitude),
      HCFSLN_SIZE("data.seed", data.seed),
      {"ablate.axis", [](const RunConfig& c) { return to_string(c.ablate_axis); },
       [](RunConfig& c, const std::string& v) {
         const AblationAxis axis = parse_ablation_axis(v);
         if (axis != c.ablate_axis) c.ablate_values = default_ablation_values(axis);
         c.ablate_axis = axis;
       }},
      {"ablate.values", [](const RunConfig& c) { return join(c.ablate_values); },
       [](RunConfig& c, const std::string& v) {
         auto values = split_list(v);
         if (values.empty()) throw ConfigError("ablate.values: empty list");
         c.ablate_values = std::move(values);
       }},
  };
  return table;
}

#undef HCFSLN_DOUBLE
#undef HCFSLN_SIZE

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

}  // namespace

double parse_double_value(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() ||
      !std::isfinite(value)) {
    throw ConfigError(key + ": cannot parse '" + text + "' as a number");
  }
  return value;
}

std::uint64_t parse_uint_value(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": cannot parse '" + text + "' as a non-negative integer");
  }
  return value;
}

bool parse_bool_value(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return keys;
}

std::string nearest_key(const std::string& key) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& k : config_keys()) {
    const std::size_t d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

void apply_setting(RunConfig& config, const std::string& key,
                   const std::string& value) {
  const Field* f = find_field(key);
  if (!f) {
    throw ConfigError("unknown key '" + key + "' (nearest: " + nearest_key(key) + ")");
  }
  try {
    f->set(config, trim(value));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

std::vector<std::pair<std::string, std::string>> parse_config_text(
    const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    out.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return out;
}

std::pair<std::string, std::string> parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + text + "' is not key=value");
  }
  return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

RunConfig resolve_config(const ConfigSources& sources) {
  RunConfig config;
  bool seed_explicit = false;
  auto apply = [&](const std::string& k, const std::string& v) {
    apply_setting(config, k, v);
    if (k == "train.seed") seed_explicit = true;
  };
  if (sources.file) {
    std::ifstream in(*sources.file);
    if (!in) throw ConfigError("cannot read config file " + *sources.file);
    std::stringstream ss;
    ss << in.rdbuf();
    for (const auto& [k, v] : parse_config_text(ss.str())) apply(k, v);
  }
  for (const auto& o : sources.overrides) {
    const auto [k, v] = parse_override(o);
    apply(k, v);
  }
  if (sources.seed_flag) {
    config.train.seed = *sources.seed_flag;
  } else if (!seed_explicit && sources.seed_env && !sources.seed_env->empty()) {
    config.train.seed = parse_uint_value(*sources.seed_env, "HCFSLN_SEED");
  }
  try {
    validate(config.train);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return config;
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

}  // namespace hcfsln
