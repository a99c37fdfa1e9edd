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

#include "hcfsln/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace hcfsln {

std::size_t DatasetMeta::total_dim() const {
  std::size_t d = 0;
  for (const auto& m : modalities) d += m.dim;
  return d;
}

std::size_t Dataset::class_count(int label) const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.label == label ? 1 : 0;
  return n;
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

std::size_t parse_size(const std::string& text, const std::string& what) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw DataFormatError("bad integer for " + what + ": '" + text + "'");
  }
  return v;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

std::vector<ModalitySpec> parse_modality_dims(const std::string& text) {
  std::vector<ModalitySpec> mods;
  for (const auto& item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos || colon == 0) {
      throw DataFormatError("modality entry '" + item + "' is not name:dim");
    }
    ModalitySpec m{item.substr(0, colon),
                   parse_size(item.substr(colon + 1), "modality " + item)};
    if (m.dim == 0) throw DataFormatError("modality '" + m.name + "' has dim 0");
    mods.push_back(std::move(m));
  }
  if (mods.empty()) throw DataFormatError("no modalities declared");
  return mods;
}

std::string format_modality_dims(const std::vector<ModalitySpec>& mods) {
  std::string out;
  for (std::size_t i = 0; i < mods.size(); ++i) {
    if (i) out += ',';
    out += mods[i].name + ':' + std::to_string(mods[i].dim);
  }
  return out;
}

SyntheticDataset generate_synthetic(const SynthSpec& spec) {
  if (spec.separation < 0.0) throw std::invalid_argument("separation must be >= 0");
  if (!(spec.noise_sigma > 0.0)) throw std::invalid_argument("noise_sigma must be > 0");
  if (spec.hierarchy_depth < 1) throw std::invalid_argument("hierarchy_depth must be >= 1");
  if (spec.branching < 1 || spec.latent_dim < 1 || spec.seq_len < 1 ||
      spec.modalities.empty()) {
    throw std::invalid_argument("synthetic spec has an empty dimension");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t r = spec.latent_dim;

  // Class anchors at +-separation/2 along a random unit direction.
  std::vector<double> dir(r);
  double dn = 0.0;
  for (auto& v : dir) {
    v = normal(rng);
    dn += v * v;
  }
  dn = std::sqrt(dn);
  for (auto& v : dir) v /= dn;

  // Shared offset tree; level l has branching^l nodes.
  std::vector<std::vector<double>> level{std::vector<double>(r, 0.0)};
  double spread = spec.cluster_spread;
  for (std::size_t l = 0; l < spec.hierarchy_depth; ++l) {
    std::vector<std::vector<double>> next;
    for (const auto& parent : level) {
      for (std::size_t b = 0; b < spec.branching; ++b) {
        auto child = parent;
        for (auto& v : child) v += spread * normal(rng);
        next.push_back(std::move(child));
      }
    }
    level = std::move(next);
    spread *= 0.5;
  }
  const auto& leaves = level;

  // Per-modality latent -> feature projections.
  std::vector<std::vector<double>> proj;
  for (const auto& m : spec.modalities) {
    std::vector<double> p(r * m.dim);
    for (auto& v : p) v = normal(rng) / std::sqrt(static_cast<double>(r));
    proj.push_back(std::move(p));
  }

  SyntheticDataset out;
  out.dataset.meta = {spec.modalities, spec.seq_len};
  std::uniform_int_distribution<std::size_t> pick_leaf(0, leaves.size() - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const auto len = static_cast<double>(spec.seq_len);
  std::size_t id = 0;
  for (int label = 0; label < 2; ++label) {
    const double sign = label == 0 ? -0.5 : 0.5;
    for (std::size_t i = 0; i < spec.n_per_class; ++i) {
      const std::size_t leaf = pick_leaf(rng);
      std::vector<double> z(r);
      for (std::size_t j = 0; j < r; ++j)
        z[j] = sign * spec.separation * dir[j] + leaves[leaf][j];
      Sample s;
      s.id = id++;
      s.label = label;
      for (std::size_t m = 0; m < spec.modalities.size(); ++m) {
        const std::size_t dm = spec.modalities[m].dim;
        std::vector<double> base(dm, 0.0);
        for (std::size_t c = 0; c < dm; ++c)
          for (std::size_t j = 0; j < r; ++j) base[c] += z[j] * proj[m][j * dm + c];
        std::vector<double> amp(dm), freq(dm), phase(dm);
        for (std::size_t c = 0; c < dm; ++c) {
          amp[c] = spec.drift_amplitude * normal(rng);
          freq[c] = (0.5 + 1.5 * unif(rng)) * two_pi / len;
          phase[c] = two_pi * unif(rng);
        }
        std::vector<double> seq(spec.seq_len * dm);
        for (std::size_t t = 0; t < spec.seq_len; ++t) {
          for (std::size_t c = 0; c < dm; ++c) {
            const double drift =
                amp[c] * std::sin(freq[c] * static_cast<double>(t) + phase[c]);
            seq[t * dm + c] = base[c] + drift + spec.noise_sigma * normal(rng);
          }
        }
        s.modalities.push_back(std::move(seq));
      }
      out.dataset.samples.push_back(std::move(s));
      out.leaf.push_back(leaf);
    }
  }
  return out;
}

std::string serialize_dataset(const Dataset& data) {
  const auto& meta = data.meta;
  std::string out = "M2ADX1 N=" + std::to_string(data.samples.size()) +
                    " L=" + std::to_string(meta.seq_len) +
                    " D=" + std::to_string(meta.total_dim()) + " labels=";
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    if (i) out += ',';
    out += data.samples[i].label == 1 ? '1' : '0';
  }
  out += " dims=" + format_modality_dims(meta.modalities) + '\n';
  for (const auto& s : data.samples) {
    for (std::size_t t = 0; t < meta.seq_len; ++t) {
      bool first = true;
      for (std::size_t m = 0; m < meta.modalities.size(); ++m) {
        const std::size_t dm = meta.modalities[m].dim;
        for (std::size_t c = 0; c < dm; ++c) {
          if (!first) out += ' ';
          first = false;
          append_double(out, s.modalities[m][t * dm + c]);
        }
      }
      out += '\n';
    }
  }
  return out;
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataFormatError("cannot open '" + path + "' for writing");
  const auto text = serialize_dataset(data);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw DataFormatError("write failed for '" + path + "'");
}

Dataset parse_dataset(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw DataFormatError("empty dataset file");
  std::istringstream hs(header);
  std::string magic;
  hs >> magic;
  if (magic != "M2ADX1") {
    throw DataFormatError("unknown dataset format '" + magic + "' (want M2ADX1)");
  }
  std::size_t n = 0, l = 0, d = 0;
  std::string labels_text, dims_text;
  bool have_n = false, have_l = false, have_d = false, have_labels = false,
       have_dims = false;
  std::string field;
  while (hs >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw DataFormatError("bad header field '" + field + "'");
    const auto key = field.substr(0, eq);
    const auto val = field.substr(eq + 1);
    if (key == "N") {
      n = parse_size(val, "N");
      have_n = true;
    } else if (key == "L") {
      l = parse_size(val, "L");
      have_l = true;
    } else if (key == "D") {
      d = parse_size(val, "D");
      have_d = true;
    } else if (key == "labels") {
      labels_text = val;
      have_labels = true;
    } else if (key == "dims") {
      dims_text = val;
      have_dims = true;
    } else {
      throw DataFormatError("unknown header field '" + key + "'");
    }
  }
  if (!(have_n && have_l && have_d && have_labels && have_dims)) {
    throw DataFormatError("header must carry N, L, D, labels and dims");
  }
  Dataset data;
  data.meta.modalities = parse_modality_dims(dims_text);
  data.meta.seq_len = l;
  if (data.meta.total_dim() != d) {
    throw DataFormatError("header D=" + std::to_string(d) +
                          " but dims sum to " +
                          std::to_string(data.meta.total_dim()));
  }
  std::vector<int> labels;
  if (n > 0) {
    for (const auto& tok : split(labels_text, ',')) {
      if (tok != "0" && tok != "1") throw DataFormatError("label '" + tok + "' is not 0/1");
      labels.push_back(tok == "1" ? 1 : 0);
    }
  }
  if (labels.size() != n) {
    throw DataFormatError("header N=" + std::to_string(n) + " but " +
                          std::to_string(labels.size()) + " labels");
  }

  std::vector<double> row(d);
  std::string line;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.id = i;
    s.label = labels[i];
    for (const auto& m : data.meta.modalities) s.modalities.emplace_back(l * m.dim);
    for (std::size_t t = 0; t < l; ++t) {
      const std::size_t line_no = 2 + i * l + t;
      if (!std::getline(in, line)) {
        throw DataFormatError("truncated file: expected " + std::to_string(n * l) +
                              " rows, missing row at line " + std::to_string(line_no));
      }
      const char* p = line.data();
      const char* end = p + line.size();
      for (std::size_t c = 0; c < d; ++c) {
        while (p < end && *p == ' ') ++p;
        auto [next, ec] = std::from_chars(p, end, row[c]);
        if (ec != std::errc()) {
          throw DataFormatError("line " + std::to_string(line_no) + " col " +
                                std::to_string(c) + ": unparseable value");
        }
        if (!std::isfinite(row[c])) {
          throw DataFormatError("line " + std::to_string(line_no) + " col " +
                                std::to_string(c) + ": non-finite value");
        }
        p = next;
      }
      while (p < end && (*p == ' ' || *p == '\r')) ++p;
      if (p != end) {
        throw DataFormatError("line " + std::to_string(line_no) +
                              ": more than D=" + std::to_string(d) + " values");
      }
      std::size_t col = 0;
      for (std::size_t m = 0; m < data.meta.modalities.size(); ++m) {
        const std::size_t dm = data.meta.modalities[m].dim;
        std::copy_n(row.begin() + col, dm, s.modalities[m].begin() + t * dm);
        col += dm;
      }
    }
    data.samples.push_back(std::move(s));
  }
  while (std::getline(in, line)) {
    if (!line.empty()) throw DataFormatError("trailing data after N*L rows");
  }
  return data;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataFormatError("cannot open dataset '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_dataset(ss.str());
}

Dataset load_dataset(const std::string& path, const DatasetMeta& expected) {
  Dataset data = load_dataset(path);
  if (data.meta.total_dim() != expected.total_dim()) {
    throw DataFormatError("file D=" + std::to_string(data.meta.total_dim()) +
                          " but expected layout has D=" +
                          std::to_string(expected.total_dim()));
  }
  if (data.meta != expected) {
    throw DataFormatError("file layout L=" + std::to_string(data.meta.seq_len) +
                          " dims=" + format_modality_dims(data.meta.modalities) +
                          " differs from expected L=" +
                          std::to_string(expected.seq_len) + " dims=" +
                          format_modality_dims(expected.modalities));
  }
  return data;
}

std::vector<double> pad_trim(std::span<const double> seq, std::size_t rows,
                             std::size_t cols, std::size_t target) {
  if (seq.size() != rows * cols) {
    throw std::invalid_argument("pad_trim: sequence size does not match rows*cols");
  }
  std::vector<double> out(target * cols, 0.0);
  const std::size_t keep = std::min(rows, target);
  std::copy_n(seq.begin(), keep * cols, out.begin());
  return out;
}

Scaler fit_scaler(std::span<const Sample> pool, const DatasetMeta& meta) {
  if (pool.empty()) throw std::invalid_argument("fit_scaler: empty pool");
  const std::size_t d = meta.total_dim();
  Scaler sc;
  sc.mean.assign(d, 0.0);
  sc.stddev.assign(d, 0.0);
  const double count = static_cast<double>(pool.size() * meta.seq_len);
  std::size_t col = 0;
  for (std::size_t m = 0; m < meta.modalities.size(); ++m) {
    const std::size_t dm = meta.modalities[m].dim;
    for (std::size_t c = 0; c < dm; ++c) {
      double s = 0.0;
      for (const auto& smp : pool)
        for (std::size_t t = 0; t < meta.seq_len; ++t) s += smp.modalities[m][t * dm + c];
      const double mu = s / count;
      double ss = 0.0;
      for (const auto& smp : pool) {
        for (std::size_t t = 0; t < meta.seq_len; ++t) {
          const double e = smp.modalities[m][t * dm + c] - mu;
          ss += e * e;
        }
      }
      sc.mean[col + c] = mu;
      sc.stddev[col + c] = std::sqrt(ss / count);
    }
    col += dm;
  }
  return sc;
}

std::vector<Sample> standardize_apply(const Scaler& scaler,
                                      std::span<const Sample> pool,
                                      const DatasetMeta& meta) {
  if (scaler.mean.size() != meta.total_dim()) {
    throw DataFormatError("scaler width " + std::to_string(scaler.mean.size()) +
                          " does not match D=" + std::to_string(meta.total_dim()));
  }
  std::vector<Sample> out(pool.begin(), pool.end());
  for (auto& smp : out) {
    std::size_t col = 0;
    for (std::size_t m = 0; m < meta.modalities.size(); ++m) {
      const std::size_t dm = meta.modalities[m].dim;
      for (std::size_t t = 0; t < meta.seq_len; ++t) {
        for (std::size_t c = 0; c < dm; ++c) {
          double& v = smp.modalities[m][t * dm + c];
          v = (v - scaler.mean[col + c]) / (scaler.stddev[col + c] + Scaler::kEpsilon);
        }
      }
      col += dm;
    }
  }
  return out;
}

StandardizedPool standardize_fit_transform(std::span<const Sample> pool,
                                           const DatasetMeta& meta) {
  StandardizedPool out;
  out.scaler = fit_scaler(pool, meta);
  out.samples = standardize_apply(out.scaler, pool, meta);
  return out;
}

}  // namespace hcfsln
