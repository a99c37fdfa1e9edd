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

#ifndef HCFSLN_DATA_HPP_
#define HCFSLN_DATA_HPP_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcfsln {

class DataFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModalitySpec {
  std::string name;
  std::size_t dim = 1;

  bool operator==(const ModalitySpec&) const = default;
};

struct DatasetMeta {
  std::vector<ModalitySpec> modalities;
  std::size_t seq_len = 120;

  std::size_t total_dim() const;
  bool operator==(const DatasetMeta&) const = default;
};

// Parses "audio:4,video:3" style modality lists.
std::vector<ModalitySpec> parse_modality_dims(const std::string& text);
std::string format_modality_dims(const std::vector<ModalitySpec>& mods);

// One participant: per-modality [seq_len, dim] row-major sequences.
struct Sample {
  std::size_t id = 0;
  int label = 0;
  std::vector<std::vector<double>> modalities;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<Sample> samples;

  std::size_t class_count(int label) const;
};

struct SynthSpec {
  std::size_t n_per_class = 100;
  std::vector<ModalitySpec> modalities{{"audio", 4}, {"video", 3}, {"ppg", 2}};
  std::size_t seq_len = 120;
  double separation = 8.0;
  double noise_sigma = 0.5;
  std::size_t hierarchy_depth = 2;
  std::size_t branching = 2;
  std::size_t latent_dim = 8;
  // Offset scale of the first sub-cluster level; halves per level.
  double cluster_spread = 1.0;
  double drift_amplitude = 0.5;
  std::uint64_t seed = 7;
};

struct SyntheticDataset {
  Dataset dataset;
  // Leaf sub-cluster of each sample (shared tree, so comparable across
  // classes).
  std::vector<std::size_t> leaf;
};

// Two classes share one tree of sub-cluster offsets; the class anchors sit
// `separation` apart in latent space, so separation 0 makes the classes
// identically distributed.
SyntheticDataset generate_synthetic(const SynthSpec& spec);

// Text format: header line
//   M2ADX1 N=<n> L=<l> D=<d> labels=<0/1,...> dims=<name:int,...>
// then N*L lines of D space-separated values, sample-major.
void save_dataset(const Dataset& data, const std::string& path);
std::string serialize_dataset(const Dataset& data);
Dataset load_dataset(const std::string& path);
// Also checks the file against an expected layout.
Dataset load_dataset(const std::string& path, const DatasetMeta& expected);
Dataset parse_dataset(const std::string& text);

// [rows, cols] -> [target, cols]: first `target` rows kept, or zero rows
// appended.
std::vector<double> pad_trim(std::span<const double> seq, std::size_t rows,
                             std::size_t cols, std::size_t target);

// Per-feature z-score over every timestep of every sample, features indexed
// across the concatenated modality columns. Population std.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> stddev;

  static constexpr double kEpsilon = 1e-8;
};

Scaler fit_scaler(std::span<const Sample> pool, const DatasetMeta& meta);
std::vector<Sample> standardize_apply(const Scaler& scaler,
                                      std::span<const Sample> pool,
                                      const DatasetMeta& meta);

struct StandardizedPool {
  Scaler scaler;
  std::vector<Sample> samples;
};
StandardizedPool standardize_fit_transform(std::span<const Sample> pool,
                                           const DatasetMeta& meta);

}  // namespace hcfsln

#endif  // HCFSLN_DATA_HPP_
