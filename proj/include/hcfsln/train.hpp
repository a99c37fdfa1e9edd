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

#ifndef HCFSLN_TRAIN_HPP_
#define HCFSLN_TRAIN_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hcfsln/data.hpp"
#include "hcfsln/fewshot.hpp"
#include "hcfsln/model.hpp"

namespace hcfsln {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;
};

// One bias-corrected Adam update from each parameter's accumulated grad (a
// missing grad counts as zero). Throws NumericError on a non-finite
// gradient before touching any parameter.
void adam_step(std::span<Tensor> params, AdamState& state,
               const AdamOptions& options);

// Scales all grads so their joint L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_grad_norm(std::span<Tensor> params, double max_norm);

struct TrainConfig {
  AdamOptions adam;
  std::size_t epochs = 50;
  std::size_t episodes_per_epoch = 100;
  EpisodeSpec episode;
  std::uint64_t seed = 1;
  std::size_t repeats = 5;
  double test_fraction = 0.2;
  std::size_t eval_episodes = 200;
  double clip_norm = 10.0;
  LossConfig loss;
  ModelOptions model;
};

// Throws std::invalid_argument on an out-of-range field.
void validate(const TrainConfig& config);

struct TrainedModel {
  ModelParams params;
  Scaler scaler;
  std::vector<double> loss_curve;  // mean episode loss per epoch
  std::uint64_t clip_events = 0;
  std::uint64_t acosh_clamps = 0;
  std::size_t embeddings_checked = 0;
  double max_embedding_norm = 0.0;
  // Sorted ids of every sample that appeared in a training episode.
  std::vector<std::size_t> seen_ids;
};

// Fits the scaler on `train_pool`, initialises parameters from `seed` and
// runs epochs x episodes_per_epoch Adam steps on the episode loss.
TrainedModel train_model(std::span<const Sample> train_pool,
                         const DatasetMeta& meta, const TrainConfig& config,
                         std::uint64_t seed);

// Fraction of correctly classified queries over n_episodes episodes drawn
// from `pool` (raw features; the model's scaler is applied here).
double evaluate(const TrainedModel& model, std::span<const Sample> pool,
                const EpisodeSpec& spec, std::size_t n_episodes,
                std::uint64_t seed);

struct Split {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

// Per class, round_half_even(n_c * fraction) test samples (at least one, at
// most n_c - 1); the total is then corrected to round_half_even(N *
// fraction) on the larger class.
Split split_stratified(const Dataset& data, double test_fraction,
                       std::uint64_t seed);

struct RunReport {
  std::vector<double> accuracies;
  double mean = 0.0;
  double stddev = 0.0;
  bool single_run = false;
  bool failed = false;
  std::string failure;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<double>> loss_curves;
  std::vector<std::uint64_t> clip_events;
  std::vector<std::uint64_t> acosh_clamps;
  std::vector<std::size_t> embeddings_checked;
  std::vector<double> max_embedding_norm;
  double seconds = 0.0;
};

// Called once per finished repeat, possibly from a worker thread.
using RepeatCallback =
    std::function<void(std::size_t repeat, const TrainedModel&, const Split&)>;

// `repeats` independent split/train/evaluate cycles with seeds seed + i, on
// up to `threads` worker threads. A repeat that throws marks the report
// failed; finished repeats are kept.
RunReport run_repeats(const Dataset& data, const TrainConfig& config,
                      std::size_t threads = 1,
                      const RepeatCallback& on_repeat = {});

// Mean and n-1 std of report.accuracies, single_run when there is one.
void summarize(RunReport& report);

}  // namespace hcfsln

#endif  // HCFSLN_TRAIN_HPP_
