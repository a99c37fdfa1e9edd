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

#include "hcfsln/train.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "hcfsln/stats.hpp"

namespace hcfsln {

namespace {

// Independent generator streams from one seed.
enum Stream : std::uint64_t { kInit = 1, kEpisodes = 2, kDropout = 3, kEval = 4, kSplit = 5 };

std::mt19937_64 stream_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

std::uint64_t stream_seed(std::uint64_t seed, Stream stream) {
  return stream_rng(seed, stream)();
}

}  // namespace

void adam_step(std::span<Tensor> params, AdamState& state,
               const AdamOptions& options) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.size(), 0.0);
      state.v.emplace_back(p.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: state was built for a different parameter set");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (double g : params[i].grad()) {
      if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(options.beta1, t);
  const double bc2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto g = params[i].grad();
    auto w = params[i].mutable_values();
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (m.size() != w.size()) {
      throw std::invalid_argument("adam_step: state shape mismatch");
    }
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = g.empty() ? 0.0 : g[j];
      m[j] = options.beta1 * m[j] + (1.0 - options.beta1) * gj;
      v[j] = options.beta2 * v[j] + (1.0 - options.beta2) * gj * gj;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      w[j] -= options.learning_rate * mhat / (std::sqrt(vhat) + options.epsilon);
    }
  }
}

double clip_grad_norm(std::span<Tensor> params, double max_norm) {
  double ss = 0.0;
  for (const auto& p : params)
    for (double g : p.grad()) ss += g * g;
  const double norm = std::sqrt(ss);
  if (norm > max_norm) {
    const double f = max_norm / norm;
    for (auto& p : params)
      for (auto& g : p.mutable_grad()) g *= f;
  }
  return norm;
}

void validate(const TrainConfig& c) {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (!(c.adam.learning_rate > 0.0)) fail("train.learning_rate must be > 0");
  if (!(c.adam.beta1 >= 0.0 && c.adam.beta1 < 1.0)) fail("train.beta1 must be in [0,1)");
  if (!(c.adam.beta2 >= 0.0 && c.adam.beta2 < 1.0)) fail("train.beta2 must be in [0,1)");
  if (!(c.adam.epsilon > 0.0)) fail("train.epsilon must be > 0");
  if (c.episode.k < 1) fail("train.k must be >= 1");
  if (c.episode.b < 1) fail("train.b must be >= 1");
  if (c.repeats < 1) fail("train.repeats must be >= 1");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) {
    fail("train.test_fraction must be in (0,1)");
  }
  if (c.eval_episodes < 1) fail("train.eval_episodes must be >= 1");
  if (!(c.clip_norm > 0.0)) fail("train.clip_norm must be > 0");
  if (c.loss.gamma < 0.0) fail("loss.gamma must be >= 0");
  if (c.loss.lambda < 0.0) fail("loss.lambda must be >= 0");
  if (!(c.model.alpha_init > 0.0)) fail("model.alpha_init must be > 0");
}

TrainedModel train_model(std::span<const Sample> train_pool,
                         const DatasetMeta& meta, const TrainConfig& config,
                         std::uint64_t seed) {
  validate(config);
  auto standardized = standardize_fit_transform(train_pool, meta);
  TrainedModel model;
  model.params = ModelParams::init(meta, config.model, stream_seed(seed, kInit));
  model.scaler = std::move(standardized.scaler);
  const auto& pool = standardized.samples;

  auto params = model.params.trainable();
  AdamState adam;
  auto episode_rng = stream_rng(seed, kEpisodes);
  auto dropout_rng = stream_rng(seed, kDropout);
  ForwardContext ctx{true, &dropout_rng};
  std::vector<char> seen(pool.size(), 0);
  reset_acosh_clamp_count();
  auto& tape = Tape::current();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    for (std::size_t e = 0; e < config.episodes_per_epoch; ++e) {
      const Episode ep = sample_episode(pool, config.episode, episode_rng);
      for (auto i : ep.support) seen[i] = 1;
      for (auto i : ep.query) seen[i] = 1;
      tape.clear();
      for (auto& p : params) p.zero_grad();
      const EpisodeResult res = run_episode(pool, ep, model.params, config.loss, ctx);
      const double loss = res.loss.item();
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                           " episode " + std::to_string(e));
      }
      model.embeddings_checked += res.embeddings;
      model.max_embedding_norm = std::max(model.max_embedding_norm, res.max_embedding_norm);
      if (res.loss.requires_grad()) {
        tape.backward(res.loss);
        if (clip_grad_norm(params, config.clip_norm) > config.clip_norm) {
          ++model.clip_events;
        }
      } else {
        tape.clear();
      }
      adam_step(params, adam, config.adam);
      total += loss;
    }
    model.loss_curve.push_back(total / static_cast<double>(config.episodes_per_epoch));
  }
  for (auto& p : params) p.zero_grad();
  model.acosh_clamps = acosh_clamp_count();
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (seen[i]) model.seen_ids.push_back(pool[i].id);
  std::sort(model.seen_ids.begin(), model.seen_ids.end());
  return model;
}

double evaluate(const TrainedModel& model, std::span<const Sample> pool,
                const EpisodeSpec& spec, std::size_t n_episodes,
                std::uint64_t seed) {
  NoGradScope no_grad;
  const auto standardized = standardize_apply(model.scaler, pool, model.params.layout);
  auto rng = stream_rng(seed, kEval);
  ForwardContext ctx{false, nullptr};
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t e = 0; e < n_episodes; ++e) {
    const Episode ep = sample_episode(standardized, spec, rng);
    const EpisodeResult res = run_episode(standardized, ep, model.params, LossConfig{}, ctx);
    correct += res.correct;
    total += res.total;
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

Split split_stratified(const Dataset& data, double test_fraction,
                       std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must be in (0,1)");
  }
  constexpr auto kClasses = static_cast<std::size_t>(kNumClasses);
  std::array<std::vector<std::size_t>, kClasses> members;
  for (std::size_t i = 0; i < data.samples.size(); ++i)
    members[static_cast<std::size_t>(data.samples[i].label)].push_back(i);
  std::array<std::size_t, kClasses> n_test{};
  for (std::size_t c = 0; c < kClasses; ++c) {
    const std::size_t n = members[c].size();
    if (n < 2) {
      throw InsufficientSamplesError("stratified split: class " + std::to_string(c) +
                                     " has " + std::to_string(n) +
                                     " samples, need at least 2");
    }
    const auto want = static_cast<std::size_t>(
        std::nearbyint(static_cast<double>(n) * test_fraction));
    n_test[c] = std::clamp<std::size_t>(want, 1, n - 1);
  }
  // Reconcile with the overall target on the larger class.
  const std::size_t larger = members[1].size() > members[0].size() ? 1 : 0;
  const auto target = static_cast<long>(std::nearbyint(
      static_cast<double>(data.samples.size()) * test_fraction));
  const long adjusted = static_cast<long>(n_test[larger]) +
                        (target - static_cast<long>(n_test[0] + n_test[1]));
  n_test[larger] = static_cast<std::size_t>(std::clamp<long>(
      adjusted, 1, static_cast<long>(members[larger].size()) - 1));

  auto rng = stream_rng(seed, kSplit);
  Split split;
  std::vector<char> is_test(data.samples.size(), 0);
  for (std::size_t c = 0; c < kClasses; ++c) {
    auto idx = members[c];
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < n_test[c]; ++i) is_test[idx[i]] = 1;
  }
  for (std::size_t i = 0; i < data.samples.size(); ++i)
    (is_test[i] ? split.test : split.train).push_back(data.samples[i]);
  return split;
}

void summarize(RunReport& report) {
  report.mean = stats::mean(report.accuracies);
  report.stddev = stats::sample_stddev(report.accuracies);
  report.single_run = report.accuracies.size() == 1;
}

RunReport run_repeats(const Dataset& data, const TrainConfig& config,
                      std::size_t threads, const RepeatCallback& on_repeat) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = config.repeats;

  struct Outcome {
    bool done = false;
    std::string error;
    double accuracy = 0.0;
    std::vector<double> curve;
    std::uint64_t clips = 0;
    std::uint64_t clamps = 0;
    std::size_t checked = 0;
    double max_norm = 0.0;
  };
  std::vector<Outcome> outcomes(n);

  auto run_one = [&](std::size_t i) {
    const std::uint64_t seed = config.seed + i;
    try {
      const Split split = split_stratified(data, config.test_fraction, seed);
      const TrainedModel model = train_model(split.train, data.meta, config, seed);
      for (const auto& s : split.test) {
        if (std::binary_search(model.seen_ids.begin(), model.seen_ids.end(), s.id)) {
          throw std::logic_error("test sample " + std::to_string(s.id) +
                                 " leaked into a training episode");
        }
      }
      auto& o = outcomes[i];
      o.accuracy = evaluate(model, split.test, config.episode, config.eval_episodes, seed);
      o.curve = model.loss_curve;
      o.clips = model.clip_events;
      o.clamps = model.acosh_clamps;
      o.checked = model.embeddings_checked;
      o.max_norm = model.max_embedding_norm;
      if (on_repeat) on_repeat(i, model, split);
      o.done = true;
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, n);
  const int inner = static_cast<int>(std::max<std::size_t>(1, threads / workers));
  if (workers == 1) {
    const int saved = omp_get_max_threads();
    omp_set_num_threads(std::max(1, static_cast<int>(threads)));
    for (std::size_t i = 0; i < n; ++i) run_one(i);
    omp_set_num_threads(saved);
  } else {
    std::mutex mu;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        omp_set_num_threads(inner);
        for (;;) {
          std::size_t i;
          {
            std::lock_guard lock(mu);
            if (next >= n) return;
            i = next++;
          }
          run_one(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  RunReport report;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = outcomes[i];
    if (!o.done) {
      if (!report.failed) {
        report.failed = true;
        report.failure = "repeat " + std::to_string(i) + ": " + o.error;
      }
      continue;
    }
    report.seeds.push_back(config.seed + i);
    report.accuracies.push_back(o.accuracy);
    report.loss_curves.push_back(o.curve);
    report.clip_events.push_back(o.clips);
    report.acosh_clamps.push_back(o.clamps);
    report.embeddings_checked.push_back(o.checked);
    report.max_embedding_norm.push_back(o.max_norm);
  }
  summarize(report);
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace hcfsln
