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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "hcfsln/data.hpp"

using namespace hcfsln;

namespace {

std::string small_file(std::size_t n, std::size_t l, std::size_t d, const std::string& dims) {
  std::ostringstream out;
  out << "M2ADX1 N=" << n << " L=" << l << " D=" << d << " labels=";
  for (std::size_t i = 0; i < n; ++i) out << (i ? "," : "") << (i % 2);
  out << " dims=" << dims << "\n";
  for (std::size_t i = 0; i < n * l; ++i) {
    for (std::size_t j = 0; j < d; ++j) out << (j ? " " : "") << i * 10 + j;
    out << "\n";
  }
  return out.str();
}

}  // namespace

TEST_CASE("modality dims parse and format") {
  const auto mods = parse_modality_dims("audio:4,video:3,ppg:2");
  REQUIRE(mods.size() == 3);
  CHECK(mods[1].name == "video");
  CHECK(mods[1].dim == 3);
  CHECK(format_modality_dims(mods) == "audio:4,video:3,ppg:2");
  CHECK_THROWS_AS(parse_modality_dims("audio"), DataFormatError);
  CHECK_THROWS_AS(parse_modality_dims("audio:0"), DataFormatError);
}

TEST_CASE("parse slices rows into modalities") {
  const Dataset data = parse_dataset(small_file(4, 120, 5, "a:3,b:2"));
  REQUIRE(data.samples.size() == 4);
  CHECK(data.meta.seq_len == 120);
  const Sample& s = data.samples[2];
  REQUIRE(s.modalities.size() == 2);
  CHECK(s.modalities[0].size() == 120 * 3);
  CHECK(s.modalities[1].size() == 120 * 2);
  // Sample 2 starts at file row 240: values 2400..2404.
  CHECK(s.modalities[0][0] == 2400);
  CHECK(s.modalities[0][2] == 2402);
  CHECK(s.modalities[1][0] == 2403);
  CHECK(s.modalities[1][3] == 2414);
  CHECK(s.label == 0);
  CHECK(data.samples[3].label == 1);
}

TEST_CASE("header D must equal the sum of modality dims") {
  try {
    parse_dataset(small_file(2, 3, 6, "a:3,b:2"));
    FAIL("expected DataFormatError");
  } catch (const DataFormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("6") != std::string::npos);
    CHECK(msg.find("5") != std::string::npos);
  }
}

TEST_CASE("malformed files are rejected") {
  CHECK_THROWS_AS(parse_dataset(""), DataFormatError);
  CHECK_THROWS_AS(parse_dataset("CSV1 N=1"), DataFormatError);
  std::string bad = small_file(2, 3, 2, "a:2");
  bad.replace(bad.rfind("51"), 2, "x1");
  CHECK_THROWS_AS(parse_dataset(bad), DataFormatError);
  std::string truncated = small_file(2, 3, 2, "a:2");
  truncated.resize(truncated.rfind('\n', truncated.size() - 2) + 1);
  CHECK_THROWS_AS(parse_dataset(truncated), DataFormatError);
  std::string nan_file = small_file(2, 3, 2, "a:2");
  nan_file.replace(nan_file.rfind("51"), 2, "nan");
  CHECK_THROWS_AS(parse_dataset(nan_file), DataFormatError);
}

TEST_CASE("synthetic data is deterministic and round-trips through the file format") {
  SynthSpec spec;
  spec.n_per_class = 6;
  spec.seq_len = 16;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  REQUIRE(a.dataset.samples.size() == 12);
  CHECK(serialize_dataset(a.dataset) == serialize_dataset(b.dataset));
  CHECK(a.dataset.class_count(0) == 6);
  CHECK(a.dataset.class_count(1) == 6);

  const auto path = (std::filesystem::temp_directory_path() / "hcfsln_rt.m2adx").string();
  save_dataset(a.dataset, path);
  const Dataset back = load_dataset(path, a.dataset.meta);
  CHECK(back.meta == a.dataset.meta);
  for (std::size_t i = 0; i < back.samples.size(); ++i) {
    CHECK(back.samples[i].label == a.dataset.samples[i].label);
    CHECK(back.samples[i].modalities == a.dataset.samples[i].modalities);
  }
  DatasetMeta other = a.dataset.meta;
  other.seq_len = 20;
  CHECK_THROWS_AS(load_dataset(path, other), DataFormatError);
  std::filesystem::remove(path);

  spec.seed = 8;
  CHECK(serialize_dataset(generate_synthetic(spec).dataset) != serialize_dataset(a.dataset));
}

TEST_CASE("separation zero gives classes with matching statistics") {
  SynthSpec spec;
  spec.n_per_class = 400;
  spec.seq_len = 8;
  spec.separation = 0.0;
  const auto synth = generate_synthetic(spec);
  // Per-class mean of the first audio feature agrees within sampling noise.
  double m[2] = {0, 0};
  for (const auto& s : synth.dataset.samples) m[s.label] += s.modalities[0][0] / 400.0;
  CHECK(std::abs(m[0] - m[1]) < 0.5);

  spec.separation = 8.0;
  const auto sep = generate_synthetic(spec);
  double far = 0;
  for (std::size_t f = 0; f < 4; ++f) {
    double c[2] = {0, 0};
    for (const auto& s : sep.dataset.samples) c[s.label] += s.modalities[0][f] / 400.0;
    far = std::max(far, std::abs(c[0] - c[1]));
  }
  CHECK(far > 0.5);
}

TEST_CASE("pad and trim to the target length") {
  std::vector<double> seq(125 * 2);
  for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = static_cast<double>(i);
  const auto trimmed = pad_trim(seq, 125, 2, 120);
  CHECK(trimmed.size() == 240);
  CHECK(trimmed.back() == 239);

  std::vector<double> shorter(115 * 2, 1.0);
  const auto padded = pad_trim(shorter, 115, 2, 120);
  CHECK(padded.size() == 240);
  CHECK(padded[229] == 1.0);
  CHECK(padded[230] == 0.0);
  CHECK(padded[239] == 0.0);

  std::vector<double> exact(120 * 2, 3.0);
  CHECK(pad_trim(exact, 120, 2, 120) == exact);
}

TEST_CASE("standardisation") {
  DatasetMeta meta;
  meta.modalities = {{"a", 2}};
  meta.seq_len = 1;
  std::vector<Sample> pool;
  for (int i = 0; i < 3; ++i) {
    Sample s;
    s.id = static_cast<std::size_t>(i);
    s.modalities = {{static_cast<double>(i + 1), 7.0}};
    pool.push_back(s);
  }
  const auto out = standardize_fit_transform(pool, meta);
  const double z = std::sqrt(1.5);  // 1 / population std of {1,2,3}
  CHECK(out.samples[0].modalities[0][0] == doctest::Approx(-z).epsilon(1e-7));
  CHECK(out.samples[1].modalities[0][0] == doctest::Approx(0.0));
  CHECK(out.samples[2].modalities[0][0] == doctest::Approx(1.2247).epsilon(1e-4));
  for (const auto& s : out.samples) CHECK(s.modalities[0][1] == 0.0);
  CHECK(out.scaler.mean[0] == doctest::Approx(2.0));
  // The fitted scaler applies unchanged to new data.
  Sample t;
  t.modalities = {{4.0, 7.0}};
  const auto applied = standardize_apply(out.scaler, std::vector<Sample>{t}, meta);
  CHECK(applied[0].modalities[0][0] == doctest::Approx(2.0 * z).epsilon(1e-7));
}
