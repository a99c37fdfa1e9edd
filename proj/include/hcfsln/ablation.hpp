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

#ifndef HCFSLN_ABLATION_HPP_
#define HCFSLN_ABLATION_HPP_

#include <string>
#include <vector>

#include "hcfsln/data.hpp"
#include "hcfsln/stats.hpp"
#include "hcfsln/train.hpp"

namespace hcfsln {

enum class AblationAxis { kLoss, kCurvature, kLambda };

std::string to_string(AblationAxis axis);
AblationAxis parse_ablation_axis(const std::string& text);

// Values are kept as text: loss modes for the loss axis, numbers otherwise.
struct AblationGrid {
  AblationAxis axis = AblationAxis::kCurvature;
  std::vector<std::string> values;
  TrainConfig base;
};

// Default axis values.
std::vector<std::string> default_ablation_values(AblationAxis axis);

// The training config of one cell. Curvature cells pin alpha (not
// trainable); the other axes leave the base model untouched.
TrainConfig ablation_cell_config(const AblationGrid& grid, std::size_t cell);

struct AblationRow {
  std::string value;
  RunReport run;
};

struct AblationTest {
  std::size_t a = 0;
  std::size_t b = 0;
  stats::WelchResult welch;
};

struct AblationReport {
  AblationAxis axis = AblationAxis::kCurvature;
  bool curvature_fixed = true;
  bool corrected = false;  // multiple-comparison correction applied
  std::vector<AblationRow> rows;
  std::vector<AblationTest> tests;
};

// One run_repeats per axis value on the same data and seeds, then a Welch
// test for every pair of rows (i < j). Pairs are skipped when a row has
// fewer than two accuracies.
AblationReport run_ablation(const Dataset& data, const AblationGrid& grid,
                            std::size_t threads = 1);

}  // namespace hcfsln

#endif  // HCFSLN_ABLATION_HPP_
