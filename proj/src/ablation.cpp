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

#include "hcfsln/ablation.hpp"

#include <stdexcept>

#include "hcfsln/config.hpp"

namespace hcfsln {

std::string to_string(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::kLoss: return "loss";
    case AblationAxis::kCurvature: return "curvature";
    case AblationAxis::kLambda: return "lambda";
  }
  return "?";
}

AblationAxis parse_ablation_axis(const std::string& text) {
  if (text == "loss") return AblationAxis::kLoss;
  if (text == "curvature") return AblationAxis::kCurvature;
  if (text == "lambda") return AblationAxis::kLambda;
  throw std::invalid_argument("unknown ablation axis '" + text +
                              "' (expected loss|curvature|lambda)");
}

std::vector<std::string> default_ablation_values(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::kLoss: return {"proto", "angular", "combined"};
    case AblationAxis::kCurvature: return {"0.5", "1.0", "2.0"};
    case AblationAxis::kLambda: return {"0.25", "0.5", "1.0"};
  }
  return {};
}

TrainConfig ablation_cell_config(const AblationGrid& grid, std::size_t cell) {
  if (cell >= grid.values.size()) throw std::out_of_range("ablation cell");
  TrainConfig config = grid.base;
  const std::string& v = grid.values[cell];
  switch (grid.axis) {
    case AblationAxis::kLoss:
      config.loss.mode = parse_loss_mode(v);
      break;
    case AblationAxis::kCurvature:
      config.model.alpha_init = parse_double_value(v, "ablate.values");
      config.model.alpha_trainable = false;
      break;
    case AblationAxis::kLambda:
      config.loss.lambda = parse_double_value(v, "ablate.values");
      break;
  }
  validate(config);
  return config;
}

AblationReport run_ablation(const Dataset& data, const AblationGrid& grid,
                            std::size_t threads) {
  if (grid.values.empty()) {
    throw std::invalid_argument("ablation grid has no axis values");
  }
  std::vector<TrainConfig> configs;
  for (std::size_t i = 0; i < grid.values.size(); ++i)
    configs.push_back(ablation_cell_config(grid, i));

  AblationReport report;
  report.axis = grid.axis;
  report.curvature_fixed = grid.axis == AblationAxis::kCurvature;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    RunReport run = run_repeats(data, configs[i], threads);
    if (run.failed) throw NumericError("ablation cell " + grid.values[i] +
                                             ": " + run.failure);
    report.rows.push_back({grid.values[i], std::move(run)});
  }
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    for (std::size_t j = i + 1; j < report.rows.size(); ++j) {
      const auto& a = report.rows[i].run.accuracies;
      const auto& b = report.rows[j].run.accuracies;
      if (a.size() < 2 || b.size() < 2) continue;
      report.tests.push_back({i, j, stats::welch_t_test(a, b)});
    }
  }
  return report;
}

}  // namespace hcfsln
