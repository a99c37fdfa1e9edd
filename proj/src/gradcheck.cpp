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

#include "hcfsln/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace hcfsln {

double gradient_relative_error(double analytic, double numeric, double floor) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const std::function<Tensor()>& f,
                           std::vector<Tensor> params, double step, double tol,
                           double floor) {
  if (!(step > 0.0)) throw std::invalid_argument("grad_check: step must be > 0");
  for (auto& p : params) {
    if (!p.is_leaf() || !p.requires_grad()) {
      throw std::invalid_argument(
          "grad_check: parameters must be leaves that require grad");
    }
    p.zero_grad();
  }

  auto& tape = Tape::current();
  tape.clear();
  const Tensor loss = f();
  const double base = loss.item();
  tape.backward(loss);

  double again = 0.0;
  {
    NoGradScope no_grad;
    again = f().item();
  }
  if (again != base) {
    throw NumericError("grad_check: function is not deterministic (" +
                       std::to_string(base) + " vs " + std::to_string(again) +
                       ")");
  }

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) {
    const auto g = p.grad();
    if (g.empty()) {
      analytic.emplace_back(p.size(), 0.0);
    } else {
      analytic.emplace_back(g.begin(), g.end());
    }
  }

  GradCheckReport report;
  NoGradScope no_grad;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto values = params[pi].mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = f().item();
      values[i] = saved - step;
      const double down = f().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[pi][i];
      const double rel = gradient_relative_error(a, numeric, floor);
      report.max_abs_error = std::max(report.max_abs_error, std::abs(a - numeric));
      if (rel > report.max_rel_error || report.checked == 0) {
        report.max_rel_error = rel;
        report.worst_param = pi;
        report.worst_element = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
      ++report.checked;
    }
  }
  report.passed = report.max_rel_error < tol;
  for (auto& p : params) p.zero_grad();
  return report;
}

}  // namespace hcfsln
