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

#ifndef HCFSLN_STATS_HPP_
#define HCFSLN_STATS_HPP_

#include <span>

namespace hcfsln::stats {

double mean(std::span<const double> xs);
// n - 1 denominator; 0.0 for fewer than two values.
double sample_stddev(std::span<const double> xs);

// Regularized incomplete beta I_x(a, b), continued fraction (Lentz) with a
// 1e-12 convergence tolerance.
double regularized_incomplete_beta(double x, double a, double b);

// Student t with `dof` degrees of freedom (fractional allowed).
double student_t_cdf(double t, double dof);
// P(|T| >= |t|)
double student_t_two_sided_p(double t, double dof);

struct WelchResult {
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  // Zero standard error: both groups constant. Equal constants give t = 0,
  // p = 1; unequal constants give t = +-inf, p = 0, dof = n_a + n_b - 2.
  bool degenerate = false;
};

// Unequal-variance two-sample t test, Welch-Satterthwaite dof, two-sided p.
// t > 0 when mean(a) > mean(b). Throws std::invalid_argument when either
// group has fewer than two values.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace hcfsln::stats

#endif  // HCFSLN_STATS_HPP_
