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

#ifndef HCFSLN_GRADCHECK_HPP_
#define HCFSLN_GRADCHECK_HPP_

#include <functional>
#include <string>
#include <vector>

#include "hcfsln/tensor.hpp"

namespace hcfsln {

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
  // Parameter index and flat element of the worst relative error.
  std::size_t worst_param = 0;
  std::size_t worst_element = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool passed = false;
};

// Relative error of one gradient entry: |a - n| / max(|a|, |n|, floor).
// The floor keeps entries whose true derivative is ~0 from dividing
// finite-difference truncation noise by nothing.
double gradient_relative_error(double analytic, double numeric,
                               double floor = 1e-3);

// Compares tape gradients of the scalar `f` against central differences
// with the given step, over every element of every parameter. `f` must be
// deterministic; a second evaluation that differs bitwise throws
// NumericError. Parameters are restored on exit.
GradCheckReport grad_check(const std::function<Tensor()>& f,
                           std::vector<Tensor> params, double step,
                           double tol, double floor = 1e-3);

}  // namespace hcfsln

#endif  // HCFSLN_GRADCHECK_HPP_
