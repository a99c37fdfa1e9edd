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

#ifndef HCFSLN_GRADCHECK_SUITE_HPP_
#define HCFSLN_GRADCHECK_SUITE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hcfsln/gradcheck.hpp"

namespace hcfsln {

struct GradCheckSuiteOptions {
  std::uint64_t seed = 11;
  double step = 1e-6;
  double tol = 1e-4;
  double floor = 1e-3;
  bool include_episode = true;
};

struct GradCheckCase {
  std::string name;
  GradCheckReport report;
};

struct GradCheckSuiteResult {
  std::vector<GradCheckCase> cases;
  double max_rel_error = 0.0;
  bool passed = false;
  double seconds = 0.0;
};

// Every differentiable primitive on small random inputs, the geometry
// operations, and one full combined-loss episode (K=1, B=1, two
// modalities, embed dim 16, L=8, dropout off).
GradCheckSuiteResult run_gradcheck_suite(const GradCheckSuiteOptions& options = {});

}  // namespace hcfsln

#endif  // HCFSLN_GRADCHECK_SUITE_HPP_
