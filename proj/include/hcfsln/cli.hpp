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

#ifndef HCFSLN_CLI_HPP_
#define HCFSLN_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace hcfsln::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericError = 3,
};

inline const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v = {
      "gen-data", "train", "eval", "ablate", "export-embeddings", "gradcheck"};
  return v;
}

// Closest verb by edit distance, or empty when nothing is close.
std::string suggest_verb(const std::string& verb);

std::string usage();

// Runs one command. Results go to `out`; failures print one
// "error<TAB>code=<n><TAB>kind=<kind><TAB><reason>" line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hcfsln::cli

#endif  // HCFSLN_CLI_HPP_
