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

#ifndef HCFSLN_MODEL_IO_HPP_
#define HCFSLN_MODEL_IO_HPP_

#include <cstdint>
#include <string>

#include "hcfsln/data.hpp"
#include "hcfsln/train.hpp"

namespace hcfsln {

// Wrong magic, version or dimensions.
class ModelFormatError : public DataFormatError {
 public:
  using DataFormatError::DataFormatError;
};

inline constexpr char kModelMagic[] = "HCFSLN1";
inline constexpr std::uint8_t kModelVersion = 1;

// A trained model plus the split it was trained on.
struct ModelBundle {
  TrainedModel model;
  std::uint64_t split_seed = 0;
  double test_fraction = 0.2;
};

// Magic, version byte, layout and architecture header, split info, then
// every parameter as little-endian float64 in declared order, then the
// scaler.
std::string serialize_model(const ModelBundle& bundle);
ModelBundle deserialize_model(const std::string& bytes);

void save_model(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model(const std::string& path);

// Throws ModelFormatError when the model was built for another layout.
void check_layout(const ModelParams& params, const DatasetMeta& meta);

}  // namespace hcfsln

#endif  // HCFSLN_MODEL_IO_HPP_
