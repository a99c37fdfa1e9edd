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

#include "hcfsln/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hcfsln {

namespace {

static_assert(std::endian::native == std::endian::little,
              "model blobs are written little-endian");

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    out_.append(static_cast<const char*>(p), n);
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void f64(double v) { bytes(&v, 8); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void doubles(std::span<const double> xs) {
    u64(xs.size());
    for (double x : xs) f64(x);
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}
  void bytes(void* p, std::size_t n) {
    if (data_.size() - pos_ < n) throw ModelFormatError("model blob truncated");
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, 8);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, 8);
    return v;
  }
  std::string str() {
    const std::uint64_t n = u64();
    if (n > data_.size() - pos_) throw ModelFormatError("model blob truncated");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  std::vector<double> doubles() {
    const std::uint64_t n = u64();
    if (n > (data_.size() - pos_) / 8) throw ModelFormatError("model blob truncated");
    std::vector<double> xs(n);
    for (auto& x : xs) x = f64();
    return xs;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

void read_into(Reader& r, const NamedTensor& p) {
  const auto values = r.doubles();
  auto dst = Tensor(p.tensor).mutable_values();
  if (values.size() != dst.size()) {
    throw ModelFormatError("parameter " + p.name + ": expected " +
                           std::to_string(dst.size()) + " values, blob has " +
                           std::to_string(values.size()));
  }
  std::copy(values.begin(), values.end(), dst.begin());
}

}  // namespace

std::string serialize_model(const ModelBundle& bundle) {
  const ModelParams& p = bundle.model.params;
  Writer w;
  w.bytes(kModelMagic, sizeof(kModelMagic) - 1);
  w.u8(kModelVersion);
  w.u64(p.layout.modalities.size());
  for (const auto& m : p.layout.modalities) {
    w.str(m.name);
    w.u64(m.dim);
  }
  w.u64(p.layout.seq_len);
  w.u64(p.options.embed_dim);
  w.u64(p.options.heads);
  w.u8(static_cast<std::uint8_t>(p.options.kind));
  w.u8(static_cast<std::uint8_t>(p.options.pooling));
  w.u8(p.options.alpha_trainable ? 1 : 0);
  w.f64(p.options.dropout);
  w.f64(p.options.alpha_init);
  w.u64(bundle.split_seed);
  w.f64(bundle.test_fraction);
  const auto params = p.parameters();
  w.u64(params.size());
  for (const auto& np : params) {
    w.str(np.name);
    w.doubles(np.tensor.values());
  }
  w.doubles(bundle.model.scaler.mean);
  w.doubles(bundle.model.scaler.stddev);
  return w.take();
}

ModelBundle deserialize_model(const std::string& bytes) {
  Reader r(bytes);
  char magic[sizeof(kModelMagic) - 1];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
    throw ModelFormatError("not a model blob (bad magic)");
  }
  if (const auto v = r.u8(); v != kModelVersion) {
    throw ModelFormatError("model format version " + std::to_string(v) +
                           ", expected " + std::to_string(kModelVersion));
  }
  DatasetMeta layout;
  const std::uint64_t m = r.u64();
  if (m == 0 || m > 1024) throw ModelFormatError("bad modality count");
  for (std::uint64_t i = 0; i < m; ++i) {
    ModalitySpec spec;
    spec.name = r.str();
    spec.dim = r.u64();
    layout.modalities.push_back(spec);
  }
  layout.seq_len = r.u64();
  ModelOptions options;
  options.embed_dim = r.u64();
  options.heads = r.u64();
  const auto kind = r.u8();
  const auto pooling = r.u8();
  if (kind > 1 || pooling > 1) throw ModelFormatError("bad model kind or pooling");
  options.kind = static_cast<ModelKind>(kind);
  options.pooling = static_cast<Pooling>(pooling);
  options.alpha_trainable = r.u8() != 0;
  options.dropout = r.f64();
  options.alpha_init = r.f64();

  ModelBundle bundle;
  bundle.split_seed = r.u64();
  bundle.test_fraction = r.f64();
  try {
    bundle.model.params = ModelParams::init(layout, options, 0);
  } catch (const std::exception& e) {
    throw ModelFormatError(std::string("model header: ") + e.what());
  }
  const auto params = bundle.model.params.parameters();
  if (r.u64() != params.size()) throw ModelFormatError("parameter count mismatch");
  for (const auto& np : params) {
    const std::string name = r.str();
    if (name != np.name) {
      throw ModelFormatError("parameter order mismatch: blob has " + name +
                             ", expected " + np.name);
    }
    read_into(r, np);
  }
  bundle.model.scaler.mean = r.doubles();
  bundle.model.scaler.stddev = r.doubles();
  const std::size_t d = layout.total_dim();
  if (bundle.model.scaler.mean.size() != d || bundle.model.scaler.stddev.size() != d) {
    throw ModelFormatError("scaler size mismatch");
  }
  if (!r.done()) throw ModelFormatError("trailing bytes after model blob");
  return bundle;
}

void save_model(const ModelBundle& bundle, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::string bytes = serialize_model(bundle);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

ModelBundle load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError("cannot read model " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

void check_layout(const ModelParams& params, const DatasetMeta& meta) {
  const auto& a = params.layout;
  bool same = a.seq_len == meta.seq_len && a.modalities.size() == meta.modalities.size();
  for (std::size_t i = 0; same && i < a.modalities.size(); ++i) {
    same = a.modalities[i].name == meta.modalities[i].name &&
           a.modalities[i].dim == meta.modalities[i].dim;
  }
  if (!same) {
    throw ModelFormatError("model was trained for dims=" + format_modality_dims(a.modalities) +
                           " L=" + std::to_string(a.seq_len) + ", data has dims=" +
                           format_modality_dims(meta.modalities) +
                           " L=" + std::to_string(meta.seq_len));
  }
}

}  // namespace hcfsln
