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

#include <algorithm>
#include <cmath>
#include <vector>

#include "hcfsln/kernels.hpp"

namespace hcfsln::kernels::omp {
namespace {

constexpr std::size_t kMr = 4;
constexpr std::size_t kNr = 16;

// MR x NR register tile, both compile-time.
template <std::size_t MR, std::size_t NR>
inline void tile(const double* a, const double* b, double* c, std::size_t k,
                 std::size_t n, bool accumulate) {
  double acc[MR][NR];
  for (std::size_t r = 0; r < MR; ++r)
    for (std::size_t j = 0; j < NR; ++j)
      acc[r][j] = accumulate ? c[r * n + j] : 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = b + p * n;
    for (std::size_t r = 0; r < MR; ++r) {
      const double av = a[r * k + p];
#pragma omp simd
      for (std::size_t j = 0; j < NR; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (std::size_t r = 0; r < MR; ++r)
    for (std::size_t j = 0; j < NR; ++j) c[r * n + j] = acc[r][j];
}

// Columns left over after the 16- and 8-wide tiles.
inline void tile_ragged(const double* a, const double* b, double* c,
                        std::size_t k, std::size_t n, std::size_t mr,
                        std::size_t nr, bool accumulate) {
  double acc[kMr][kNr];
  for (std::size_t r = 0; r < mr; ++r)
    for (std::size_t j = 0; j < nr; ++j)
      acc[r][j] = accumulate ? c[r * n + j] : 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = b + p * n;
    for (std::size_t r = 0; r < mr; ++r) {
      const double av = a[r * k + p];
      for (std::size_t j = 0; j < nr; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (std::size_t r = 0; r < mr; ++r)
    for (std::size_t j = 0; j < nr; ++j) c[r * n + j] = acc[r][j];
}

template <std::size_t NR>
inline void tile_rows(const double* a, const double* b, double* c,
                      std::size_t k, std::size_t n, std::size_t mr,
                      bool accumulate) {
  switch (mr) {
    case 4: tile<4, NR>(a, b, c, k, n, accumulate); break;
    case 3: tile<3, NR>(a, b, c, k, n, accumulate); break;
    case 2: tile<2, NR>(a, b, c, k, n, accumulate); break;
    default: tile<1, NR>(a, b, c, k, n, accumulate); break;
  }
}

// One kMr x kNr block of C, possibly clipped at the matrix edge.
inline void block(const double* a, const double* b, double* c, std::size_t k,
                  std::size_t n, std::size_t mr, std::size_t nr,
                  bool accumulate) {
  if (nr == kNr) {
    tile_rows<16>(a, b, c, k, n, mr, accumulate);
    return;
  }
  std::size_t j = 0;
  if (nr >= 8) {
    tile_rows<8>(a, b, c, k, n, mr, accumulate);
    j = 8;
  }
  if (nr - j >= 4) {
    tile_rows<4>(a, b + j, c + j, k, n, mr, accumulate);
    j += 4;
  }
  if (j < nr) tile_ragged(a, b + j, c + j, k, n, mr, nr - j, accumulate);
}

}  // namespace

void gemm(std::span<const double> a, std::span<const double> b,
          std::span<double> c, std::size_t m, std::size_t k, std::size_t n,
          bool accumulate) {
  if (m == 0 || n == 0) return;
  if (k == 0) {
    if (!accumulate) std::fill(c.begin(), c.begin() + m * n, 0.0);
    return;
  }
  const std::size_t mt = (m + kMr - 1) / kMr;
  const std::size_t nt = (n + kNr - 1) / kNr;
  const bool par = m * n * k >= kParallelThreshold;
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
#pragma omp parallel for collapse(2) schedule(static) if (par)
  for (std::size_t jt = 0; jt < nt; ++jt) {
    for (std::size_t it = 0; it < mt; ++it) {
      const std::size_t i0 = it * kMr;
      const std::size_t j0 = jt * kNr;
      const std::size_t mr = std::min(kMr, m - i0);
      const std::size_t nr = std::min(kNr, n - j0);
      block(ap + i0 * k, bp + j0, cp + i0 * n + j0, k, n, mr, nr, accumulate);
    }
  }
}

void transpose(std::span<const double> a, std::span<double> out,
               std::size_t rows, std::size_t cols) {
  constexpr std::size_t kBlock = 32;
  for (std::size_t i0 = 0; i0 < rows; i0 += kBlock) {
    for (std::size_t j0 = 0; j0 < cols; j0 += kBlock) {
      const std::size_t i1 = std::min(rows, i0 + kBlock);
      const std::size_t j1 = std::min(cols, j0 + kBlock);
      for (std::size_t i = i0; i < i1; ++i)
        for (std::size_t j = j0; j < j1; ++j) out[j * rows + i] = a[i * cols + j];
    }
  }
}

void gemm_tn(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate) {
  std::vector<double> at(m * k);
  transpose(a, at, k, m);
  gemm(at, b, c, m, k, n, accumulate);
}

void gemm_nt(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate) {
  std::vector<double> bt(k * n);
  transpose(b, bt, n, k);
  gemm(a, bt, c, m, k, n, accumulate);
}

void im2col(std::span<const double> x, std::span<double> cols,
            std::size_t len, std::size_t cin, std::size_t width) {
  const auto pad = static_cast<long>(width / 2);
  const std::size_t row = width * cin;
#pragma omp parallel for schedule(static) if (len * row >= kParallelThreshold)
  for (std::size_t t = 0; t < len; ++t) {
    double* dst = cols.data() + t * row;
    for (std::size_t q = 0; q < width; ++q) {
      const long src = static_cast<long>(t) + static_cast<long>(q) - pad;
      if (src < 0 || src >= static_cast<long>(len)) {
        std::fill(dst + q * cin, dst + (q + 1) * cin, 0.0);
      } else {
        std::copy_n(x.data() + static_cast<std::size_t>(src) * cin, cin,
                    dst + q * cin);
      }
    }
  }
}

void col2im_add(std::span<const double> cols, std::span<double> dx,
                std::size_t len, std::size_t cin, std::size_t width) {
  const auto pad = static_cast<long>(width / 2);
  const std::size_t row = width * cin;
  // Gather form: each dx row is owned by one iteration.
#pragma omp parallel for schedule(static) if (len * row >= kParallelThreshold)
  for (std::size_t s = 0; s < len; ++s) {
    double* dst = dx.data() + s * cin;
    for (std::size_t q = 0; q < width; ++q) {
      const long t = static_cast<long>(s) - static_cast<long>(q) + pad;
      if (t < 0 || t >= static_cast<long>(len)) continue;
      const double* src = cols.data() + static_cast<std::size_t>(t) * row + q * cin;
      for (std::size_t i = 0; i < cin; ++i) dst[i] += src[i];
    }
  }
}

void conv1d(std::span<const double> x, std::span<const double> w,
            std::span<const double> bias, std::span<double> out,
            std::size_t len, std::size_t cin, std::size_t cout,
            std::size_t width) {
  std::vector<double> cols(len * width * cin);
  im2col(x, cols, len, cin, width);
  for (std::size_t t = 0; t < len; ++t)
    std::copy_n(bias.data(), cout, out.data() + t * cout);
  gemm(cols, w, out, len, width * cin, cout, /*accumulate=*/true);
}

void softmax_rows(std::span<double> x, std::size_t rows, std::size_t cols) {
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelThreshold)
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = x.data() + r * cols;
    const double mx = *std::max_element(row, row + cols);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      row[j] = std::exp(row[j] - mx);
      z += row[j];
    }
    const double inv = 1.0 / z;
    for (std::size_t j = 0; j < cols; ++j) row[j] *= inv;
  }
}

}  // namespace hcfsln::kernels::omp
