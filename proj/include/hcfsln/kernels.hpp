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

#ifndef HCFSLN_KERNELS_HPP_
#define HCFSLN_KERNELS_HPP_

#include <cstddef>
#include <span>

// Dense row-major kernels behind the tensor primitives.
//
// Two implementations share one signature set: `serial` is the plain
// reference (naive loops, no threading) kept for tests and benchmarks,
// `omp` is the tiled OpenMP version the tensor engine calls. Every
// output element of the OpenMP kernels is produced by exactly one thread
// with a fixed accumulation order, so results do not depend on the
// thread count.

namespace hcfsln::kernels {

namespace serial {

// C[m,n] (+)= A[m,k] * B[k,n]
void gemm(std::span<const double> a, std::span<const double> b,
          std::span<double> c, std::size_t m, std::size_t k, std::size_t n,
          bool accumulate = false);
// C[m,n] (+)= A[k,m]^T * B[k,n]
void gemm_tn(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate = false);
// C[m,n] (+)= A[m,k] * B[n,k]^T
void gemm_nt(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate = false);

// Same-padded 1-D convolution. x: [len, cin], w: [width, cin, cout],
// bias: [cout], out: [len, cout].
void conv1d(std::span<const double> x, std::span<const double> w,
            std::span<const double> bias, std::span<double> out,
            std::size_t len, std::size_t cin, std::size_t cout,
            std::size_t width);

// Row-wise softmax of a [rows, cols] block, in place.
void softmax_rows(std::span<double> x, std::size_t rows, std::size_t cols);

}  // namespace serial

namespace omp {

void gemm(std::span<const double> a, std::span<const double> b,
          std::span<double> c, std::size_t m, std::size_t k, std::size_t n,
          bool accumulate = false);
void gemm_tn(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate = false);
void gemm_nt(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate = false);

void conv1d(std::span<const double> x, std::span<const double> w,
            std::span<const double> bias, std::span<double> out,
            std::size_t len, std::size_t cin, std::size_t cout,
            std::size_t width);

void softmax_rows(std::span<double> x, std::size_t rows, std::size_t cols);

// im2col for same-padded convolution: cols is [len, width*cin].
void im2col(std::span<const double> x, std::span<double> cols,
            std::size_t len, std::size_t cin, std::size_t width);
// Adjoint of im2col, accumulating into dx.
void col2im_add(std::span<const double> cols, std::span<double> dx,
                std::size_t len, std::size_t cin, std::size_t width);

void transpose(std::span<const double> a, std::span<double> out,
               std::size_t rows, std::size_t cols);

}  // namespace omp

// Work below this many multiply-adds stays on the calling thread.
inline constexpr std::size_t kParallelThreshold = 1 << 15;

}  // namespace hcfsln::kernels

#endif  // HCFSLN_KERNELS_HPP_
