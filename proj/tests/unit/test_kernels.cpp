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

#include <doctest.h>
#include <omp.h>

#include <random>
#include <vector>

#include "hcfsln/kernels.hpp"

namespace k = hcfsln::kernels;

namespace {

std::vector<double> rand_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b,
                 double tol = 1e-12) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(tol));
}

struct Dims {
  std::size_t m, k, n;
};

}  // namespace

TEST_CASE("omp gemm variants agree with the serial reference") {
  const Dims dims[] = {{1, 1, 1}, {3, 5, 7}, {4, 8, 16}, {17, 9, 33},
                       {120, 8, 120}, {120, 120, 8}, {64, 64, 64}, {5, 0, 3}};
  for (const auto& d : dims) {
    CAPTURE(d.m);
    CAPTURE(d.k);
    CAPTURE(d.n);
    for (bool acc : {false, true}) {
      const auto a = rand_vec(d.m * d.k, 1);
      const auto b = rand_vec(d.k * d.n, 2);
      const auto c0 = rand_vec(d.m * d.n, 3);
      auto cs = c0, co = c0;
      k::serial::gemm(a, b, cs, d.m, d.k, d.n, acc);
      k::omp::gemm(a, b, co, d.m, d.k, d.n, acc);
      check_close(cs, co);

      // A stored [k, m], B stored [n, k].
      const auto at = rand_vec(d.k * d.m, 4);
      cs = c0;
      co = c0;
      k::serial::gemm_tn(at, b, cs, d.m, d.k, d.n, acc);
      k::omp::gemm_tn(at, b, co, d.m, d.k, d.n, acc);
      check_close(cs, co);

      const auto bt = rand_vec(d.n * d.k, 5);
      cs = c0;
      co = c0;
      k::serial::gemm_nt(a, bt, cs, d.m, d.k, d.n, acc);
      k::omp::gemm_nt(a, bt, co, d.m, d.k, d.n, acc);
      check_close(cs, co);
    }
  }
}

TEST_CASE("serial gemm matches a hand computed product") {
  const std::vector<double> a{1, 2, 3, 4, 5, 6};  // [2,3]
  const std::vector<double> b{7, 8, 9, 10, 11, 12};  // [3,2]
  std::vector<double> c(4);
  k::serial::gemm(a, b, c, 2, 3, 2);
  CHECK(c == std::vector<double>{58, 64, 139, 154});
}

TEST_CASE("conv1d omp matches serial for both kernel widths") {
  for (std::size_t width : {1u, 3u, 5u}) {
    for (std::size_t len : {5u, 8u, 120u}) {
      const std::size_t cin = 3, cout = 7;
      const auto x = rand_vec(len * cin, 6);
      const auto w = rand_vec(width * cin * cout, 7);
      const auto bias = rand_vec(cout, 8);
      std::vector<double> s(len * cout), o(len * cout);
      k::serial::conv1d(x, w, bias, s, len, cin, cout, width);
      k::omp::conv1d(x, w, bias, o, len, cin, cout, width);
      check_close(s, o);
    }
  }
}

TEST_CASE("conv1d uses same padding") {
  // Width 3, one channel, weights [1, 1, 1]: moving sum with zero ends.
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> w{1, 1, 1};
  const std::vector<double> bias{0.5};
  std::vector<double> out(4);
  k::serial::conv1d(x, w, bias, out, 4, 1, 1, 3);
  CHECK(out == std::vector<double>{3.5, 6.5, 9.5, 7.5});
}

TEST_CASE("col2im_add is the adjoint of im2col") {
  const std::size_t len = 9, cin = 2, width = 5;
  const auto x = rand_vec(len * cin, 9);
  const auto y = rand_vec(len * width * cin, 10);
  std::vector<double> cols(len * width * cin);
  k::omp::im2col(x, cols, len, cin, width);
  std::vector<double> back(len * cin, 0.0);
  k::omp::col2im_add(y, back, len, cin, width);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < cols.size(); ++i) lhs += cols[i] * y[i];
  for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * back[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("softmax_rows omp matches serial and rows sum to one") {
  const std::size_t rows = 37, cols = 120;
  auto s = rand_vec(rows * cols, 11);
  for (auto& v : s) v *= 30.0;
  auto o = s;
  k::serial::softmax_rows(s, rows, cols);
  k::omp::softmax_rows(o, rows, cols);
  check_close(s, o);
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += o[r * cols + c];
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("omp kernels are bit-identical across thread counts") {
  const std::size_t m = 96, kk = 80, n = 72;
  const auto a = rand_vec(m * kk, 12);
  const auto b = rand_vec(kk * n, 13);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  std::vector<double> one(m * n);
  k::omp::gemm(a, b, one, m, kk, n);
  omp_set_num_threads(4);
  std::vector<double> four(m * n);
  k::omp::gemm(a, b, four, m, kk, n);
  omp_set_num_threads(saved);
  CHECK(one == four);
}

TEST_CASE("transpose") {
  const std::vector<double> a{1, 2, 3, 4, 5, 6};
  std::vector<double> t(6);
  k::omp::transpose(a, t, 2, 3);
  CHECK(t == std::vector<double>{1, 4, 2, 5, 3, 6});
}
