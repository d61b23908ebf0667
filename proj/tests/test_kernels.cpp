/*
 * Copyright 2026 The eocrc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <cmath>
#include <vector>

#include "eocrc/core.hpp"
#include "eocrc/kernels.hpp"

namespace k = eocrc::kernels;

namespace {

std::vector<double> random_vec(eocrc::Rng& rng, size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-10.0, 10.0);
  return v;
}

bool close(double a, double b, double rel = 1e-10) {
  return std::abs(a - b) <= rel * (1.0 + std::abs(a) + std::abs(b));
}

// Sizes around the 4/8-lane boundaries plus large.
const size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 13, 16, 31, 64, 67, 255, 1024};

}  // namespace

TEST_CASE("scalar kernels match hand values") {
  const double a[] = {1, 2, 3};
  const double b[] = {4, 5, 6};
  CHECK(k::detail::dot_scalar(a, b, 3) == 32.0);
  CHECK(k::detail::sum_scalar(a, 3) == 6.0);
  CHECK(k::detail::squared_distance_scalar(a, b, 3) == 27.0);
  const uint32_t idx[] = {0, 2};
  const double val[] = {2.0, 10.0};
  CHECK(k::detail::sparse_dot_scalar(idx, val, 2, b) == 2 * 4 + 10 * 6);
  double y[] = {1, 1, 1};
  k::detail::axpy_scalar(2.0, a, y, 3);
  CHECK(y[0] == 3.0);
  CHECK(y[2] == 7.0);
}

TEST_CASE("simd backend matches scalar reference on every kernel") {
  const bool have_simd = k::set_backend(k::Backend::Avx2);
  if (!have_simd) {
    MESSAGE("AVX2 unavailable; dispatch check degenerates to scalar==scalar");
  }
  eocrc::Rng rng(20260810);

  for (size_t n : kSizes) {
    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);

    k::set_backend(k::Backend::Scalar);
    const double dot_ref = k::dot(a, b);
    const double sum_ref = k::sum(a);
    const double sqd_ref = k::squared_distance(a, b);

    if (have_simd) k::set_backend(k::Backend::Avx2);
    CHECK(close(k::dot(a, b), dot_ref));
    CHECK(close(k::sum(a), sum_ref));
    CHECK(close(k::squared_distance(a, b), sqd_ref));

    // axpy; FMA contraction differs from mul+add in the last ulp
    auto y_ref = b;
    k::detail::axpy_scalar(1.5, a.data(), y_ref.data(), n);
    auto y = b;
    k::axpy(1.5, a, y);
    for (size_t i = 0; i < n; ++i) CHECK(close(y[i], y_ref[i], 1e-14));

    // sparse gather: every other index
    std::vector<uint32_t> idx;
    std::vector<double> val;
    for (size_t i = 0; i < n; i += 2) {
      idx.push_back(static_cast<uint32_t>(i));
      val.push_back(rng.uniform(-2, 2));
    }
    const double sp_ref = k::detail::sparse_dot_scalar(idx.data(), val.data(), idx.size(), a.data());
    CHECK(close(k::sparse_dot(idx, val, a), sp_ref));
  }
  // Restore the best backend for the rest of the suite.
  k::set_backend(k::Backend::Avx2);
}

TEST_CASE("backend forcing reports support") {
  CHECK(k::set_backend(k::Backend::Scalar));
  CHECK(k::active_backend() == k::Backend::Scalar);
  if (k::set_backend(k::Backend::Avx2)) {
    CHECK(k::active_backend() == k::Backend::Avx2);
    CHECK(k::backend_name(k::active_backend()) == "avx2");
  }
}
