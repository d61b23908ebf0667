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

#include "eocrc/kernels.hpp"

#include <cassert>

namespace eocrc::kernels {

namespace detail {

double dot_scalar(const double* a, const double* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_scalar(const double* a, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double squared_distance_scalar(const double* a, const double* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double sparse_dot_scalar(const uint32_t* idx, const double* val, size_t n,
                         const double* dense) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += val[i] * dense[idx[i]];
  return acc;
}

}  // namespace detail

#if defined(EOCRC_HAVE_AVX2) && (defined(__x86_64__) || defined(_M_X64))
namespace avx2 {
double dot(const double* a, const double* b, size_t n);
void axpy(double alpha, const double* x, double* y, size_t n);
double sum(const double* a, size_t n);
double squared_distance(const double* a, const double* b, size_t n);
double sparse_dot(const uint32_t* idx, const double* val, size_t n, const double* dense);
}  // namespace avx2

static bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}
#else
static bool cpu_has_avx2() { return false; }
#endif

namespace {

struct Dispatch {
  double (*dot)(const double*, const double*, size_t);
  void (*axpy)(double, const double*, double*, size_t);
  double (*sum)(const double*, size_t);
  double (*squared_distance)(const double*, const double*, size_t);
  double (*sparse_dot)(const uint32_t*, const double*, size_t, const double*);
};

constexpr Dispatch kScalar = {detail::dot_scalar, detail::axpy_scalar, detail::sum_scalar,
                              detail::squared_distance_scalar, detail::sparse_dot_scalar};

#if defined(EOCRC_HAVE_AVX2) && (defined(__x86_64__) || defined(_M_X64))
constexpr Dispatch kAvx2 = {avx2::dot, avx2::axpy, avx2::sum, avx2::squared_distance,
                            avx2::sparse_dot};
#endif

struct State {
  Backend backend;
  Dispatch table;
  State() {
#if defined(EOCRC_HAVE_AVX2) && (defined(__x86_64__) || defined(_M_X64))
    if (cpu_has_avx2()) {
      backend = Backend::Avx2;
      table = kAvx2;
      return;
    }
#endif
    backend = Backend::Scalar;
    table = kScalar;
  }
};

State& state() {
  static State s;
  return s;
}

}  // namespace

Backend active_backend() { return state().backend; }

bool set_backend(Backend b) {
  if (b == Backend::Scalar) {
    state().backend = Backend::Scalar;
    state().table = kScalar;
    return true;
  }
#if defined(EOCRC_HAVE_AVX2) && (defined(__x86_64__) || defined(_M_X64))
  if (cpu_has_avx2()) {
    state().backend = Backend::Avx2;
    state().table = kAvx2;
    return true;
  }
#endif
  return false;
}

std::string_view backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return state().table.dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  state().table.axpy(alpha, x.data(), y.data(), x.size());
}

double sum(std::span<const double> a) { return state().table.sum(a.data(), a.size()); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return state().table.squared_distance(a.data(), b.data(), a.size());
}

double sparse_dot(std::span<const uint32_t> indices, std::span<const double> values,
                  std::span<const double> dense) {
  assert(indices.size() == values.size());
  return state().table.sparse_dot(indices.data(), values.data(), indices.size(),
                                  dense.data());
}

}  // namespace eocrc::kernels
