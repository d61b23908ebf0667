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

#pragma once

#include <cstdint>
#include <span>
#include <string_view>

// Dense/sparse arithmetic kernels used by the classifier inner loops.
// Scalar reference implementations are always available; AVX2 variants are
// selected at runtime when the CPU supports them. SIMD reductions reorder
// floating-point sums, so results may differ from the scalar path in the
// last ulps; equivalence is tested under a relative tolerance.

namespace eocrc::kernels {

enum class Backend { Scalar, Avx2 };

// Backend currently in use.
Backend active_backend();

// Forces a backend; returns false (and leaves the dispatch unchanged) if the
// CPU cannot run it. Intended for equivalence tests.
bool set_backend(Backend b);

std::string_view backend_name(Backend b);

// sum_i a[i] * b[i]; sizes must match.
double dot(std::span<const double> a, std::span<const double> b);

// y[i] += alpha * x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y);

double sum(std::span<const double> a);

// sum_i (a[i] - b[i])^2
double squared_distance(std::span<const double> a, std::span<const double> b);

// sum_k values[k] * dense[indices[k]]; the gather pattern behind sparse-row
// scoring against a dense weight or query vector.
double sparse_dot(std::span<const uint32_t> indices, std::span<const double> values,
                  std::span<const double> dense);

namespace detail {
// Scalar reference kernels, exposed so tests can pin expected values
// independently of the dispatch table.
double dot_scalar(const double* a, const double* b, size_t n);
void axpy_scalar(double alpha, const double* x, double* y, size_t n);
double sum_scalar(const double* a, size_t n);
double squared_distance_scalar(const double* a, const double* b, size_t n);
double sparse_dot_scalar(const uint32_t* idx, const double* val, size_t n,
                         const double* dense);
}  // namespace detail

}  // namespace eocrc::kernels
