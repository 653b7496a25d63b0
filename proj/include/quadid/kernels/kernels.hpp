/*
 Copyright 2026 The quadid Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Data-parallel inner loops used by the signal, library and metric code.
// Every kernel has a scalar reference implementation; an AVX2/FMA variant is
// selected at runtime when the CPU supports it. Setting QUADID_FORCE_SCALAR=1
// in the environment pins the scalar path.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace quadid::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

struct Table {
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// out[i] = sum_j w[j] * x[i + j] for i in [0, n - wlen]
  void (*correlate)(const double* x, std::size_t n, const double* w, std::size_t wlen, double* out);
  /// out[i] = a[i] * b[i]; out may alias a or b
  void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// sum_i (a[i] - b[i])^2
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  /// sum_i |a[i] - b[i]|
  double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
};

const Table& scalar_table();
/// nullptr when the AVX2 translation unit was not built.
const Table* avx2_table();

/// Best ISA supported by both the build and the running CPU.
Isa detected_isa();
Isa active_isa();
/// Overrides the dispatch choice; requesting an unavailable ISA falls back to scalar.
void set_active_isa(Isa isa);
const Table& table(Isa isa);
const Table& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void correlate(std::span<const double> x, std::span<const double> w, std::span<double> out) {
  active().correlate(x.data(), x.size(), w.data(), w.size(), out.data());
}

inline void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  active().multiply(a.data(), b.data(), out.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  return active().sum_sq_diff(a.data(), b.data(), a.size());
}

inline double sum_abs_diff(std::span<const double> a, std::span<const double> b) {
  return active().sum_abs_diff(a.data(), b.data(), a.size());
}

}  // namespace quadid::kernels
