// Copyright 2026 The cidetect Authors.
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

#include "kernels/kernels_impl.h"

namespace cidetect::kernels {
namespace {

double Dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void Axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double SquaredDistance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void MatmulNt(const double* x, const double* w, double* y, std::size_t n,
              std::size_t k, std::size_t m) {
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t o = 0; o < m; ++o) y[r * m + o] = Dot(x + r * k, w + o * k, k);
  }
}

void MatmulNnAcc(const double* dy, const double* w, double* dx, std::size_t n,
                 std::size_t m, std::size_t k) {
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t o = 0; o < m; ++o) {
      const double g = dy[r * m + o];
      if (g != 0.0) Axpy(g, w + o * k, dx + r * k, k);
    }
  }
}

void MatmulTnAcc(const double* dy, const double* x, double* dw, std::size_t n,
                 std::size_t m, std::size_t k) {
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t o = 0; o < m; ++o) {
      const double g = dy[r * m + o];
      if (g != 0.0) Axpy(g, x + r * k, dw + o * k, k);
    }
  }
}

}  // namespace

const KernelTable& ScalarKernels() {
  static const KernelTable kTable = {
      "scalar",  Dot,         Axpy,        SquaredDistance,
      MatmulNt,  MatmulNnAcc, MatmulTnAcc,
  };
  return kTable;
}

}  // namespace cidetect::kernels
