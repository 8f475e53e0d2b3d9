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

#include <immintrin.h>

#include "kernels/kernels_impl.h"

namespace cidetect::kernels {
namespace {

inline double HorizontalSum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double Dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void Axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double SquaredDistance(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = HorizontalSum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Four output columns per pass so each load of an x row feeds four FMAs.
void MatmulNt(const double* x, const double* w, double* y, std::size_t n,
              std::size_t k, std::size_t m) {
  const std::size_t k4 = k & ~std::size_t{3};
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = x + r * k;
    double* yr = y + r * m;
    std::size_t o = 0;
    for (; o + 4 <= m; o += 4) {
      const double* w0 = w + (o + 0) * k;
      const double* w1 = w + (o + 1) * k;
      const double* w2 = w + (o + 2) * k;
      const double* w3 = w + (o + 3) * k;
      __m256d a0 = _mm256_setzero_pd();
      __m256d a1 = _mm256_setzero_pd();
      __m256d a2 = _mm256_setzero_pd();
      __m256d a3 = _mm256_setzero_pd();
      for (std::size_t i = 0; i < k4; i += 4) {
        const __m256d xv = _mm256_loadu_pd(xr + i);
        a0 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(w0 + i), a0);
        a1 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(w1 + i), a1);
        a2 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(w2 + i), a2);
        a3 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(w3 + i), a3);
      }
      double s0 = HorizontalSum(a0);
      double s1 = HorizontalSum(a1);
      double s2 = HorizontalSum(a2);
      double s3 = HorizontalSum(a3);
      for (std::size_t i = k4; i < k; ++i) {
        s0 += xr[i] * w0[i];
        s1 += xr[i] * w1[i];
        s2 += xr[i] * w2[i];
        s3 += xr[i] * w3[i];
      }
      yr[o] = s0;
      yr[o + 1] = s1;
      yr[o + 2] = s2;
      yr[o + 3] = s3;
    }
    for (; o < m; ++o) yr[o] = Dot(xr, w + o * k, k);
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

const KernelTable& Avx2KernelTable() {
  static const KernelTable kTable = {
      "avx2",    Dot,         Axpy,        SquaredDistance,
      MatmulNt,  MatmulNnAcc, MatmulTnAcc,
  };
  return kTable;
}

}  // namespace cidetect::kernels
