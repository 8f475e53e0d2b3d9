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

// Dense double-precision kernels used by the graph model. Each kernel has a
// scalar reference version and, on x86-64, an AVX2+FMA version. The active
// table is picked once at startup from the CPU features; CIDETECT_KERNELS
// ("scalar", "avx2" or "auto") overrides the choice.
//
// All matrices are row-major and densely packed.

#ifndef CIDETECT_KERNELS_H_
#define CIDETECT_KERNELS_H_

#include <cstddef>
#include <string_view>

namespace cidetect::kernels {

struct KernelTable {
  const char* name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);

  // y[n x m] = x[n x k] * w[m x k]^T
  void (*matmul_nt)(const double* x, const double* w, double* y, std::size_t n,
                    std::size_t k, std::size_t m);
  // dx[n x k] += dy[n x m] * w[m x k]
  void (*matmul_nn_acc)(const double* dy, const double* w, double* dx,
                        std::size_t n, std::size_t m, std::size_t k);
  // dw[m x k] += dy[n x m]^T * x[n x k]
  void (*matmul_tn_acc)(const double* dy, const double* x, double* dw,
                        std::size_t n, std::size_t m, std::size_t k);
};

enum class Backend { kScalar, kAvx2 };

const KernelTable& ScalarKernels();
// nullptr when the AVX2 variant is not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* Avx2Kernels();

const KernelTable& Active();
Backend ActiveBackend();
// Throws Error(kInvalidArgument) if the backend is unavailable.
void SetBackend(Backend backend);
std::string_view BackendName(Backend backend);

}  // namespace cidetect::kernels

#endif  // CIDETECT_KERNELS_H_
