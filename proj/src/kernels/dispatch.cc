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

#include <atomic>
#include <cstdlib>
#include <string>

#include "cidetect/error.h"
#include "kernels/kernels_impl.h"

namespace cidetect::kernels {
namespace {

bool CpuHasAvx2Fma() {
#if defined(CIDETECT_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* Detect() {
  const char* env = std::getenv("CIDETECT_KERNELS");
  const std::string choice = env ? env : "auto";
  if (choice == "scalar") return &ScalarKernels();
  const KernelTable* avx2 = Avx2Kernels();
  if (avx2 != nullptr) return avx2;
  return &ScalarKernels();
}

std::atomic<const KernelTable*>& Slot() {
  static std::atomic<const KernelTable*> slot{Detect()};
  return slot;
}

}  // namespace

const KernelTable* Avx2Kernels() {
#if defined(CIDETECT_HAVE_AVX2_KERNELS)
  static const bool kSupported = CpuHasAvx2Fma();
  return kSupported ? &Avx2KernelTable() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& Active() { return *Slot().load(std::memory_order_acquire); }

Backend ActiveBackend() {
  return &Active() == &ScalarKernels() ? Backend::kScalar : Backend::kAvx2;
}

void SetBackend(Backend backend) {
  const KernelTable* table =
      backend == Backend::kScalar ? &ScalarKernels() : Avx2Kernels();
  if (table == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("kernel backend unavailable: ") +
                    std::string(BackendName(backend)));
  }
  Slot().store(table, std::memory_order_release);
}

std::string_view BackendName(Backend backend) {
  return backend == Backend::kScalar ? "scalar" : "avx2";
}

}  // namespace cidetect::kernels
