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

// Internal hooks between the per-ISA kernel translation units.

#ifndef CIDETECT_SRC_KERNELS_KERNELS_IMPL_H_
#define CIDETECT_SRC_KERNELS_KERNELS_IMPL_H_

#include "cidetect/kernels.h"

namespace cidetect::kernels {

#if defined(CIDETECT_HAVE_AVX2_KERNELS)
// Defined in kernels_avx2.cc, which is the only file built with -mavx2.
const KernelTable& Avx2KernelTable();
#endif

}  // namespace cidetect::kernels

#endif  // CIDETECT_SRC_KERNELS_KERNELS_IMPL_H_
