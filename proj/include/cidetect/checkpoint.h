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

// Binary checkpoint container (all integers little-endian):
//
//   magic        8 bytes  "CIDCKPT\0"
//   version      u32      = 1
//   config_len   u32      followed by the model config as JSON
//   tensor_count u32
//   per tensor:  u32 name_len, name bytes, u32 ndims, u64 dims[ndims],
//                f64 values[prod(dims)]
//
// A text manifest ("<name>\t<d0>x<d1>" per line) accompanies each
// checkpoint so tensor layouts can be diffed across implementations.

#ifndef CIDETECT_CHECKPOINT_H_
#define CIDETECT_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "cidetect/gnn.h"

namespace cidetect {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
};

std::string SerializeCheckpoint(const ModelConfig& config,
                                const ModelParams& params);
// Throws Error(kParse) on a bad magic, version, truncation or tensor layout
// that does not match the embedded config.
Checkpoint ParseCheckpoint(std::string_view bytes);

std::string TensorManifest(const ModelParams& params);

// Writes `path` and `path` + ".manifest.txt".
void SaveCheckpoint(const std::filesystem::path& path, const ModelConfig& config,
                    const ModelParams& params);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// 64-bit FNV-1a, used for config fingerprints in manifests.
std::uint64_t Fnv1a64(std::string_view bytes);

}  // namespace cidetect

#endif  // CIDETECT_CHECKPOINT_H_
