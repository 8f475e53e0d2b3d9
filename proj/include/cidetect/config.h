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

// Flat key=value configuration files and typed value parsing.
//
//   # comment
//   n_projects = 20
//   update_hidden = 64,64
//
// Later keys override earlier ones; surrounding whitespace is ignored.

#ifndef CIDETECT_CONFIG_H_
#define CIDETECT_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cidetect/gnn.h"

namespace cidetect {

using KeyValues = std::map<std::string, std::string, std::less<>>;

// Throws Error(kParse) for lines without '=' or with an empty key.
KeyValues ParseKeyValues(std::string_view text);
KeyValues ReadKeyValues(const std::filesystem::path& path);

// All of these throw Error(kInvalidArgument) naming `key`.
std::uint64_t ParseUnsigned(std::string_view key, std::string_view value);
double ParseReal(std::string_view key, std::string_view value);
bool ParseFlag(std::string_view key, std::string_view value);
// Comma-separated list of unsigned values; empty text is an empty list.
std::vector<std::size_t> ParseSizeList(std::string_view key,
                                       std::string_view value);

// Model hyperparameters: node_state_dim, graph_embedding_dim,
// propagation_layers, encoder_hidden, update_hidden, output_hidden, margin,
// learning_rate, batch_size, max_nodes. Returns false for other keys.
bool ApplyModelOption(ModelConfig& config, std::string_view key,
                      std::string_view value);

}  // namespace cidetect

#endif  // CIDETECT_CONFIG_H_
