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

// Function-graph exchange format: one JSON object per line,
//   {"name": str, "entry": int,
//    "blocks": [{"id": int, "insns": [{"addr": int, "op": str,
//                                      "args": [str]}]}],
//    "edges": [[int, int]]}
// UTF-8, LF-terminated.

#ifndef CIDETECT_EXCHANGE_H_
#define CIDETECT_EXCHANGE_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cidetect/acfg.h"

namespace cidetect {

// Throws Error(kParse) on malformed JSON or missing fields.
RawFunction ParseFunctionLine(std::string_view line);

// Single line, no trailing newline. Key order is fixed so identical graphs
// serialize to identical bytes.
std::string FunctionToJsonLine(const RawFunction& fn);
std::string FunctionToJsonLine(const AttributedCfg& cfg);

std::vector<RawFunction> ReadFunctionsJsonl(const std::filesystem::path& path);
// Parses and validates each record.
std::vector<AttributedCfg> ReadAcfgsJsonl(const std::filesystem::path& path);
void WriteFunctionsJsonl(const std::filesystem::path& path,
                         std::span<const AttributedCfg> cfgs);

// Vocabulary file: one token per line, in key-sequence order.
OpcodeVocabulary ReadVocabulary(const std::filesystem::path& path);
void WriteVocabulary(const std::filesystem::path& path,
                     const OpcodeVocabulary& vocab);

// Whole-file helpers shared by the other file formats.
std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

}  // namespace cidetect

#endif  // CIDETECT_EXCHANGE_H_
