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

// Tab-separated debug tables. Lines starting with '#' are comments;
// addresses are hexadecimal with a 0x prefix.
//
//   addr2line: binary_id  address  file  line
//   binfuncs:  binary_id  func_name  addr_start  addr_end   ([start, end))
//   srcfuncs:  file  func_name  line_start  line_end        (inclusive)
//   fcg:       caller_id  callee_id

#ifndef CIDETECT_TABLES_H_
#define CIDETECT_TABLES_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cidetect {

struct Addr2LineRow {
  std::string binary_id;
  std::uint64_t address = 0;
  std::string file;
  std::uint32_t line = 0;

  friend bool operator==(const Addr2LineRow&, const Addr2LineRow&) = default;
};

struct BinFuncRow {
  std::string binary_id;
  std::string func_name;
  std::uint64_t addr_start = 0;
  std::uint64_t addr_end = 0;  // exclusive

  friend bool operator==(const BinFuncRow&, const BinFuncRow&) = default;
};

struct SrcFuncRow {
  std::string file;
  std::string func_name;
  std::uint32_t line_start = 0;
  std::uint32_t line_end = 0;  // inclusive

  friend bool operator==(const SrcFuncRow&, const SrcFuncRow&) = default;
};

struct FcgRow {
  std::string caller;
  std::string callee;

  friend bool operator==(const FcgRow&, const FcgRow&) = default;
};

std::vector<Addr2LineRow> ReadAddr2Line(const std::filesystem::path& path);
std::vector<BinFuncRow> ReadBinFuncs(const std::filesystem::path& path);
std::vector<SrcFuncRow> ReadSrcFuncs(const std::filesystem::path& path);
std::vector<FcgRow> ReadFcg(const std::filesystem::path& path);

void WriteAddr2Line(const std::filesystem::path& path,
                    std::span<const Addr2LineRow> rows);
void WriteBinFuncs(const std::filesystem::path& path,
                   std::span<const BinFuncRow> rows);
void WriteSrcFuncs(const std::filesystem::path& path,
                   std::span<const SrcFuncRow> rows);
void WriteFcg(const std::filesystem::path& path, std::span<const FcgRow> rows);

std::string FormatHex(std::uint64_t value);
// Accepts "0x"-prefixed hex only. Throws Error(kParse).
std::uint64_t ParseHex(std::string_view text);

}  // namespace cidetect

#endif  // CIDETECT_TABLES_H_
