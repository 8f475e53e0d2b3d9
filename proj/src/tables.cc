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

#include "cidetect/tables.h"

#include <charconv>
#include <sstream>

#include "cidetect/error.h"
#include "cidetect/exchange.h"

namespace cidetect {
namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

// Calls `row_fn(fields, lineno)` for every data line with exactly `arity`
// fields.
template <typename Fn>
void ForEachRow(const std::filesystem::path& path, std::size_t arity,
                Fn&& row_fn) {
  std::istringstream in(ReadTextFile(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = SplitTabs(line);
    if (fields.size() != arity) {
      throw Error(ErrorCode::kParse,
                  path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(arity) + " fields, got " +
                      std::to_string(fields.size()));
    }
    try {
      row_fn(fields);
    } catch (const Error& e) {
      throw Error(e.code(),
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::uint32_t ParseLine(const std::string& text) {
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kParse, "bad line number '" + text + "'");
  }
  return value;
}

}  // namespace

std::string FormatHex(std::uint64_t value) {
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, 16);
  return "0x" + std::string(buf, ptr);
}

std::uint64_t ParseHex(std::string_view text) {
  if (text.size() < 3 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) {
    throw Error(ErrorCode::kParse, "address '" + std::string(text) +
                                       "' lacks 0x prefix");
  }
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data() + 2, text.data() + text.size(),
                                   value, 16);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kParse, "bad address '" + std::string(text) + "'");
  }
  return value;
}

std::vector<Addr2LineRow> ReadAddr2Line(const std::filesystem::path& path) {
  std::vector<Addr2LineRow> rows;
  ForEachRow(path, 4, [&](const std::vector<std::string>& f) {
    rows.push_back({f[0], ParseHex(f[1]), f[2], ParseLine(f[3])});
  });
  return rows;
}

std::vector<BinFuncRow> ReadBinFuncs(const std::filesystem::path& path) {
  std::vector<BinFuncRow> rows;
  ForEachRow(path, 4, [&](const std::vector<std::string>& f) {
    rows.push_back({f[0], f[1], ParseHex(f[2]), ParseHex(f[3])});
  });
  return rows;
}

std::vector<SrcFuncRow> ReadSrcFuncs(const std::filesystem::path& path) {
  std::vector<SrcFuncRow> rows;
  ForEachRow(path, 4, [&](const std::vector<std::string>& f) {
    rows.push_back({f[0], f[1], ParseLine(f[2]), ParseLine(f[3])});
  });
  return rows;
}

std::vector<FcgRow> ReadFcg(const std::filesystem::path& path) {
  std::vector<FcgRow> rows;
  ForEachRow(path, 2, [&](const std::vector<std::string>& f) {
    rows.push_back({f[0], f[1]});
  });
  return rows;
}

void WriteAddr2Line(const std::filesystem::path& path,
                    std::span<const Addr2LineRow> rows) {
  std::string text = "# binary_id\taddress\tfile\tline\n";
  for (const Addr2LineRow& r : rows) {
    text += r.binary_id + '\t' + FormatHex(r.address) + '\t' + r.file + '\t' +
            std::to_string(r.line) + '\n';
  }
  WriteTextFile(path, text);
}

void WriteBinFuncs(const std::filesystem::path& path,
                   std::span<const BinFuncRow> rows) {
  std::string text = "# binary_id\tfunc_name\taddr_start\taddr_end\n";
  for (const BinFuncRow& r : rows) {
    text += r.binary_id + '\t' + r.func_name + '\t' + FormatHex(r.addr_start) +
            '\t' + FormatHex(r.addr_end) + '\n';
  }
  WriteTextFile(path, text);
}

void WriteSrcFuncs(const std::filesystem::path& path,
                   std::span<const SrcFuncRow> rows) {
  std::string text = "# file\tfunc_name\tline_start\tline_end\n";
  for (const SrcFuncRow& r : rows) {
    text += r.file + '\t' + r.func_name + '\t' + std::to_string(r.line_start) +
            '\t' + std::to_string(r.line_end) + '\n';
  }
  WriteTextFile(path, text);
}

void WriteFcg(const std::filesystem::path& path, std::span<const FcgRow> rows) {
  std::string text = "# caller_id\tcallee_id\n";
  for (const FcgRow& r : rows) text += r.caller + '\t' + r.callee + '\n';
  WriteTextFile(path, text);
}

}  // namespace cidetect
