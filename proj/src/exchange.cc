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

#include "cidetect/exchange.h"

#include <fstream>
#include <sstream>

#include "cidetect/error.h"
#include "json.hpp"

namespace cidetect {
namespace {

using nlohmann::json;

template <typename T>
T Field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::kParse, std::string("missing field '") + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse,
                std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace

RawFunction ParseFunctionLine(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  if (!obj.is_object()) throw Error(ErrorCode::kParse, "record is not an object");

  RawFunction fn;
  fn.name = Field<std::string>(obj, "name");
  fn.entry = Field<NodeId>(obj, "entry");
  for (const json& b : Field<json>(obj, "blocks")) {
    BasicBlock block;
    block.id = Field<NodeId>(b, "id");
    for (const json& i : Field<json>(b, "insns")) {
      Instruction insn;
      insn.address = Field<std::uint64_t>(i, "addr");
      insn.opcode = Field<std::string>(i, "op");
      if (i.contains("args")) {
        insn.operands = Field<std::vector<std::string>>(i, "args");
      }
      block.instructions.push_back(std::move(insn));
    }
    fn.blocks.push_back(std::move(block));
  }
  for (const json& e : Field<json>(obj, "edges")) {
    if (!e.is_array() || e.size() != 2) {
      throw Error(ErrorCode::kParse, "edge must be a [src, dst] pair");
    }
    try {
      fn.edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::kParse, std::string("bad edge: ") + ex.what());
    }
  }
  return fn;
}

std::string FunctionToJsonLine(const RawFunction& fn) {
  // nlohmann sorts object keys, which is what makes the output canonical.
  json blocks = json::array();
  for (const BasicBlock& b : fn.blocks) {
    json insns = json::array();
    for (const Instruction& i : b.instructions) {
      insns.push_back({{"addr", i.address}, {"op", i.opcode}, {"args", i.operands}});
    }
    blocks.push_back({{"id", b.id}, {"insns", std::move(insns)}});
  }
  json edges = json::array();
  for (const Edge& e : fn.edges) edges.push_back({e.first, e.second});
  json obj = {{"name", fn.name},
              {"entry", fn.entry},
              {"blocks", std::move(blocks)},
              {"edges", std::move(edges)}};
  return obj.dump();
}

std::string FunctionToJsonLine(const AttributedCfg& cfg) {
  return FunctionToJsonLine(ToRaw(cfg));
}

std::vector<RawFunction> ReadFunctionsJsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<RawFunction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(ParseFunctionLine(line));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) +
                                ": " + e.what());
    }
  }
  return out;
}

std::vector<AttributedCfg> ReadAcfgsJsonl(const std::filesystem::path& path) {
  std::vector<AttributedCfg> out;
  for (RawFunction& fn : ReadFunctionsJsonl(path)) {
    out.push_back(BuildAcfg(std::move(fn)));
  }
  return out;
}

void WriteFunctionsJsonl(const std::filesystem::path& path,
                         std::span<const AttributedCfg> cfgs) {
  std::string text;
  for (const AttributedCfg& cfg : cfgs) {
    text += FunctionToJsonLine(cfg);
    text += '\n';
  }
  WriteTextFile(path, text);
}

OpcodeVocabulary ReadVocabulary(const std::filesystem::path& path) {
  std::istringstream in(ReadTextFile(path));
  std::vector<std::string> keys;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) keys.push_back(line);
  }
  return OpcodeVocabulary(std::move(keys));
}

void WriteVocabulary(const std::filesystem::path& path,
                     const OpcodeVocabulary& vocab) {
  std::string text;
  for (const std::string& k : vocab.key_sequence()) {
    text += k;
    text += '\n';
  }
  WriteTextFile(path, text);
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace cidetect
