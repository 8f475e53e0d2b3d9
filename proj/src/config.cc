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

#include "cidetect/config.h"

#include <charconv>
#include <cmath>

#include "cidetect/error.h"
#include "cidetect/exchange.h"

namespace cidetect {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void BadValue(std::string_view key, std::string_view value,
                           std::string_view expected) {
  throw Error(ErrorCode::kInvalidArgument,
              std::string(key) + ": expected " + std::string(expected) +
                  ", got '" + std::string(value) + "'");
}

}  // namespace

KeyValues ParseKeyValues(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = Trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || Trim(line.substr(0, eq)).empty()) {
      throw Error(ErrorCode::kParse,
                  "config line " + std::to_string(line_no) + ": expected key = value");
    }
    out.insert_or_assign(std::string(Trim(line.substr(0, eq))),
                         std::string(Trim(line.substr(eq + 1))));
  }
  return out;
}

KeyValues ReadKeyValues(const std::filesystem::path& path) {
  return ParseKeyValues(ReadTextFile(path));
}

std::uint64_t ParseUnsigned(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    BadValue(key, value, "an unsigned integer");
  }
  return out;
}

double ParseReal(std::string_view key, std::string_view value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty() ||
      !std::isfinite(out)) {
    BadValue(key, value, "a finite number");
  }
  return out;
}

bool ParseFlag(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  BadValue(key, value, "true or false");
}

std::vector<std::size_t> ParseSizeList(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  value = Trim(value);
  while (!value.empty()) {
    const auto comma = value.find(',');
    out.push_back(ParseUnsigned(key, Trim(value.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    value = value.substr(comma + 1);
  }
  return out;
}

bool ApplyModelOption(ModelConfig& config, std::string_view key,
                      std::string_view value) {
  if (key == "node_state_dim") {
    config.node_state_dim = ParseUnsigned(key, value);
  } else if (key == "graph_embedding_dim") {
    config.graph_embedding_dim = ParseUnsigned(key, value);
  } else if (key == "propagation_layers") {
    config.propagation_layers = ParseUnsigned(key, value);
  } else if (key == "encoder_hidden") {
    config.encoder_hidden = ParseSizeList(key, value);
  } else if (key == "update_hidden") {
    config.update_hidden = ParseSizeList(key, value);
  } else if (key == "output_hidden") {
    config.output_hidden = ParseSizeList(key, value);
  } else if (key == "margin") {
    config.margin = ParseReal(key, value);
  } else if (key == "learning_rate") {
    config.learning_rate = ParseReal(key, value);
  } else if (key == "batch_size") {
    config.batch_size = ParseUnsigned(key, value);
  } else if (key == "max_nodes") {
    config.max_nodes = ParseUnsigned(key, value);
  } else {
    return false;
  }
  return true;
}

}  // namespace cidetect
