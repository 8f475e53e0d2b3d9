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

#include "cidetect/checkpoint.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <map>

#include "cidetect/error.h"
#include "cidetect/exchange.h"

namespace cidetect {
namespace {

constexpr char kMagic[8] = {'C', 'I', 'D', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void PutLittle(std::string& out, T value) {
  auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bits.begin(), bits.end());
  }
  out.append(reinterpret_cast<const char*>(bits.data()), bits.size());
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    std::array<unsigned char, sizeof(T)> bits;
    std::memcpy(bits.data(), Take(sizeof(T)).data(), sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(bits.begin(), bits.end());
    }
    return std::bit_cast<T>(bits);
  }

  std::string_view Take(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kParse, "checkpoint truncated");
    }
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string SerializeCheckpoint(const ModelConfig& config,
                                const ModelParams& params) {
  std::string out(kMagic, sizeof(kMagic));
  PutLittle<std::uint32_t>(out, kCheckpointVersion);
  const std::string cfg = ModelConfigToJson(config);
  PutLittle<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.size()));
  out += cfg;
  std::uint32_t count = 0;
  params.ForEachTensor([&](const std::string&, std::span<const double>,
                           std::size_t, std::size_t) { ++count; });
  PutLittle<std::uint32_t>(out, count);
  params.ForEachTensor([&](const std::string& name, std::span<const double> v,
                           std::size_t rows, std::size_t cols) {
    PutLittle<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    PutLittle<std::uint32_t>(out, 2);
    PutLittle<std::uint64_t>(out, rows);
    PutLittle<std::uint64_t>(out, cols);
    for (double x : v) PutLittle<double>(out, x);
  });
  return out;
}

Checkpoint ParseCheckpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.Take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw Error(ErrorCode::kParse, "not a checkpoint (bad magic)");
  }
  const auto version = r.Get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kParse,
                "unsupported checkpoint version " + std::to_string(version));
  }
  const auto cfg_len = r.Get<std::uint32_t>();
  Checkpoint ckpt;
  ckpt.config = ModelConfigFromJson(r.Take(cfg_len));
  // Shapes come from the config; values are filled in by name below.
  ckpt.params = InitParams(ckpt.config);

  std::map<std::string, std::pair<std::vector<std::uint64_t>, std::vector<double>>>
      tensors;
  const auto count = r.Get<std::uint32_t>();
  for (std::uint32_t t = 0; t < count; ++t) {
    const auto name_len = r.Get<std::uint32_t>();
    std::string name(r.Take(name_len));
    const auto ndims = r.Get<std::uint32_t>();
    std::vector<std::uint64_t> dims(ndims);
    std::uint64_t total = 1;
    for (auto& d : dims) {
      d = r.Get<std::uint64_t>();
      total *= d;
    }
    if (total > bytes.size()) throw Error(ErrorCode::kParse, "checkpoint truncated");
    std::vector<double> values(total);
    for (double& v : values) v = r.Get<double>();
    tensors[name] = {std::move(dims), std::move(values)};
  }
  if (!r.done()) throw Error(ErrorCode::kParse, "trailing bytes in checkpoint");

  std::size_t used = 0;
  ckpt.params.ForEachTensor([&](const std::string& name, std::span<double> v,
                                std::size_t rows, std::size_t cols) {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
      throw Error(ErrorCode::kParse, "checkpoint lacks tensor " + name);
    }
    const auto& [dims, values] = it->second;
    if (dims != std::vector<std::uint64_t>{rows, cols}) {
      throw Error(ErrorCode::kParse, "tensor " + name + " has wrong shape");
    }
    std::copy(values.begin(), values.end(), v.begin());
    ++used;
  });
  if (used != tensors.size()) {
    throw Error(ErrorCode::kParse, "checkpoint has unexpected tensors");
  }
  return ckpt;
}

std::string TensorManifest(const ModelParams& params) {
  std::string out;
  params.ForEachTensor([&](const std::string& name, std::span<const double>,
                           std::size_t rows, std::size_t cols) {
    out += name + '\t' + std::to_string(rows) + 'x' + std::to_string(cols) + '\n';
  });
  return out;
}

void SaveCheckpoint(const std::filesystem::path& path, const ModelConfig& config,
                    const ModelParams& params) {
  WriteTextFile(path, SerializeCheckpoint(config, params));
  WriteTextFile(path.string() + ".manifest.txt", TensorManifest(params));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return ParseCheckpoint(ReadTextFile(path));
}

}  // namespace cidetect
