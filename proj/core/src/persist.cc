// Copyright 2026 The uqwiz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "uqwiz/persist.h"

#include <unistd.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "uqwiz/errors.h"

namespace uqwiz {
namespace {

static_assert(std::endian::native == std::endian::little,
              "the .uwm codec assumes a little-endian host");

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const std::byte*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  std::vector<std::byte>& bytes() { return bytes_; }

 private:
  std::vector<std::byte> bytes_;
};

class Reader {
 public:
  Reader(std::span<const std::byte> bytes, std::size_t offset) : bytes_(bytes), offset_(offset) {}

  template <typename T>
  T take(const char* what) {
    if (bytes_.size() - offset_ < sizeof(T)) {
      throw TruncatedFileError(std::string("model file truncated while reading ") + what +
                               " at byte " + std::to_string(offset_));
    }
    T value;
    std::memcpy(&value, bytes_.data() + offset_, sizeof(T));
    offset_ += sizeof(T);
    return value;
  }

  std::size_t offset() const { return offset_; }

 private:
  std::span<const std::byte> bytes_;
  std::size_t offset_;
};

constexpr std::size_t kTrailerSize = sizeof(std::uint64_t);

}  // namespace

std::uint64_t fnv1a64(std::span<const std::byte> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::byte> serialize_model(const SequentialModel& model) {
  Writer w;
  for (char c : kModelMagic) w.put(static_cast<std::uint8_t>(c));
  w.put(static_cast<std::uint32_t>(model.num_layers()));
  for (const auto& layer : model.layers()) {
    w.put(static_cast<std::uint8_t>(layer.kind));
    if (layer.kind == LayerKind::kDense) {
      w.put(static_cast<std::uint32_t>(layer.in_dim));
      w.put(static_cast<std::uint32_t>(layer.out_dim));
    } else if (layer.kind == LayerKind::kDropout) {
      w.put(layer.rate);
    }
  }
  for (const auto& layer : model.layers()) {
    if (layer.kind != LayerKind::kDense) continue;
    for (double v : layer.weights.values()) w.put(v);
    for (double v : layer.biases) w.put(v);
  }
  auto& bytes = w.bytes();
  const std::uint64_t checksum =
      fnv1a64(std::span<const std::byte>(bytes).subspan(sizeof(kModelMagic)));
  w.put(checksum);
  return std::move(bytes);
}

SequentialModel deserialize_model(std::span<const std::byte> bytes, std::uint64_t seed) {
  if (bytes.size() < sizeof(kModelMagic) + sizeof(std::uint32_t) + kTrailerSize) {
    throw TruncatedFileError("model file truncated: " + std::to_string(bytes.size()) + " bytes");
  }
  if (std::memcmp(bytes.data(), kModelMagic, sizeof(kModelMagic)) != 0) {
    throw FormatError("not a model file: bad magic");
  }

  // Structure is parsed before the checksum is compared so that a short
  // file reports truncation rather than a checksum mismatch.
  const auto body = bytes.first(bytes.size() - kTrailerSize);
  Reader r(body, sizeof(kModelMagic));
  const auto count = r.take<std::uint32_t>("layer count");
  std::vector<LayerSpec> layers;
  layers.reserve(std::min<std::uint32_t>(count, 1024));
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto tag = r.take<std::uint8_t>("layer tag");
    switch (tag) {
      case 0: {
        const auto in = r.take<std::uint32_t>("dense in_dim");
        const auto out = r.take<std::uint32_t>("dense out_dim");
        layers.push_back(LayerSpec::dense(in, out));
        break;
      }
      case 1: layers.push_back(LayerSpec::relu()); break;
      case 2: layers.push_back(LayerSpec::softmax()); break;
      case 3: layers.push_back(LayerSpec::dropout(r.take<double>("dropout rate"))); break;
      default:
        throw UnknownTagError("unknown layer tag " + std::to_string(tag) + " for layer " +
                              std::to_string(i));
    }
  }
  std::uint64_t payload_values = 0;
  for (const auto& layer : layers) {
    if (layer.kind == LayerKind::kDense) {
      payload_values += std::uint64_t{layer.in_dim} * layer.out_dim + layer.out_dim;
    }
  }
  const std::uint64_t available = body.size() - r.offset();
  if (payload_values > available / sizeof(double)) {
    throw TruncatedFileError("model file truncated: header declares " +
                             std::to_string(payload_values) + " parameters, " +
                             std::to_string(available) + " payload bytes present");
  }
  for (auto& layer : layers) {
    if (layer.kind != LayerKind::kDense) continue;
    layer.weights = Matrix(layer.out_dim, layer.in_dim);
    for (double& v : layer.weights.values()) v = r.take<double>("dense weights");
    layer.biases.resize(layer.out_dim);
    for (double& v : layer.biases) v = r.take<double>("dense biases");
  }
  if (r.offset() != body.size()) {
    throw FormatError("model file has " + std::to_string(body.size() - r.offset()) +
                      " bytes beyond the declared payload");
  }

  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof(stored));
  if (fnv1a64(body.subspan(sizeof(kModelMagic))) != stored) {
    throw ChecksumError("model file checksum mismatch");
  }

  try {
    return build_sequential(std::move(layers), seed);
  } catch (const ConstructionError& e) {
    throw FormatError(std::string("model file describes an invalid network: ") + e.what());
  }
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw IoError("cannot read " + path.string());
  }
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move model into place at " + path.string());
  }
}

void save_model(const SequentialModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

SequentialModel load_model(const std::filesystem::path& path, std::uint64_t seed) {
  return deserialize_model(read_file(path), seed);
}

}  // namespace uqwiz
