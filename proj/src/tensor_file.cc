/* Copyright 2026 The Blinkscope Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "blinkscope/tensor_file.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "blinkscope/errors.h"

namespace blinkscope {

namespace {

constexpr std::size_t kMagicSize = 8;
// Guards against absurd allocations from corrupt headers.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;
constexpr std::uint32_t kMaxDims = 8;

void PutU32(std::string* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU64(std::string* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutString(std::string* out, const std::string& s) {
  PutU32(out, static_cast<std::uint32_t>(s.size()));
  out->append(s);
}

class Reader {
 public:
  Reader(std::string_view bytes, const std::string& origin)
      : bytes_(bytes), origin_(origin) {}

  std::uint64_t ReadUint(int width, const char* what) {
    Need(width, what);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += width;
    return v;
  }

  std::string ReadString(const char* what) {
    const auto len = ReadUint(4, what);
    Need(len, what);
    std::string s(bytes_.substr(pos_, len));
    pos_ += len;
    return s;
  }

  double ReadDouble() {
    return std::bit_cast<double>(ReadUint(8, "payload"));
  }

  std::string_view Raw(std::size_t n, const char* what) {
    Need(n, what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool AtEnd() const { return pos_ == bytes_.size(); }

  [[noreturn]] void Fail(const std::string& what) const {
    throw DataError(origin_ + "@" + std::to_string(pos_), what);
  }

 private:
  void Need(std::uint64_t n, const char* what) const {
    if (n > bytes_.size() - pos_) {
      Fail(std::string("truncated while reading ") + what);
    }
  }

  std::string_view bytes_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

std::string ShapeString(const std::vector<std::int64_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << "]";
  return os.str();
}

}  // namespace

std::int64_t NamedArray::NumElements() const {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

const NamedArray* TensorFile::Find(std::string_view name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const NamedArray& TensorFile::Require(
    std::string_view name, const std::vector<std::int64_t>& shape) const {
  const NamedArray* a = Find(name);
  if (a == nullptr) {
    throw DataError(std::string(name), "missing array");
  }
  if (a->shape != shape) {
    throw DataError(std::string(name), "shape " + ShapeString(a->shape) +
                                           ", expected " + ShapeString(shape));
  }
  return *a;
}

const std::string& TensorFile::RequireMeta(std::string_view key) const {
  auto it = metadata.find(std::string(key));
  if (it == metadata.end()) {
    throw DataError("meta." + std::string(key), "missing metadata entry");
  }
  return it->second;
}

std::string EncodeTensorFile(const TensorFile& file) {
  std::string out(kTensorFileMagic, kMagicSize);
  PutU32(&out, file.version);
  PutU32(&out, static_cast<std::uint32_t>(file.metadata.size()));
  for (const auto& [k, v] : file.metadata) {
    PutString(&out, k);
    PutString(&out, v);
  }
  PutU32(&out, static_cast<std::uint32_t>(file.arrays.size()));
  for (const auto& a : file.arrays) {
    if (a.NumElements() != static_cast<std::int64_t>(a.values.size())) {
      throw InvariantError("array '" + a.name + "' payload does not match shape");
    }
    PutString(&out, a.name);
    PutU32(&out, static_cast<std::uint32_t>(a.shape.size()));
    for (auto d : a.shape) PutU64(&out, static_cast<std::uint64_t>(d));
    for (double v : a.values) PutU64(&out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

TensorFile DecodeTensorFile(std::string_view bytes, const std::string& origin) {
  Reader r(bytes, origin);
  if (r.Raw(kMagicSize, "magic") != std::string_view(kTensorFileMagic, kMagicSize)) {
    throw DataError(origin, "not a tensor container (bad magic)");
  }
  TensorFile file;
  file.version = static_cast<std::uint32_t>(r.ReadUint(4, "version"));
  if (file.version != kTensorFileVersion) {
    r.Fail("unsupported version " + std::to_string(file.version));
  }
  const auto n_meta = r.ReadUint(4, "metadata count");
  for (std::uint64_t i = 0; i < n_meta; ++i) {
    std::string key = r.ReadString("metadata key");
    file.metadata[key] = r.ReadString("metadata value");
  }
  const auto n_arrays = r.ReadUint(4, "array count");
  for (std::uint64_t i = 0; i < n_arrays; ++i) {
    NamedArray a;
    a.name = r.ReadString("array name");
    const auto ndim = r.ReadUint(4, "rank");
    if (ndim > kMaxDims) r.Fail("array '" + a.name + "' has rank > 8");
    std::uint64_t count = 1;
    for (std::uint64_t d = 0; d < ndim; ++d) {
      const auto dim = r.ReadUint(8, "dimension");
      count *= dim;
      if (dim > kMaxElements || count > kMaxElements) {
        r.Fail("array '" + a.name + "' is implausibly large");
      }
      a.shape.push_back(static_cast<std::int64_t>(dim));
    }
    a.values.resize(count);
    for (auto& v : a.values) v = r.ReadDouble();
    file.arrays.push_back(std::move(a));
  }
  if (!r.AtEnd()) r.Fail("trailing bytes after last array");
  return file;
}

void WriteTensorFile(const std::filesystem::path& path, const TensorFile& file) {
  const std::string bytes = EncodeTensorFile(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string(), "cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(path.string(), "write failed");
}

TensorFile ReadTensorFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string(), "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return DecodeTensorFile(ss.str(), path.string());
}

}  // namespace blinkscope
