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

#ifndef BLINKSCOPE_TENSOR_FILE_H_
#define BLINKSCOPE_TENSOR_FILE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace blinkscope {

// Binary container for weights and video features.
//
// Layout (all integers little-endian):
//   magic    8 bytes  "BLSCTNSR"
//   version  u32      currently 1
//   n_meta   u32      then n_meta x { u32 len, key bytes, u32 len, value bytes }
//   n_arrays u32      then n_arrays x {
//                       u32 len, name bytes,
//                       u32 ndim, ndim x u64 dims,
//                       prod(dims) x f64 payload, row-major }
inline constexpr char kTensorFileMagic[] = "BLSCTNSR";
inline constexpr std::uint32_t kTensorFileVersion = 1;

struct NamedArray {
  std::string name;
  std::vector<std::int64_t> shape;
  std::vector<double> values;

  std::int64_t NumElements() const;
};

struct TensorFile {
  std::uint32_t version = kTensorFileVersion;
  std::map<std::string, std::string> metadata;
  std::vector<NamedArray> arrays;

  const NamedArray* Find(std::string_view name) const;
  // Throws DataError if the array is missing or its shape differs.
  const NamedArray& Require(std::string_view name,
                            const std::vector<std::int64_t>& shape) const;
  const std::string& RequireMeta(std::string_view key) const;
};

std::string EncodeTensorFile(const TensorFile& file);
// `origin` prefixes error paths (usually the file name).
TensorFile DecodeTensorFile(std::string_view bytes,
                            const std::string& origin = "<memory>");

void WriteTensorFile(const std::filesystem::path& path, const TensorFile& file);
TensorFile ReadTensorFile(const std::filesystem::path& path);

}  // namespace blinkscope

#endif  // BLINKSCOPE_TENSOR_FILE_H_
