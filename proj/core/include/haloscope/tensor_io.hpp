// Copyright 2026 The HaloScope Authors.
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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "haloscope/matrix.hpp"

namespace haloscope {

// HSE1 container layout (all integers little-endian):
//   [0, 4)   magic "HSE1"
//   [4, 8)   u32 version (= 1)
//   [8, 16)  u64 rows
//   [16, 24) u64 cols
//   [24, ..) rows * cols float32 values, row-major
inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr std::size_t kTensorHeaderBytes = 24;

struct Tensor {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<float> data;

  static Tensor from_matrix(const Matrix& m);
  Matrix to_matrix() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const Tensor& tensor, const std::filesystem::path& path);
void write_tensor(const Matrix& matrix, const std::filesystem::path& path);
Tensor read_tensor(const std::filesystem::path& path);
Matrix read_matrix(const std::filesystem::path& path);

// Reads only the 24-byte header; used for cheap shape validation.
std::pair<std::uint64_t, std::uint64_t> read_tensor_shape(const std::filesystem::path& path);

}  // namespace haloscope
