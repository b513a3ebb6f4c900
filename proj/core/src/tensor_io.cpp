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

#include "haloscope/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "haloscope/error.hpp"

namespace haloscope {
namespace {

constexpr char kMagic[4] = {'H', 'S', 'E', '1'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(bytes[offset + i]) << (8 * i);
  }
  return value;
}

void check_shape(std::uint64_t rows, std::uint64_t cols) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorKind::kShapeMismatch,
                "tensor must have rows >= 1 and cols >= 1, got " + std::to_string(rows) +
                    "x" + std::to_string(cols));
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Tensor Tensor::from_matrix(const Matrix& m) {
  Tensor t{m.rows(), m.cols(), std::vector<float>(m.rows() * m.cols())};
  auto src = m.data();
  for (std::size_t i = 0; i < src.size(); ++i) t.data[i] = static_cast<float>(src[i]);
  return t;
}

Matrix Tensor::to_matrix() const {
  std::vector<double> values(data.begin(), data.end());
  return Matrix(rows, cols, std::move(values));
}

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor) {
  check_shape(tensor.rows, tensor.cols);
  if (tensor.data.size() != tensor.rows * tensor.cols) {
    throw Error(ErrorKind::kShapeMismatch, "tensor payload size does not match shape");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kTensorHeaderBytes + tensor.data.size() * 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kTensorVersion);
  put_le<std::uint64_t>(out, tensor.rows);
  put_le<std::uint64_t>(out, tensor.cols);
  for (std::size_t i = 0; i < tensor.data.size(); ++i) {
    const float v = tensor.data[i];
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kNonFinite, "non-finite element at flat index " + std::to_string(i));
    }
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::kBadMagic, "missing HSE1 magic");
  }
  if (bytes.size() < kTensorHeaderBytes) {
    throw Error(ErrorKind::kTruncatedPayload, "header shorter than 24 bytes");
  }
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kTensorVersion) {
    throw Error(ErrorKind::kVersionMismatch, "unsupported HSE1 version " + std::to_string(version));
  }
  Tensor t;
  t.rows = get_le<std::uint64_t>(bytes, 8);
  t.cols = get_le<std::uint64_t>(bytes, 16);
  check_shape(t.rows, t.cols);
  const std::uint64_t count = t.rows * t.cols;
  if (count / t.rows != t.cols || count > (bytes.size() - kTensorHeaderBytes) / 4 ||
      bytes.size() - kTensorHeaderBytes != count * 4) {
    throw Error(ErrorKind::kTruncatedPayload,
                "payload is " + std::to_string(bytes.size() - kTensorHeaderBytes) +
                    " bytes, declared shape " + std::to_string(t.rows) + "x" +
                    std::to_string(t.cols) + " needs " + std::to_string(count * 4));
  }
  t.data.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const float v =
        std::bit_cast<float>(get_le<std::uint32_t>(bytes, kTensorHeaderBytes + 4 * i));
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kNonFinite,
                  std::string(std::isnan(v) ? "NaN" : "Inf") + " at row " +
                      std::to_string(i / t.cols) + ", col " + std::to_string(i % t.cols));
    }
    t.data[i] = v;
  }
  return t;
}

void write_tensor(const Tensor& tensor, const std::filesystem::path& path) {
  const auto bytes = encode_tensor(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

void write_tensor(const Matrix& matrix, const std::filesystem::path& path) {
  write_tensor(Tensor::from_matrix(matrix), path);
}

Tensor read_tensor(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_tensor(bytes);
}

Matrix read_matrix(const std::filesystem::path& path) { return read_tensor(path).to_matrix(); }

std::pair<std::uint64_t, std::uint64_t> read_tensor_shape(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::uint8_t header[kTensorHeaderBytes];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  const auto got = static_cast<std::size_t>(in.gcount());
  std::span<const std::uint8_t> bytes(header, got);
  if (got < 4 || std::memcmp(header, kMagic, 4) != 0) {
    throw Error(ErrorKind::kBadMagic, "missing HSE1 magic in " + path.string());
  }
  if (got < kTensorHeaderBytes) {
    throw Error(ErrorKind::kTruncatedPayload, "header shorter than 24 bytes in " + path.string());
  }
  if (get_le<std::uint32_t>(bytes, 4) != kTensorVersion) {
    throw Error(ErrorKind::kVersionMismatch, "unsupported HSE1 version in " + path.string());
  }
  return {get_le<std::uint64_t>(bytes, 8), get_le<std::uint64_t>(bytes, 16)};
}

}  // namespace haloscope
