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

#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <random>

#include "haloscope/error.hpp"

namespace haloscope {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "haloscope_tensor_io_test";
  fs::create_directories(dir);
  return dir;
}

ErrorKind decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_tensor(bytes);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "decode_tensor did not throw";
  return ErrorKind::kIo;
}

TEST(TensorIo, TwoByTwoLayout) {
  Tensor t{2, 2, {1.0f, 2.0f, 3.0f, 4.0f}};
  const auto bytes = encode_tensor(t);
  ASSERT_EQ(bytes.size(), 24u + 16u);
  EXPECT_EQ(std::memcmp(bytes.data(), "HSE1", 4), 0);
  EXPECT_EQ(bytes[4], 1);  // version, LE
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
  EXPECT_EQ(bytes[8], 2);  // rows
  EXPECT_EQ(bytes[16], 2);  // cols
  // 1.0f = 0x3F800000, little-endian.
  EXPECT_EQ(bytes[24], 0x00);
  EXPECT_EQ(bytes[27], 0x3F);
  EXPECT_EQ(bytes[26], 0x80);
  EXPECT_EQ(decode_tensor(bytes), t);
}

TEST(TensorIo, ZeroPayload) {
  const auto bytes = encode_tensor(Tensor{1, 1, {0.0f}});
  ASSERT_EQ(bytes.size(), 28u);
  for (std::size_t i = 24; i < 28; ++i) EXPECT_EQ(bytes[i], 0);
}

TEST(TensorIo, ReadDeclaredShape) {
  Tensor t{2, 3, {1, 2, 3, 4, 5, 6}};
  const auto path = temp_dir() / "two_by_three.hse";
  write_tensor(t, path);
  EXPECT_EQ(fs::file_size(path), 24u + 24u);
  const Tensor back = read_tensor(path);
  EXPECT_EQ(back.rows, 2u);
  EXPECT_EQ(back.cols, 3u);
  EXPECT_EQ(back, t);
  EXPECT_EQ(read_tensor_shape(path), (std::pair<std::uint64_t, std::uint64_t>{2, 3}));
}

TEST(TensorIo, DistinctErrorKinds) {
  auto good = encode_tensor(Tensor{2, 3, {1, 2, 3, 4, 5, 6}});

  auto truncated = good;
  truncated.pop_back();  // 23 payload bytes for a declared 2x3
  EXPECT_EQ(decode_error(truncated), ErrorKind::kTruncatedPayload);

  auto too_long = good;
  too_long.push_back(0);
  EXPECT_EQ(decode_error(too_long), ErrorKind::kTruncatedPayload);

  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_EQ(decode_error(bad_magic), ErrorKind::kBadMagic);

  auto bad_version = good;
  bad_version[4] = 2;
  EXPECT_EQ(decode_error(bad_version), ErrorKind::kVersionMismatch);

  auto nan = good;
  // 0x7FC00000 little-endian in the second element.
  nan[28] = 0x00;
  nan[29] = 0x00;
  nan[30] = 0xC0;
  nan[31] = 0x7F;
  EXPECT_EQ(decode_error(nan), ErrorKind::kNonFinite);

  auto inf = good;
  inf[28] = 0x00;
  inf[29] = 0x00;
  inf[30] = 0x80;
  inf[31] = 0x7F;
  EXPECT_EQ(decode_error(inf), ErrorKind::kNonFinite);

  EXPECT_EQ(decode_error({'H', 'S', 'E', '1', 1, 0}), ErrorKind::kTruncatedPayload);
}

TEST(TensorIo, RejectsEmptyShapeAndNonFiniteOnWrite) {
  EXPECT_THROW(encode_tensor(Tensor{0, 3, {}}), Error);
  try {
    encode_tensor(Tensor{1, 2, {1.0f, std::numeric_limits<float>::infinity()}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonFinite);
  }
  // A double too large for float32 overflows to Inf and is refused.
  EXPECT_THROW(write_tensor(Matrix(1, 1, 1e300), temp_dir() / "overflow.hse"), Error);
}

TEST(TensorIo, MissingFileIsIoError) {
  try {
    read_tensor(temp_dir() / "does_not_exist.hse");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

// read(write(m)) is bit-identical for any finite float32 payload.
TEST(TensorIo, RoundTripProperty) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::uint32_t> bits;
  std::uniform_int_distribution<int> dim(1, 9);
  const auto path = temp_dir() / "roundtrip.hse";
  for (int trial = 0; trial < 100; ++trial) {
    Tensor t;
    t.rows = trial == 0 ? 3 : static_cast<std::uint64_t>(dim(rng));
    t.cols = trial == 0 ? 8 : static_cast<std::uint64_t>(dim(rng));
    for (std::uint64_t i = 0; i < t.rows * t.cols; ++i) {
      float v;
      do {
        v = std::bit_cast<float>(bits(rng));  // includes subnormals and -0
      } while (!std::isfinite(v));
      t.data.push_back(v);
    }
    write_tensor(t, path);
    const Tensor back = read_tensor(path);
    ASSERT_EQ(back.rows, t.rows);
    ASSERT_EQ(back.cols, t.cols);
    ASSERT_EQ(std::memcmp(back.data.data(), t.data.data(), t.data.size() * 4), 0) << "trial " << trial;
  }
}

TEST(TensorIo, MatrixConversionKeepsFloatValues) {
  Matrix m(2, 2, {1.0, 2.0, 3.0, 4.0});
  const auto path = temp_dir() / "matrix.hse";
  write_tensor(m, path);
  EXPECT_EQ(read_matrix(path), m);
}

}  // namespace
}  // namespace haloscope
