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

#include "haloscope/manifest.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "haloscope/error.hpp"
#include "haloscope/tensor_io.hpp"

namespace haloscope {
namespace {

namespace fs = std::filesystem;

class ManifestTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("haloscope_manifest_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  // Writes tensor + generations for n_tensor_rows / n_records and a manifest
  // declaring record_count.
  fs::path write_case(std::uint64_t record_count, std::size_t n_tensor_rows, std::size_t n_records,
                      const std::string& location = "block_output") {
    const auto manifest = dir_ / "split.json";
    write_tensor(Matrix(n_tensor_rows, 4, 0.5), embedding_tensor_path(manifest));
    std::vector<GenerationRecord> records(n_records, {"Q: what? A:", "an answer", {"ref"}, {}});
    write_generations(records, dir_ / "split.gen.jsonl");
    std::ofstream out(manifest);
    out << R"({"dataset_name": "truthfulqa", "model_name": "llama-2-7b", "layer_index": 14,)"
        << R"( "mha_location": ")" << location << R"(", "token_position": "last_token",)"
        << R"( "sampling": "greedy", "record_count": )" << record_count
        << R"(, "generation_file": "split.gen.jsonl", "reference_file": null, "similarity_file": null})";
    return manifest;
  }

  ErrorKind load_error(const fs::path& p) {
    try {
      load_manifest(p);
    } catch (const Error& e) {
      return e.kind();
    }
    ADD_FAILURE() << "load_manifest did not throw";
    return ErrorKind::kIo;
  }

  fs::path dir_;
};

TEST_F(ManifestTest, MatchingRowCountIsValid) {
  const auto m = load_manifest(write_case(512, 512, 512));
  EXPECT_EQ(m.record_count, 512u);
  EXPECT_EQ(m.layer_index, 14);
  EXPECT_EQ(m.mha_location, MhaLocation::kBlockOutput);
  EXPECT_EQ(m.token_position, TokenPosition::kLastToken);
  EXPECT_EQ(m.generation_file, dir_ / "split.gen.jsonl");
  EXPECT_FALSE(m.similarity_file.has_value());
}

TEST_F(ManifestTest, TensorRowMismatchIsRejected) {
  EXPECT_EQ(load_error(write_case(512, 500, 512)), ErrorKind::kRowCountMismatch);
}

TEST_F(ManifestTest, GenerationCountMismatchIsRejected) {
  EXPECT_EQ(load_error(write_case(512, 512, 511)), ErrorKind::kRowCountMismatch);
}

TEST_F(ManifestTest, SimilarityRowMismatchIsRejected) {
  auto m = load_manifest(write_case(8, 8, 8));
  write_tensor(Matrix(7, 1, 0.3), dir_ / "sim.hse");
  m.similarity_file = "sim.hse";
  m.generation_file = "split.gen.jsonl";
  save_manifest(m, dir_ / "split.json");
  EXPECT_EQ(load_error(dir_ / "split.json"), ErrorKind::kRowCountMismatch);
}

TEST_F(ManifestTest, ProjectedAttentionLocationAccepted) {
  const auto m = load_manifest(write_case(4, 4, 4, "attn_projected"));
  EXPECT_EQ(m.mha_location, MhaLocation::kAttnProjected);
  EXPECT_EQ(to_string(m.mha_location), "attn_projected");
}

TEST_F(ManifestTest, UnknownEnumValueRejected) {
  EXPECT_EQ(load_error(write_case(4, 4, 4, "mlp_output")), ErrorKind::kUnknownEnumValue);
  EXPECT_THROW(parse_sampling("top_k"), Error);
  EXPECT_THROW(parse_token_position("first_token"), Error);
}

TEST_F(ManifestTest, UnknownAndMissingFieldsRejected) {
  const std::string base =
      R"({"dataset_name": "d", "model_name": "m", "layer_index": 0, "mha_location": "block_output",
          "token_position": "last_token", "sampling": "beam", "record_count": 3,
          "generation_file": "g.jsonl")";
  EXPECT_NO_THROW(parse_manifest(base + "}"));
  EXPECT_THROW(parse_manifest(base + R"(, "extra": 1})"), Error);
  EXPECT_THROW(parse_manifest(R"({"dataset_name": "d"})"), Error);
  EXPECT_THROW(parse_manifest("not json"), Error);
}

TEST_F(ManifestTest, SaveThenParseIsIdentity) {
  EmbeddingManifest m;
  m.dataset_name = "triviaqa";
  m.model_name = "opt-6.7b";
  m.layer_index = 20;
  m.mha_location = MhaLocation::kAttnOutput;
  m.sampling = Sampling::kMultinomial;
  m.record_count = 12;
  m.generation_file = "gen.jsonl";
  m.similarity_file = "sim.hse";
  EXPECT_EQ(parse_manifest(manifest_to_json(m)), m);
}

TEST_F(ManifestTest, EmbeddingTensorSitsNextToManifest) {
  EXPECT_EQ(embedding_tensor_path("runs/tqa_l14.json"), fs::path("runs/tqa_l14.hse"));
}

TEST_F(ManifestTest, GenerationRecordsRoundTripAndRejectEmptyText) {
  std::vector<GenerationRecord> records = {
      {"Q: Who first started Tesla Motors? A:", "Elon Musk", {"Martin Eberhard", "Marc Tarpenning"}, 0.31},
      {"Q: 2+2? A:", "4", {}, {}}};
  write_generations(records, dir_ / "g.jsonl");
  EXPECT_EQ(read_generations(dir_ / "g.jsonl"), records);

  std::ofstream(dir_ / "bad.jsonl") << R"({"prompt": "", "generation": "x"})" << '\n';
  EXPECT_THROW(read_generations(dir_ / "bad.jsonl"), Error);
}

}  // namespace
}  // namespace haloscope
