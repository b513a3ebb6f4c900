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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "haloscope/matrix.hpp"

namespace haloscope {

// Capture point inside a transformer block: the block output f, the raw
// self-attention output Attn(f), or the projected attention Q * Attn(f).
enum class MhaLocation { kBlockOutput, kAttnOutput, kAttnProjected };
enum class TokenPosition { kLastToken };
enum class Sampling { kGreedy, kBeam, kMultinomial };

std::string_view to_string(MhaLocation v);
std::string_view to_string(TokenPosition v);
std::string_view to_string(Sampling v);
MhaLocation parse_mha_location(std::string_view s);
TokenPosition parse_token_position(std::string_view s);
Sampling parse_sampling(std::string_view s);

// JSON sidecar describing one embedding tensor. The tensor itself lives next
// to the manifest with the extension replaced by ".hse"
// (runs/truthfulqa_l14.json -> runs/truthfulqa_l14.hse).
//
// Relative paths are resolved against the manifest's directory on load.
struct EmbeddingManifest {
  std::string dataset_name;
  std::string model_name;
  int layer_index = 0;
  MhaLocation mha_location = MhaLocation::kBlockOutput;
  TokenPosition token_position = TokenPosition::kLastToken;
  Sampling sampling = Sampling::kGreedy;
  std::uint64_t record_count = 0;
  std::filesystem::path generation_file;
  std::optional<std::filesystem::path> reference_file;
  // HSE1 tensor of shape record_count x R: similarity of each generation to
  // each of its R reference answers.
  std::optional<std::filesystem::path> similarity_file;

  friend bool operator==(const EmbeddingManifest&, const EmbeddingManifest&) = default;
};

std::filesystem::path embedding_tensor_path(const std::filesystem::path& manifest_path);

// Parses manifest JSON text. Relative paths are joined onto base_dir. Does not
// touch referenced files.
EmbeddingManifest parse_manifest(std::string_view json_text,
                                 const std::filesystem::path& base_dir = {});
std::string manifest_to_json(const EmbeddingManifest& manifest);

// Parses and then checks every referenced file's row count against
// record_count. Throws Error(kRowCountMismatch) on the first inconsistency.
EmbeddingManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const EmbeddingManifest& manifest, const std::filesystem::path& path);

struct GenerationRecord {
  std::string prompt;
  std::string generation;
  std::vector<std::string> references;
  std::optional<double> similarity;

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

// JSON Lines, one record per line.
std::vector<GenerationRecord> read_generations(const std::filesystem::path& path);
void write_generations(const std::vector<GenerationRecord>& records,
                       const std::filesystem::path& path);

// reference_file: JSON Lines, one array of reference strings per record.
std::vector<std::vector<std::string>> read_references(const std::filesystem::path& path);

}  // namespace haloscope
