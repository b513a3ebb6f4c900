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

#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "haloscope/error.hpp"
#include "haloscope/tensor_io.hpp"
#include "json.hpp"

namespace haloscope {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::array<std::string_view, 3> kLocationNames = {"block_output", "attn_output",
                                                            "attn_projected"};
constexpr std::array<std::string_view, 3> kSamplingNames = {"greedy", "beam", "multinomial"};

const std::set<std::string> kManifestFields = {
    "dataset_name", "model_name",      "layer_index",    "mha_location",
    "token_position", "sampling",      "record_count",   "generation_file",
    "reference_file", "similarity_file"};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute() || base.empty()) return path;
  return base / path;
}

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::kInvalidArgument, std::string("manifest missing field ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("manifest field ") + key + ": " + e.what());
  }
}

std::size_t count_nonblank_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) ++n;
  }
  return n;
}

void expect_rows(const fs::path& file, std::uint64_t rows, std::uint64_t expected) {
  if (rows != expected) {
    throw Error(ErrorKind::kRowCountMismatch, file.string() + " has " + std::to_string(rows) +
                                                  " rows, manifest declares record_count=" +
                                                  std::to_string(expected));
  }
}

}  // namespace

std::string_view to_string(MhaLocation v) { return kLocationNames[static_cast<int>(v)]; }
std::string_view to_string(TokenPosition) { return "last_token"; }
std::string_view to_string(Sampling v) { return kSamplingNames[static_cast<int>(v)]; }

MhaLocation parse_mha_location(std::string_view s) {
  for (std::size_t i = 0; i < kLocationNames.size(); ++i) {
    if (kLocationNames[i] == s) return static_cast<MhaLocation>(i);
  }
  throw Error(ErrorKind::kUnknownEnumValue, "mha_location \"" + std::string(s) + "\"");
}

TokenPosition parse_token_position(std::string_view s) {
  if (s == "last_token") return TokenPosition::kLastToken;
  throw Error(ErrorKind::kUnknownEnumValue, "token_position \"" + std::string(s) + "\"");
}

Sampling parse_sampling(std::string_view s) {
  for (std::size_t i = 0; i < kSamplingNames.size(); ++i) {
    if (kSamplingNames[i] == s) return static_cast<Sampling>(i);
  }
  throw Error(ErrorKind::kUnknownEnumValue, "sampling \"" + std::string(s) + "\"");
}

fs::path embedding_tensor_path(const fs::path& manifest_path) {
  fs::path p = manifest_path;
  p.replace_extension(".hse");
  return p;
}

EmbeddingManifest parse_manifest(std::string_view json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kInvalidArgument, "manifest must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kManifestFields.contains(key)) {
      throw Error(ErrorKind::kInvalidArgument, "unknown manifest field " + key);
    }
  }

  EmbeddingManifest m;
  m.dataset_name = required<std::string>(j, "dataset_name");
  m.model_name = required<std::string>(j, "model_name");
  m.layer_index = required<int>(j, "layer_index");
  if (m.layer_index < 0) {
    throw Error(ErrorKind::kOutOfRange, "layer_index must be >= 0");
  }
  m.mha_location = parse_mha_location(required<std::string>(j, "mha_location"));
  m.token_position = parse_token_position(required<std::string>(j, "token_position"));
  m.sampling = parse_sampling(required<std::string>(j, "sampling"));
  m.record_count = required<std::uint64_t>(j, "record_count");
  if (m.record_count == 0) throw Error(ErrorKind::kOutOfRange, "record_count must be >= 1");
  m.generation_file = resolve(base_dir, required<std::string>(j, "generation_file"));
  if (j.contains("reference_file") && !j["reference_file"].is_null()) {
    m.reference_file = resolve(base_dir, required<std::string>(j, "reference_file"));
  }
  if (j.contains("similarity_file") && !j["similarity_file"].is_null()) {
    m.similarity_file = resolve(base_dir, required<std::string>(j, "similarity_file"));
  }
  return m;
}

std::string manifest_to_json(const EmbeddingManifest& m) {
  json j = json::object();
  j["dataset_name"] = m.dataset_name;
  j["model_name"] = m.model_name;
  j["layer_index"] = m.layer_index;
  j["mha_location"] = to_string(m.mha_location);
  j["token_position"] = to_string(m.token_position);
  j["sampling"] = to_string(m.sampling);
  j["record_count"] = m.record_count;
  j["generation_file"] = m.generation_file.generic_string();
  j["reference_file"] = m.reference_file ? json(m.reference_file->generic_string()) : json(nullptr);
  j["similarity_file"] =
      m.similarity_file ? json(m.similarity_file->generic_string()) : json(nullptr);
  return j.dump(2);
}

EmbeddingManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  EmbeddingManifest m = parse_manifest(buffer.str(), path.parent_path());

  const fs::path tensor = embedding_tensor_path(path);
  expect_rows(tensor, read_tensor_shape(tensor).first, m.record_count);
  expect_rows(m.generation_file, count_nonblank_lines(m.generation_file), m.record_count);
  if (m.reference_file) {
    expect_rows(*m.reference_file, count_nonblank_lines(*m.reference_file), m.record_count);
  }
  if (m.similarity_file) {
    expect_rows(*m.similarity_file, read_tensor_shape(*m.similarity_file).first, m.record_count);
  }
  return m;
}

void save_manifest(const EmbeddingManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out << manifest_to_json(manifest) << '\n';
}

std::vector<GenerationRecord> read_generations(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<GenerationRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      GenerationRecord r;
      r.prompt = j.at("prompt").get<std::string>();
      r.generation = j.at("generation").get<std::string>();
      if (j.contains("references")) r.references = j["references"].get<std::vector<std::string>>();
      if (j.contains("similarity") && !j["similarity"].is_null()) {
        r.similarity = j["similarity"].get<double>();
      }
      if (r.prompt.empty() || r.generation.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "empty prompt or generation");
      }
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kInvalidArgument,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_generations(const std::vector<GenerationRecord>& records, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  for (const auto& r : records) {
    json j = {{"prompt", r.prompt}, {"generation", r.generation}, {"references", r.references}};
    if (r.similarity) j["similarity"] = *r.similarity;
    out << j.dump() << '\n';
  }
}

std::vector<std::vector<std::string>> read_references(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::vector<std::string>> refs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      refs.push_back(json::parse(line).get<std::vector<std::string>>());
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kInvalidArgument, path.string() + ": " + e.what());
    }
  }
  return refs;
}

}  // namespace haloscope
