#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "igam/info_amount.hpp"
#include "igam/loss.hpp"
#include "igam/planner.hpp"
#include "igam/stats.hpp"
#include "igam/toy.hpp"

namespace igam::io {

using nlohmann::json;

// Binary embedding layout (all little-endian):
//   "IGAMEMB1" | u32 dim | u64 count | count x (u32 category, dim x f32)
inline constexpr char kEmbeddingMagic[8] = {'I', 'G', 'A', 'M', 'E', 'M', 'B', '1'};

enum class EmbeddingFormat { kAuto, kBinary, kCsv };

EmbeddingFormat embedding_format_from_string(const std::string& name);

std::vector<EmbeddingRecord> read_embeddings(const std::filesystem::path& path,
                                             EmbeddingFormat format = EmbeddingFormat::kAuto);
std::vector<EmbeddingRecord> parse_embeddings_binary(const std::string& bytes);
std::vector<EmbeddingRecord> parse_embeddings_csv(const std::string& text);

std::string encode_embeddings_binary(const std::vector<EmbeddingRecord>& records);
std::string encode_embeddings_csv(const std::vector<EmbeddingRecord>& records);

/// Stable textual form of a JSON document: sorted keys, shortest round-trip
/// doubles, two-space indent, trailing newline.
std::string dump(const json& doc);

json to_json(const GlobalStats& stats);
GlobalStats stats_from_json(const json& doc);

json to_json(const InfoAmountTable& table);
InfoAmountTable info_from_json(const json& doc);

json to_json(const MarginMatrix& margins);
MarginMatrix margins_from_json(const json& doc);

json to_json(const PlanResult& plan);
json to_json(const EpochReport& report);

/// Classifier weights: { "p": int, "C": int, "s": f64, "weights_row_major": [p*C] }.
json to_json(const CosineClassifier& clf);
CosineClassifier classifier_from_json(const json& doc);

/// A toy experiment: dataset, training settings and the losses to sweep.
struct RunConfig {
  SyntheticSpec dataset;
  TrainConfig train;
  std::vector<LossKind> losses;
};

/// Strict parse; unknown keys and type errors raise InputError naming the
/// offending field path (e.g. "train.lr").
RunConfig run_config_from_json(const json& doc);
json to_json(const RunConfig& config);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);
json read_json(const std::filesystem::path& path);

}  // namespace igam::io
