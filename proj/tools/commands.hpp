#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "igam/io.hpp"

namespace igam::cli {

using io::json;

json cmd_stats(const std::filesystem::path& input, std::size_t queue_len, io::EmbeddingFormat format);
json cmd_info(const json& stats, int epoch, const std::optional<json>& previous);
json cmd_margins(const json& info, const NormalizationOptions& norm, MarginVariant variant);

struct LossEvalOptions {
  LossKind loss = LossKind::kIgam;
  std::optional<double> scale;
  bool gradients = false;
};
json cmd_loss_eval(const std::vector<EmbeddingRecord>& features, const json& weights,
                   const std::optional<json>& margins, const LossEvalOptions& opts);

json cmd_plan(const PlanInput& input, std::optional<std::int64_t> queue_len);

json cmd_toy_run(const json& config, std::optional<std::uint64_t> seed);
std::string cmd_toy_report(const json& report, const std::string& format);

/// Features from a JSON document { "p": int, "records": [ { "category": int, "vector": [...] } ] }.
std::vector<EmbeddingRecord> features_from_json(const json& doc);

}  // namespace igam::cli
