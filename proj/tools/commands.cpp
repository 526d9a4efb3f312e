#include "commands.hpp"

#include <sstream>

#include "igam/error.hpp"

namespace igam::cli {

json cmd_stats(const std::filesystem::path& input, std::size_t queue_len, io::EmbeddingFormat format) {
  const auto records = io::read_embeddings(input, format);
  StreamingStats stream(queue_len, static_cast<int>(records.front().vector.size()));
  for (const auto& r : records) stream.push(r);
  return io::to_json(stream.finalize());
}

json cmd_info(const json& stats, int epoch, const std::optional<json>& previous) {
  const GlobalStats global = io::stats_from_json(stats);
  std::optional<InfoAmountTable> prev;
  if (previous) prev = io::info_from_json(*previous);
  return io::to_json(compute_info_table(global, epoch, prev ? &*prev : nullptr));
}

json cmd_margins(const json& info, const NormalizationOptions& norm, MarginVariant variant) {
  const InfoAmountTable table = io::info_from_json(info);
  return io::to_json(build_margins(normalize_info(table, norm), variant));
}

std::vector<EmbeddingRecord> features_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("p") || !doc.contains("records")) {
    throw InputError("features: expected { \"p\": int, \"records\": [...] }");
  }
  const auto p = doc["p"].get<int>();
  std::vector<EmbeddingRecord> out;
  for (std::size_t k = 0; k < doc["records"].size(); ++k) {
    const json& r = doc["records"][k];
    const std::string path = "features.records[" + std::to_string(k) + "]";
    if (!r.contains("category") || !r.contains("vector")) throw InputError(path + ": needs category and vector");
    const auto v = r["vector"].get<std::vector<double>>();
    if (static_cast<int>(v.size()) != p) throw InputError(path + ".vector: expected " + std::to_string(p) + " entries");
    out.push_back({r["category"].get<CategoryId>(), Eigen::Map<const Vector>(v.data(), p)});
  }
  if (out.empty()) throw InputError("features: no records");
  return out;
}

json cmd_loss_eval(const std::vector<EmbeddingRecord>& features, const json& weights,
                   const std::optional<json>& margins_doc, const LossEvalOptions& opts) {
  CosineClassifier clf = io::classifier_from_json(weights);
  if (opts.scale) clf.scale = *opts.scale;
  const int classes = static_cast<int>(clf.weights.cols());
  MarginMatrix margins = margins_doc ? io::margins_from_json(*margins_doc) : MarginMatrix::zeros(classes);

  json losses = json::array();
  double total = 0.0;
  Matrix grad_sum = Matrix::Zero(clf.weights.rows(), clf.weights.cols());
  bool clamped = false;
  for (const auto& r : features) {
    const int label = static_cast<int>(r.category);
    LossOutput out;
    switch (opts.loss) {
      case LossKind::kCrossEntropy:
        out = opts.gradients ? ce_backward(r.vector, label, clf) : ce_forward(r.vector, label, clf);
        break;
      case LossKind::kNormFace:
        out = opts.gradients ? normface_backward(r.vector, label, clf) : normface_forward(r.vector, label, clf);
        break;
      case LossKind::kIgam:
        out = opts.gradients ? igam_backward(r.vector, label, clf, margins) : igam_forward(r.vector, label, clf, margins);
        break;
    }
    losses.push_back(out.loss);
    total += out.loss;
    clamped = clamped || out.clamped_gradient;
    if (opts.gradients) grad_sum += out.grad_weights;
  }
  const double n = static_cast<double>(features.size());
  json doc = {{"loss", to_string(opts.loss)}, {"count", features.size()}, {"losses", losses}, {"mean_loss", total / n}};
  if (opts.gradients) {
    json g = json::array();
    const Matrix mean = grad_sum / n;
    for (Eigen::Index i = 0; i < mean.rows(); ++i) {
      for (Eigen::Index j = 0; j < mean.cols(); ++j) g.push_back(mean(i, j));
    }
    doc["grad_weights_mean_row_major"] = g;
    doc["clamped_gradient"] = clamped;
  }
  return doc;
}

json cmd_plan(const PlanInput& input, std::optional<std::int64_t> queue_len) {
  const PlanResult plan = queue_len ? memory_report(input, *queue_len) : optimal_queue_length(input);
  json doc = io::to_json(plan);
  doc["mode"] = queue_len ? "fixed" : (input.search == SearchMode::kPaperGrid ? "grid" : "exact");
  doc["N"] = input.instances;
  doc["p"] = input.dim;
  doc["C"] = input.classes;
  return doc;
}

json cmd_toy_run(const json& config_doc, std::optional<std::uint64_t> seed) {
  io::RunConfig cfg = io::run_config_from_json(config_doc);
  if (seed) {
    cfg.dataset.seed = *seed;
    cfg.train.seed = *seed;
  }
  const Dataset data = generate_dataset(cfg.dataset);
  json runs = json::array();
  for (LossKind kind : cfg.losses) {
    TrainConfig tc = cfg.train;
    tc.loss = kind;
    const TrainResult result = train(data, tc);
    json epochs = json::array();
    for (const auto& e : result.epochs) epochs.push_back(io::to_json(e));
    const EpochReport& last = result.epochs.back();
    runs.push_back({{"loss", to_string(kind)},
                    {"epochs", epochs},
                    {"final_bias_variance", last.bias_variance},
                    {"final_pearson_info_acc", last.pearson_info_acc ? json(*last.pearson_info_acc) : json(nullptr)}});
  }
  return {{"config", io::to_json(cfg)}, {"runs", runs}};
}

std::string cmd_toy_report(const json& report, const std::string& format) {
  if (!report.is_object() || !report.contains("runs") || !report["runs"].is_array()) {
    throw InputError("report: expected an object with a runs array");
  }
  auto mean_of = [](const json& arr) {
    double s = 0.0;
    for (const auto& v : arr) s += v.get<double>();
    return arr.empty() ? 0.0 : s / static_cast<double>(arr.size());
  };
  if (format == "csv") {
    std::ostringstream out;
    out.precision(17);
    out << "loss,epoch,loss_mean,mean_accuracy,bias_variance,pearson_info_acc,max_margin\n";
    for (const auto& run : report["runs"]) {
      for (const auto& e : run.at("epochs")) {
        out << run.at("loss").get<std::string>() << ',' << e.at("epoch").get<int>() << ','
            << e.at("loss_mean").get<double>() << ',' << mean_of(e.at("per_class_accuracy")) << ','
            << e.at("bias_variance").get<double>() << ',';
        if (!e.at("pearson_info_acc").is_null()) out << e.at("pearson_info_acc").get<double>();
        out << ',' << e.at("max_margin").get<double>() << '\n';
      }
    }
    return out.str();
  }
  if (format != "json") throw InputError("toy report: format must be csv or json");
  json summary = json::array();
  for (const auto& run : report["runs"]) {
    const json& last = run.at("epochs").back();
    summary.push_back({{"loss", run.at("loss")},
                       {"epochs", run.at("epochs").size()},
                       {"final_bias_variance", last.at("bias_variance")},
                       {"final_pearson_info_acc", last.at("pearson_info_acc")},
                       {"final_mean_accuracy", mean_of(last.at("per_class_accuracy"))},
                       {"final_max_margin", last.at("max_margin")}});
  }
  return io::dump({{"summary", summary}});
}

}  // namespace igam::cli
