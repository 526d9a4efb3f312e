// igam: information-amount statistics, margins, losses and queue planning.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "igam/error.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    igam::io::write_file(out_path, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace igam;
  using igam::io::json;

  CLI::App app{"Category information amount, IGAM margins and queue planning"};
  app.require_subcommand(1);

  std::string out_path;
  std::string format = "auto";

  // stats
  auto* stats = app.add_subcommand("stats", "Stream embeddings through the queue and emit merged statistics");
  std::string stats_input;
  std::size_t queue_len = EmbeddingQueue::kDefaultCapacity;
  stats->add_option("--input,input", stats_input, "Embedding file (binary or CSV)")->required();
  stats->add_option("--queue-len,-d", queue_len, "Queue length d")->check(CLI::PositiveNumber);
  stats->add_option("--format", format, "Input format")->check(CLI::IsMember({"auto", "bin", "csv"}));
  stats->add_option("--out,-o", out_path, "Output path (default stdout)");

  // info
  auto* info = app.add_subcommand("info", "Information amount per category from statistics JSON");
  std::string info_stats;
  std::string info_previous;
  int epoch = 0;
  info->add_option("--stats,stats", info_stats, "Statistics JSON")->required();
  info->add_option("--epoch", epoch, "Epoch number recorded in the table");
  info->add_option("--previous", info_previous, "Previous table; absent categories keep their value");
  info->add_option("--out,-o", out_path, "Output path (default stdout)");

  // margins
  auto* margins = app.add_subcommand("margins", "Margin matrix from an information-amount table");
  std::string margins_info;
  std::string variant = "paper-double-exp";
  std::string ibar = "sum";
  std::string margin_variant = "clamped";
  margins->add_option("--info,info", margins_info, "Information-amount JSON")->required();
  margins->add_option("--variant", variant, "Normalization")->check(CLI::IsMember({"paper-double-exp", "softmax-single-exp"}));
  margins->add_option("--ibar", ibar, "Reference level")->check(CLI::IsMember({"sum", "mean"}));
  margins->add_option("--margin", margin_variant, "Margin sign handling")->check(CLI::IsMember({"clamped", "signed"}));
  margins->add_option("--out,-o", out_path, "Output path (default stdout)");

  // loss-eval
  auto* loss_eval = app.add_subcommand("loss-eval", "Evaluate a loss over labelled features");
  std::string features_path, weights_path, margins_path, loss_name = "igam";
  std::optional<double> scale;
  bool gradients = false;
  loss_eval->add_option("--features", features_path, "Features (bin, csv or json)")->required();
  loss_eval->add_option("--weights", weights_path, "Classifier weights JSON")->required();
  loss_eval->add_option("--margins", margins_path, "Margin matrix JSON (default all zero)");
  loss_eval->add_option("--loss", loss_name, "Loss")->check(CLI::IsMember({"ce", "normface", "igam"}));
  loss_eval->add_option("--s", scale, "Override the cosine scale");
  loss_eval->add_flag("--gradients", gradients, "Also report the mean weight gradient");
  loss_eval->add_option("--format", format, "Feature format")->check(CLI::IsMember({"auto", "bin", "csv", "json"}));
  loss_eval->add_option("--out,-o", out_path, "Output path (default stdout)");

  // plan
  auto* plan = app.add_subcommand("plan", "Storage ratio and optimal queue length");
  PlanInput plan_in;
  std::string mode = "grid";
  std::optional<std::int64_t> plan_d;
  plan->add_option("--instances,-N", plan_in.instances, "Total instances N")->required()->check(CLI::PositiveNumber);
  plan->add_option("--dim,-p", plan_in.dim, "Embedding dimension p")->required()->check(CLI::PositiveNumber);
  plan->add_option("--classes,-C", plan_in.classes, "Categories C")->required()->check(CLI::PositiveNumber);
  plan->add_option("--mode", mode, "Search mode")->check(CLI::IsMember({"grid", "exact"}));
  plan->add_option("--queue-len,-d", plan_d, "Report a fixed queue length instead of searching");
  plan->add_option("--out,-o", out_path, "Output path (default stdout)");

  // toy
  auto* toy = app.add_subcommand("toy", "Synthetic training experiments");
  toy->require_subcommand(1);
  auto* toy_run = toy->add_subcommand("run", "Train on a synthetic dataset and write a run report");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  toy_run->add_option("--config,config", config_path, "Run configuration JSON")->required();
  toy_run->add_option("--seed", seed, "Override dataset and training seeds");
  toy_run->add_option("--out,-o", out_path, "Output path (default stdout)");
  auto* toy_report = toy->add_subcommand("report", "Summarize a run report");
  std::string report_path;
  std::string report_format = "csv";
  toy_report->add_option("--in,report", report_path, "Run report JSON")->required();
  toy_report->add_option("--format", report_format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  toy_report->add_option("--out,-o", out_path, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*stats) {
      const auto fmt = format == "auto" ? io::EmbeddingFormat::kAuto : io::embedding_format_from_string(format);
      emit(io::dump(cli::cmd_stats(stats_input, queue_len, fmt)), out_path);
    } else if (*info) {
      std::optional<json> prev;
      if (!info_previous.empty()) prev = io::read_json(info_previous);
      emit(io::dump(cli::cmd_info(io::read_json(info_stats), epoch, prev)), out_path);
    } else if (*margins) {
      NormalizationOptions norm;
      norm.variant = variant == "paper-double-exp" ? InfoVariant::kPaperDoubleExp : InfoVariant::kSoftmaxSingleExp;
      norm.reference = ibar == "sum" ? ReferenceMode::kSum : ReferenceMode::kMean;
      const auto mv = margin_variant == "clamped" ? MarginVariant::kClamped : MarginVariant::kSigned;
      emit(io::dump(cli::cmd_margins(io::read_json(margins_info), norm, mv)), out_path);
    } else if (*loss_eval) {
      const bool as_json = format == "json" || (format == "auto" && features_path.ends_with(".json"));
      const auto features =
          as_json ? cli::features_from_json(io::read_json(features_path))
                  : io::read_embeddings(features_path, io::embedding_format_from_string(format));
      std::optional<json> mdoc;
      if (!margins_path.empty()) mdoc = io::read_json(margins_path);
      cli::LossEvalOptions opts{loss_kind_from_string(loss_name), scale, gradients};
      emit(io::dump(cli::cmd_loss_eval(features, io::read_json(weights_path), mdoc, opts)), out_path);
    } else if (*plan) {
      plan_in.search = mode == "grid" ? SearchMode::kPaperGrid : SearchMode::kExactInteger;
      emit(io::dump(cli::cmd_plan(plan_in, plan_d)), out_path);
    } else if (*toy_run) {
      emit(io::dump(cli::cmd_toy_run(io::read_json(config_path), seed)), out_path);
    } else if (*toy_report) {
      emit(cli::cmd_toy_report(io::read_json(report_path), report_format), out_path);
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
