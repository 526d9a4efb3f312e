#include <filesystem>
#include <random>

#include <doctest.h>

#include "commands.hpp"
#include "igam/error.hpp"
#include "oracles.hpp"

using namespace igam;
using igam::io::json;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name, const std::string& contents)
      : path(std::filesystem::temp_directory_path() / ("igam_test_" + name)) {
    io::write_file(path, contents);
  }
  ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("stats command matches pooled moments") {
  const std::vector<EmbeddingRecord> records{
      {0, Vector::Constant(2, 1.0)},  {1, Vector::Constant(2, -2.0)}, {0, Vector::Constant(2, 3.0)},
      {0, (Vector(2) << 0.5, 2.0).finished()}, {1, Vector::Constant(2, 4.0)}, {0, Vector::Constant(2, -1.0)}};
  const TempFile bin("six.bin", io::encode_embeddings_binary(records));
  const TempFile csv("six.csv", io::encode_embeddings_csv(records));
  const json a = cli::cmd_stats(bin.path, 2, io::EmbeddingFormat::kAuto);
  const json b = cli::cmd_stats(csv.path, 2, io::EmbeddingFormat::kAuto);
  CHECK(io::dump(a) == io::dump(b));

  const GlobalStats g = io::stats_from_json(a);
  for (CategoryId c : {0u, 1u}) {
    std::vector<Vector> xs;
    for (const auto& r : records)
      if (r.category == c) xs.push_back(r.vector);
    const auto [mean, cov] = oracle::pooled_moments(xs);
    CHECK((g.categories.at(c).mean - mean).norm() < 1e-12);
    CHECK(oracle::rel_frobenius(g.categories.at(c).cov, cov) < 1e-10);
    CHECK(g.categories.at(c).total == xs.size());
  }
}

TEST_CASE("info command on identity covariance") {
  json stats = {{"p", 4},
                {"categories", {{{"id", 0}, {"count", 4000}, {"windows", 1},
                                 {"mean", {0, 0, 0, 0}},
                                 {"cov_row_major", {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1}}}}}};
  const json info = cli::cmd_info(stats, 1, std::nullopt);
  CHECK(info["info"]["0"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(info["epoch"] == 1);
}

TEST_CASE("margins command on uniform info") {
  const json info = {{"epoch", 1}, {"info", {{"0", 3.0}, {"1", 3.0}, {"2", 3.0}}}};
  const json m = cli::cmd_margins(info, {}, MarginVariant::kClamped);
  for (const auto& v : m["margins_row_major"]) CHECK(v.get<double>() == 0.0);
  CHECK(m["C"] == 3);
}

TEST_CASE("loss-eval reports per-sample losses") {
  CosineClassifier clf;
  clf.weights = Matrix::Identity(2, 2);
  const std::vector<EmbeddingRecord> feats{{0, Vector::Constant(2, 1.0)}, {1, Vector::Constant(2, 1.0)}};
  cli::LossEvalOptions opts;
  opts.gradients = true;
  const json out = cli::cmd_loss_eval(feats, io::to_json(clf), std::nullopt, opts);
  CHECK(out["mean_loss"].get<double>() == doctest::Approx(std::log(2.0)));
  CHECK(out["losses"].size() == 2);
  CHECK(out.contains("grad_weights_mean_row_major"));
}

TEST_CASE("plan command reports the mode") {
  const json doc = cli::cmd_plan(PlanInput{55800, 128, 20, SearchMode::kPaperGrid}, std::nullopt);
  CHECK(doc["d_star"] == 11517);
  CHECK(doc["mode"] == "grid");
  CHECK(cli::cmd_plan(PlanInput{55800, 128, 20, SearchMode::kPaperGrid}, 5000)["mode"] == "fixed");
}

TEST_CASE("toy run and report") {
  const json cfg = {{"dataset", {{"classes", 3}, {"dim", 4}, {"n_train", 60}, {"n_test", 60},
                                 {"spreads", {0.5, 1.0, 2.0}}}},
                    {"train", {{"loss", {"normface", "igam"}}, {"epochs", 2}}}};
  const json report = cli::cmd_toy_run(cfg, 5);
  REQUIRE(report["runs"].size() == 2);
  CHECK(report["runs"][1]["epochs"].size() == 2);
  const std::string csv = cli::cmd_toy_report(report, "csv");
  CHECK(csv.starts_with("loss,epoch,"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(json::parse(cli::cmd_toy_report(report, "json"))["summary"].size() == 2);
  CHECK(io::dump(cli::cmd_toy_run(cfg, 5)) == io::dump(report));
  CHECK_THROWS_AS(cli::cmd_toy_report(report, "xml"), InputError);
}
