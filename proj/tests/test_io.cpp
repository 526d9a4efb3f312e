#include <cstring>
#include <random>

#include <doctest.h>

#include "igam/error.hpp"
#include "igam/io.hpp"
#include "oracles.hpp"

using namespace igam;
using igam::io::json;

namespace {

std::vector<EmbeddingRecord> random_records(std::mt19937_64& rng, int count, int dim) {
  std::vector<EmbeddingRecord> out;
  std::normal_distribution<float> g;
  for (int i = 0; i < count; ++i) {
    EmbeddingRecord r;
    r.category = static_cast<CategoryId>(rng() % 7);
    r.vector.resize(dim);
    // float-representable so both formats round-trip exactly
    for (int k = 0; k < dim; ++k) r.vector[k] = static_cast<double>(g(rng));
    out.push_back(std::move(r));
  }
  return out;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("embedding formats round-trip") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 1 + static_cast<int>(rng() % 12);
    const auto records = random_records(rng, 1 + static_cast<int>(rng() % 40), dim);
    const auto bin = io::parse_embeddings_binary(io::encode_embeddings_binary(records));
    const auto csv = io::parse_embeddings_csv(io::encode_embeddings_csv(records));
    REQUIRE(bin.size() == records.size());
    REQUIRE(csv.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(bin[i].category == records[i].category);
      CHECK(bin[i].vector == records[i].vector);
      CHECK(csv[i].category == records[i].category);
      CHECK(csv[i].vector == records[i].vector);
    }
  }
}

TEST_CASE("binary parse errors carry byte offsets") {
  std::mt19937_64 rng(2);
  const std::string good = io::encode_embeddings_binary(random_records(rng, 3, 4));
  CHECK(error_of([&] { io::parse_embeddings_binary(""); }).starts_with("byte offset 0: empty"));
  CHECK(error_of([&] { io::parse_embeddings_binary(good.substr(0, 10)); }).starts_with("byte offset 10:"));
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(error_of([&] { io::parse_embeddings_binary(bad_magic); }).find("bad magic") != std::string::npos);
  // header 20 bytes, records 20 bytes each
  CHECK(error_of([&] { io::parse_embeddings_binary(good.substr(0, good.size() - 1)); }).starts_with("byte offset 60:"));
  CHECK(error_of([&] { io::parse_embeddings_binary(good + "x"); }).starts_with("byte offset 80: trailing"));
  std::string nan = good;
  const float bad = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + 20 + 4 + 8, &bad, 4);
  CHECK(error_of([&] { io::parse_embeddings_binary(nan); }).starts_with("byte offset 32: non-finite"));
}

TEST_CASE("csv parse errors carry byte offsets") {
  CHECK(error_of([&] { io::parse_embeddings_csv(""); }).starts_with("byte offset 0"));
  CHECK(error_of([&] { io::parse_embeddings_csv("cat,e0\n1,2\n"); }).starts_with("byte offset 0"));
  CHECK(error_of([&] { io::parse_embeddings_csv("category,e0,e1\n1,2\n"); }).starts_with("byte offset 15"));
  CHECK(error_of([&] { io::parse_embeddings_csv("category,e0\n1,abc\n"); }).starts_with("byte offset 14"));
  CHECK(error_of([&] { io::parse_embeddings_csv("category,e0\n1,inf\n"); }).starts_with("byte offset 14"));
  CHECK(error_of([&] { io::parse_embeddings_csv("category,e0\n"); }).find("no records") != std::string::npos);
  CHECK(io::parse_embeddings_csv("category,e0\r\n3,1.5\r\n\n").front().vector[0] == 1.5);
}

TEST_CASE("json dump is stable across round-trips") {
  std::mt19937_64 rng(3);
  GlobalStats g;
  g.dim = 3;
  for (CategoryId c : {0u, 4u}) {
    CategoryStats s;
    s.category = c;
    s.total = 10 + c;
    s.windows = 2;
    s.mean = oracle::random_vector(rng, 3);
    const Matrix a = oracle::random_matrix(rng, 3, 3);
    s.cov = a * a.transpose();
    g.categories.emplace(c, s);
  }
  g.absent = {2};
  const std::string first = io::dump(io::to_json(g));
  const GlobalStats back = io::stats_from_json(json::parse(first));
  CHECK(io::dump(io::to_json(back)) == first);
  CHECK(back.categories.at(4).cov == g.categories.at(4).cov);
  CHECK(back.absent == g.absent);

  InfoAmountTable t;
  t.epoch = 3;
  t.entries = {{1, 0.1 + 0.2}, {9, 1e-300}};
  const std::string ts = io::dump(io::to_json(t));
  CHECK(io::dump(io::to_json(io::info_from_json(json::parse(ts)))) == ts);
  CHECK(io::info_from_json(json::parse(ts)).entries.at(1) == 0.1 + 0.2);

  MarginMatrix m = MarginMatrix::zeros(3);
  m.categories = {2, 5, 7};
  m.m(0, 2) = 1.0 / 3.0;
  const std::string ms = io::dump(io::to_json(m));
  CHECK(io::dump(io::to_json(io::margins_from_json(json::parse(ms)))) == ms);
}

TEST_CASE("run config validation names the field") {
  const json good = {{"dataset", {{"classes", 3}, {"dim", 4}, {"spreads", {1.0, 2.0, 3.0}}}},
                     {"train", {{"loss", {"ce", "igam"}}, {"epochs", 2}}}};
  const io::RunConfig cfg = io::run_config_from_json(good);
  CHECK(cfg.losses.size() == 2);
  CHECK(cfg.train.epochs == 2);
  CHECK(io::run_config_from_json(io::to_json(cfg)).dataset.spreads == cfg.dataset.spreads);

  json bad = good;
  bad["train"]["lr"] = "fast";
  CHECK(error_of([&] { io::run_config_from_json(bad); }).starts_with("train.lr"));
  bad = good;
  bad["train"]["learning_rate"] = 0.1;
  CHECK(error_of([&] { io::run_config_from_json(bad); }) == "train.learning_rate: unknown key");
  bad = good;
  bad["dataset"]["spreads"] = {1.0};
  CHECK(error_of([&] { io::run_config_from_json(bad); }).starts_with("dataset.spreads"));
  bad = good;
  bad["train"]["loss"] = "arcface";
  CHECK(error_of([&] { io::run_config_from_json(bad); }).starts_with("train.loss"));
}
