#include <cmath>
#include <numeric>

#include <doctest.h>

#include "igam/error.hpp"
#include "igam/info_amount.hpp"
#include "igam/toy.hpp"

using namespace igam;

namespace {

double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const long double n = static_cast<long double>(x.size());
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

SyntheticSpec small_spec(std::vector<double> spreads, std::uint64_t seed = 3) {
  SyntheticSpec s;
  s.classes = static_cast<int>(spreads.size());
  s.dim = 8;
  s.n_train = 200;
  s.n_test = 200;
  s.spreads = std::move(spreads);
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("pearson examples") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> up{2, 4, 6, 8, 10};
  const std::vector<double> down{10, 8, 6, 4, 2};
  CHECK(pearson(a, up) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(a, down) == doctest::Approx(-1.0).epsilon(1e-15));
  const std::vector<double> y{0.3, -1.0, 2.5, 2.0, 0.1};
  CHECK(pearson(a, y) == doctest::Approx(pearson_oracle(a, y)).epsilon(1e-13));
  const std::vector<double> flat{1, 1, 1, 1, 1};
  CHECK_THROWS_AS(pearson(a, flat), InputError);
  CHECK_THROWS_AS(pearson(std::vector<double>{1.0}, std::vector<double>{2.0}), InputError);
}

TEST_CASE("bias variance is the population variance") {
  CHECK(bias_variance(std::vector<double>{0.9, 0.9, 0.9}) == 0.0);
  CHECK(bias_variance(std::vector<double>{1.0, 0.0}) == doctest::Approx(0.25));
  CHECK(bias_variance(std::vector<double>{0.5, 0.7, 0.9, 1.0}) == doctest::Approx(0.036875));
}

TEST_CASE("log-spaced spreads") {
  const auto s = log_spaced(4, 0.25, 2.0);
  REQUIRE(s.size() == 4);
  CHECK(s.front() == doctest::Approx(0.25));
  CHECK(s.back() == doctest::Approx(2.0));
  CHECK(s[1] / s[0] == doctest::Approx(2.0));
  CHECK(s[2] / s[1] == doctest::Approx(2.0));
}

TEST_CASE("dataset generation is deterministic and validated") {
  const auto spec = small_spec({0.5, 1.0, 2.0});
  const Dataset a = generate_dataset(spec);
  const Dataset b = generate_dataset(spec);
  REQUIRE(a.train.size() == 600);
  REQUIRE(a.test.size() == 600);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].category == b.train[i].category);
    CHECK(a.train[i].vector == b.train[i].vector);
  }
  for (const auto& m : a.class_means) CHECK(m.norm() == doctest::Approx(spec.mean_separation));

  auto bad = spec;
  bad.spreads.pop_back();
  CHECK_THROWS_AS(generate_dataset(bad), InputError);
  bad = spec;
  bad.spreads[1] = 0.0;
  CHECK_THROWS_AS(generate_dataset(bad), InputError);
}

TEST_CASE("two well separated classes are learned") {
  auto spec = small_spec({0.1, 0.1});
  spec.mean_separation = 5.0;
  const Dataset data = generate_dataset(spec);
  TrainConfig cfg;
  cfg.loss = LossKind::kNormFace;
  cfg.epochs = 5;
  const TrainResult r = train(data, cfg);
  for (double acc : r.epochs.back().per_class_accuracy) CHECK(acc >= 0.99);
}

TEST_CASE("wider classes carry more information") {
  const Dataset data = generate_dataset(small_spec({0.5, 1.0, 2.0, 4.0}));
  TrainConfig cfg;
  cfg.epochs = 1;
  const TrainResult r = train(data, cfg);
  const auto& info = r.epochs.front().info_amounts;
  for (std::size_t i = 1; i < info.size(); ++i) CHECK(info[i] > info[i - 1]);
  CHECK(r.epochs.front().margins.rows() == 4);
  CHECK(r.epochs.front().margins(3, 0) > 0.0);
  CHECK(r.epochs.front().margins(0, 3) == 0.0);
}

TEST_CASE("equal spreads give near-zero margins") {
  const Dataset data = generate_dataset(small_spec({1.0, 1.0, 1.0, 1.0}));
  TrainConfig cfg;
  cfg.epochs = 2;
  const TrainResult r = train(data, cfg);
  for (const auto& e : r.epochs) CHECK(e.margins.maxCoeff() < 0.02);
}

TEST_CASE("zero margins reproduce normface training") {
  const Dataset data = generate_dataset(small_spec({0.5, 1.0, 2.0}));
  TrainConfig nf;
  nf.loss = LossKind::kNormFace;
  nf.epochs = 3;
  TrainConfig ig = nf;
  ig.loss = LossKind::kIgam;
  ig.zero_margins = true;
  const TrainResult a = train(data, nf);
  const TrainResult b = train(data, ig);
  CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() < 1e-9);
  for (std::size_t e = 0; e < a.epochs.size(); ++e)
    CHECK(a.epochs[e].per_class_accuracy == b.epochs[e].per_class_accuracy);
}

TEST_CASE("training is reproducible for a fixed seed") {
  const Dataset data = generate_dataset(small_spec({0.5, 1.0, 2.0}));
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 11;
  CHECK(train(data, cfg).weights == train(data, cfg).weights);
}

TEST_CASE("queue statistics match pooled recomputation") {
  const Dataset data = generate_dataset(small_spec({0.5, 1.0, 2.0}));
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.queue_len = 70;
  cfg.verify_pooled = true;
  const TrainResult r = train(data, cfg);
  for (const auto& e : r.epochs) {
    REQUIRE(e.info_amounts_pooled.size() == e.info_amounts.size());
    CHECK(e.snapshots == 600 / 70 + 1);
    for (std::size_t c = 0; c < e.info_amounts.size(); ++c)
      CHECK(e.info_amounts[c] == doctest::Approx(e.info_amounts_pooled[c]).epsilon(1e-9));
  }
}

TEST_CASE("loss names and config validation") {
  CHECK(loss_kind_from_string("ce") == LossKind::kCrossEntropy);
  CHECK(loss_kind_from_string("normface") == LossKind::kNormFace);
  CHECK(loss_kind_from_string("igam") == LossKind::kIgam);
  CHECK(to_string(LossKind::kIgam) == "igam");
  CHECK_THROWS_AS(loss_kind_from_string("arcface"), InputError);

  const Dataset data = generate_dataset(small_spec({1.0, 2.0}));
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(train(data, cfg), InputError);
  cfg.epochs = 1;
  cfg.momentum = 1.0;
  CHECK_THROWS_AS(train(data, cfg), InputError);
}
