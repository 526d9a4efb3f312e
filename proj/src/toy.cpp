#include "igam/toy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "igam/error.hpp"
#include "igam/info_amount.hpp"

namespace igam {
namespace {

std::mt19937_64 class_stream(std::uint64_t seed, int category) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(category), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

void validate(const SyntheticSpec& spec) {
  if (spec.classes < 2) throw InputError("dataset.classes must be >= 2");
  if (spec.dim < 1) throw InputError("dataset.dim must be >= 1");
  if (spec.n_train < 1) throw InputError("dataset.n_train must be >= 1");
  if (spec.n_test < 0) throw InputError("dataset.n_test must be >= 0");
  if (static_cast<int>(spec.spreads.size()) != spec.classes) {
    throw InputError("dataset.spreads must have one entry per class");
  }
  for (double s : spec.spreads) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InputError("dataset.spreads must be positive");
  }
  if (!(spec.mean_separation >= 0.0)) throw InputError("dataset.mean_separation must be >= 0");
}

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw InputError("train.epochs must be >= 1");
  if (cfg.queue_len < 1) throw InputError("train.queue_len must be >= 1");
  if (cfg.batch_size < 1) throw InputError("train.batch_size must be >= 1");
  if (!(cfg.lr > 0.0)) throw InputError("train.lr must be positive");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw InputError("train.momentum must be in [0, 1)");
  if (!(cfg.scale > 0.0)) throw InputError("train.s must be positive");
  if (!std::isfinite(cfg.margin_scale)) throw InputError("train.margin_scale must be finite");
}

int predict(const Vector& x, const Matrix& weights, LossKind loss) {
  Vector scores;
  if (loss == LossKind::kCrossEntropy) {
    scores = weights.transpose() * x;
  } else {
    scores = cosines(x, weights);
  }
  Eigen::Index best = 0;
  scores.maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kCrossEntropy: return "ce";
    case LossKind::kNormFace: return "normface";
    case LossKind::kIgam: return "igam";
  }
  return "unknown";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "ce") return LossKind::kCrossEntropy;
  if (name == "normface") return LossKind::kNormFace;
  if (name == "igam") return LossKind::kIgam;
  throw InputError("unknown loss '" + name + "' (expected ce, normface or igam)");
}

std::vector<double> log_spaced(int count, double lo, double hi) {
  if (count < 1 || !(lo > 0.0) || !(hi > 0.0)) throw InputError("log_spaced: bad range");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = std::exp(a + (b - a) * k / (count - 1));
  return out;
}

Dataset generate_dataset(const SyntheticSpec& spec) {
  validate(spec);
  Dataset data;
  data.classes = spec.classes;
  data.dim = spec.dim;
  data.train.reserve(static_cast<std::size_t>(spec.classes) * static_cast<std::size_t>(spec.n_train));
  data.test.reserve(static_cast<std::size_t>(spec.classes) * static_cast<std::size_t>(spec.n_test));

  for (int c = 0; c < spec.classes; ++c) {
    auto rng = class_stream(spec.seed, c);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&](double sd) {
      Vector v(spec.dim);
      for (int k = 0; k < spec.dim; ++k) v[k] = sd * normal(rng);
      return v;
    };

    Vector direction = draw(1.0);
    while (direction.norm() == 0.0) direction = draw(1.0);
    const Vector mean = spec.mean_separation * direction.normalized();
    data.class_means.push_back(mean);

    const double sigma = spec.spreads[static_cast<std::size_t>(c)];
    const auto category = static_cast<CategoryId>(c);
    for (int k = 0; k < spec.n_train; ++k) data.train.push_back({category, mean + draw(sigma)});
    for (int k = 0; k < spec.n_test; ++k) data.test.push_back({category, mean + draw(sigma)});
  }
  return data;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InputError("pearson: length mismatch");
  if (xs.size() < 2) throw InputError("pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = xs[k] - mx;
    const double dy = ys[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw InputError("pearson: zero variance input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double bias_variance(std::span<const double> acc) {
  if (acc.empty()) throw InputError("bias_variance: empty accuracy vector");
  const double n = static_cast<double>(acc.size());
  const double mean = std::accumulate(acc.begin(), acc.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : acc) ss += (a - mean) * (a - mean);
  return ss / n;
}

std::vector<double> per_class_accuracy(const Dataset& data, const Matrix& weights, LossKind loss,
                                       bool on_test) {
  const auto& records = on_test ? data.test : data.train;
  std::vector<double> hits(static_cast<std::size_t>(data.classes), 0.0);
  std::vector<double> totals(static_cast<std::size_t>(data.classes), 0.0);
  for (const auto& r : records) {
    totals[r.category] += 1.0;
    if (predict(r.vector, weights, loss) == static_cast<int>(r.category)) hits[r.category] += 1.0;
  }
  for (std::size_t c = 0; c < hits.size(); ++c) hits[c] = totals[c] > 0.0 ? hits[c] / totals[c] : 0.0;
  return hits;
}

TrainResult train(const Dataset& data, const TrainConfig& config) {
  validate(config);
  if (data.classes < 2 || data.train.empty()) throw InputError("train: dataset needs >= 2 classes and samples");

  const int classes = data.classes;
  const int dim = data.dim;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));

  CosineClassifier clf;
  clf.scale = config.scale;
  clf.weights.resize(dim, classes);
  for (Eigen::Index k = 0; k < clf.weights.size(); ++k) clf.weights.data()[k] = normal(rng);
  Matrix velocity = Matrix::Zero(dim, classes);

  MarginMatrix margins = MarginMatrix::zeros(classes);
  std::vector<CategoryId> expected(static_cast<std::size_t>(classes));
  std::iota(expected.begin(), expected.end(), CategoryId{0});

  StreamingStats stream(config.queue_len, dim);
  std::optional<InfoAmountTable> info;
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    Matrix grad = Matrix::Zero(dim, classes);

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      grad.setZero();
      for (std::size_t k = start; k < stop; ++k) {
        const EmbeddingRecord& r = data.train[order[k]];
        const int label = static_cast<int>(r.category);
        LossOutput out;
        switch (config.loss) {
          case LossKind::kCrossEntropy: out = ce_backward(r.vector, label, clf); break;
          case LossKind::kNormFace: out = normface_backward(r.vector, label, clf); break;
          case LossKind::kIgam: out = igam_backward(r.vector, label, clf, margins); break;
        }
        if (!std::isfinite(out.loss)) {
          throw NumericalError("training diverged at epoch " + std::to_string(epoch));
        }
        loss_sum += out.loss;
        grad += out.grad_weights;
        stream.push(r);
      }
      grad /= static_cast<double>(stop - start);
      velocity = config.momentum * velocity + grad;
      clf.weights -= config.lr * velocity;
      if (!clf.weights.allFinite()) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch));
      }
    }

    const GlobalStats stats = stream.finalize(expected);
    InfoAmountTable table = compute_info_table(stats, epoch, info ? &*info : nullptr);

    EpochReport report;
    report.epoch = epoch;
    report.snapshots = stream.last_epoch_snapshots();
    report.loss_mean = loss_sum / static_cast<double>(order.size());
    for (CategoryId c : expected) {
      auto it = table.entries.find(c);
      report.info_amounts.push_back(it != table.entries.end() ? it->second : 0.0);
    }

    if (config.verify_pooled) {
      std::vector<std::vector<const Vector*>> members(static_cast<std::size_t>(classes));
      for (const auto& r : data.train) members[r.category].push_back(&r.vector);
      for (const auto& rows : members) {
        Matrix x(static_cast<Eigen::Index>(rows.size()), dim);
        for (std::size_t k = 0; k < rows.size(); ++k) x.row(static_cast<Eigen::Index>(k)) = rows[k]->transpose();
        report.info_amounts_pooled.push_back(information_amount_from_embeddings(x));
      }
    }

    if (config.loss == LossKind::kIgam && !config.zero_margins) {
      margins = build_margins(normalize_info(report.info_amounts, config.normalization), config.margin_variant);
      margins.m *= config.margin_scale;
    }
    report.margins = margins.m;
    info = std::move(table);

    report.per_class_accuracy = per_class_accuracy(data, clf.weights, config.loss, !data.test.empty());
    report.bias_variance = bias_variance(report.per_class_accuracy);
    try {
      report.pearson_info_acc = pearson(report.info_amounts, report.per_class_accuracy);
    } catch (const InputError&) {
    }
    std::vector<double> counts;
    for (CategoryId c : expected) {
      auto it = stats.categories.find(c);
      counts.push_back(it != stats.categories.end() ? static_cast<double>(it->second.total) : 0.0);
    }
    try {
      report.pearson_count_acc = pearson(counts, report.per_class_accuracy);
    } catch (const InputError&) {
    }
    result.epochs.push_back(std::move(report));
  }
  result.weights = clf.weights;
  return result;
}

}  // namespace igam
