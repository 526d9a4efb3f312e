#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "igam/loss.hpp"
#include "igam/stats.hpp"

namespace igam {

/// Gaussian classes with per-class isotropic spread.
struct SyntheticSpec {
  int classes = 10;
  int dim = 16;
  int n_train = 500;  // per class
  int n_test = 500;   // per class
  std::vector<double> spreads;  // sigma_c, one per class
  double mean_separation = 3.0;
  std::uint64_t seed = 0;
};

struct Dataset {
  int classes = 0;
  int dim = 0;
  std::vector<EmbeddingRecord> train;
  std::vector<EmbeddingRecord> test;
  std::vector<Vector> class_means;
};

/// `count` spreads geometrically spaced from `lo` to `hi`.
std::vector<double> log_spaced(int count, double lo, double hi);

/// Sample a dataset. Every class draws from its own RNG stream seeded by
/// (seed, class), so the result does not depend on evaluation order.
/// Throws InputError on an invalid spec.
Dataset generate_dataset(const SyntheticSpec& spec);

enum class LossKind { kCrossEntropy, kNormFace, kIgam };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

struct TrainConfig {
  LossKind loss = LossKind::kIgam;
  int epochs = 30;
  double lr = 0.1;
  double momentum = 0.9;
  int batch_size = 64;
  double scale = 30.0;
  std::size_t queue_len = EmbeddingQueue::kDefaultCapacity;
  NormalizationOptions normalization;
  MarginVariant margin_variant = MarginVariant::kClamped;
  // Multiplier applied to every refreshed margin (ablation knob).
  double margin_scale = 1.0;
  std::uint64_t seed = 0;
  // Keep the IGAM margins at zero for the whole run.
  bool zero_margins = false;
  // Also recompute information amounts from the pooled epoch embeddings.
  bool verify_pooled = false;
};

struct EpochReport {
  int epoch = 0;
  std::vector<double> per_class_accuracy;
  std::vector<double> info_amounts;
  std::vector<double> info_amounts_pooled;  // empty unless verify_pooled
  double bias_variance = 0.0;
  // Empty when either side has zero variance.
  std::optional<double> pearson_info_acc;
  std::optional<double> pearson_count_acc;
  double loss_mean = 0.0;
  std::size_t snapshots = 0;
  // Margins in effect during the next epoch.
  Matrix margins;
};

struct TrainResult {
  std::vector<EpochReport> epochs;
  Matrix weights;
};

/// SGD with momentum on a linear (cosine) classifier over raw features. Each
/// epoch streams the training embeddings through an EmbeddingQueue; at the
/// end of the epoch the merged statistics refresh the information amounts and
/// the margin matrix used by the following epoch. Epoch 1 runs with zero margins.
TrainResult train(const Dataset& data, const TrainConfig& config);

/// Sample Pearson correlation. Throws InputError for fewer than two points or
/// zero variance on either side.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Population variance of the per-class accuracies.
double bias_variance(std::span<const double> per_class_accuracy);

/// Per-class accuracy of argmax prediction (cosine for cosine losses, raw
/// logits for cross-entropy).
std::vector<double> per_class_accuracy(const Dataset& data, const Matrix& weights, LossKind loss,
                                       bool on_test = true);

}  // namespace igam
