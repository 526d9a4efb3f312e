#pragma once

#include <span>
#include <vector>

#include "igam/info_amount.hpp"
#include "igam/stats.hpp"

namespace igam {

enum class InfoVariant {
  kPaperDoubleExp,   // exp(exp(x_i)) / sum_j exp(x_j) * C + 1
  kSoftmaxSingleExp  // exp(x_i) / sum_j exp(x_j) * C + 1
};

// How the reference level I_bar is formed from the raw amounts.
enum class ReferenceMode { kSum, kMean };

enum class MarginVariant {
  kClamped,  // max(0, log(I'_i / I'_j) / pi)
  kSigned    // log(I'_i / I'_j) / pi, may be negative
};

struct NormalizationOptions {
  InfoVariant variant = InfoVariant::kPaperDoubleExp;
  ReferenceMode reference = ReferenceMode::kSum;
};

struct InfoNormalization {
  std::vector<CategoryId> categories;
  std::vector<double> raw;
  double i_bar = 0.0;
  std::vector<double> normalized;
  // log(normalized), kept separately so margins stay finite when
  // `normalized` overflows under the mean reference.
  std::vector<double> log_normalized;
  InfoVariant variant = InfoVariant::kPaperDoubleExp;
  bool degenerate = false;
};

struct MarginMatrix {
  std::vector<CategoryId> categories;
  Matrix m;  // radians, m(i, j) applies to non-target j when the target is i

  int classes() const noexcept { return static_cast<int>(m.rows()); }
  static MarginMatrix zeros(int classes);
};

/// Cosine classifier: column j of `weights` is the prototype of class j.
struct CosineClassifier {
  Matrix weights;  // dim x classes
  double scale = 30.0;
};

struct LossOutput {
  double loss = 0.0;
  // dL/dcos(theta_j) for cosine losses; dL/dlogit_j for cross-entropy.
  Vector grad_cos;
  Vector grad_features;
  Matrix grad_weights;
  // Set when a margin-active cosine was within 1e-9 of +-1 and its
  // derivative was replaced by the constant branch.
  bool clamped_gradient = false;
};

InfoNormalization normalize_info(std::span<const double> raw, const NormalizationOptions& opts = {});
InfoNormalization normalize_info(const InfoAmountTable& table, const NormalizationOptions& opts = {});

/// m(i, j) = (1/pi) * ln(I'_i / I'_j), clamped at zero for kClamped; zero diagonal.
MarginMatrix build_margins(const InfoNormalization& norm, MarginVariant variant = MarginVariant::kClamped);
MarginMatrix build_margins(std::span<const double> normalized, MarginVariant variant = MarginVariant::kClamped);

/// Information-guided angular margin loss
///   L = -log(e^{s cos t_i} / (e^{s cos t_i} + sum_{j != i} e^{s cos(t_j + m_ij)}))
/// with t_j + m_ij clamped to [0, pi].
LossOutput igam_forward(const Vector& x, int label, const CosineClassifier& clf, const MarginMatrix& margins);
LossOutput igam_backward(const Vector& x, int label, const CosineClassifier& clf, const MarginMatrix& margins);

/// Normalized-cosine softmax loss (no margins).
LossOutput normface_forward(const Vector& x, int label, const CosineClassifier& clf);
LossOutput normface_backward(const Vector& x, int label, const CosineClassifier& clf);

/// Plain softmax cross-entropy over W^T x (clf.scale is ignored).
LossOutput ce_forward(const Vector& x, int label, const CosineClassifier& clf);
LossOutput ce_backward(const Vector& x, int label, const CosineClassifier& clf);

/// Clamped cosines between `x` and every classifier column.
Vector cosines(const Vector& x, const Matrix& weights);

}  // namespace igam
