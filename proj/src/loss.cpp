#include "igam/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "igam/error.hpp"

namespace igam {
namespace {

constexpr double kSingularCosine = 1e-9;

// log(1 + e^z) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

void check_inputs(const Vector& x, int label, const Matrix& w) {
  if (w.cols() < 1 || w.rows() < 1) throw InputError("classifier has no weights");
  if (x.size() != w.rows()) {
    throw InputError("feature dimension " + std::to_string(x.size()) +
                     " does not match classifier dimension " + std::to_string(w.rows()));
  }
  if (label < 0 || label >= w.cols()) {
    throw InputError("label " + std::to_string(label) + " out of range");
  }
  if (!x.allFinite() || !w.allFinite()) throw InputError("non-finite features or weights");
}

// Softmax cross-entropy over `logits` for target `label`; fills dL/dlogit when asked.
double softmax_xent(std::span<const double> logits, int label, Vector* grad_logits) {
  const double target = logits[label];
  const double mx = *std::max_element(logits.begin(), logits.end());
  double loss;
  if (target == mx) {
    double rest = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
      if (static_cast<int>(j) != label) rest += std::exp(logits[j] - target);
    }
    loss = std::log1p(rest);
  } else {
    loss = log_sum_exp(logits) - target;
  }
  if (grad_logits != nullptr) {
    const double lse = target + loss;
    grad_logits->resize(static_cast<Eigen::Index>(logits.size()));
    for (std::size_t j = 0; j < logits.size(); ++j) {
      (*grad_logits)[static_cast<Eigen::Index>(j)] = std::exp(logits[j] - lse);
    }
    (*grad_logits)[label] -= 1.0;
  }
  if (!std::isfinite(loss)) throw NumericalError("loss is not finite");
  return loss;
}

// Shared path for the normalized-cosine and margin losses. `margins` may be null.
LossOutput cosine_loss(const Vector& x, int label, const CosineClassifier& clf,
                       const MarginMatrix* margins, bool with_gradients) {
  const Matrix& w = clf.weights;
  check_inputs(x, label, w);
  const Eigen::Index classes = w.cols();
  if (margins != nullptr && (margins->m.rows() != classes || margins->m.cols() != classes)) {
    throw InputError("margin matrix is " + std::to_string(margins->m.rows()) + "x" +
                     std::to_string(margins->m.cols()) + " but classifier has " +
                     std::to_string(classes) + " classes");
  }
  if (!(clf.scale > 0.0)) throw InputError("scale must be positive");

  const double x_norm = x.norm();
  if (x_norm == 0.0) throw InputError("feature vector is zero");
  const Vector w_norm = w.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < classes; ++j) {
    if (w_norm[j] == 0.0) throw InputError("classifier column " + std::to_string(j) + " is zero");
  }

  Vector cos(classes);
  for (Eigen::Index j = 0; j < classes; ++j) {
    cos[j] = std::clamp(w.col(j).dot(x) / (w_norm[j] * x_norm), -1.0, 1.0);
  }

  LossOutput out;
  std::vector<double> logits(static_cast<std::size_t>(classes));
  Vector dpsi = Vector::Ones(classes);  // d cos(theta_j + m) / d cos(theta_j)
  for (Eigen::Index j = 0; j < classes; ++j) {
    const double c = cos[j];
    const double m = (margins != nullptr && j != label) ? margins->m(label, j) : 0.0;
    double psi = c;
    if (m != 0.0) {
      const double cm = std::cos(m);
      const double sm = std::sin(m);
      if (m > 0.0 && (m >= std::numbers::pi || c < -cm)) {
        psi = -1.0;  // theta + m past pi
        dpsi[j] = 0.0;
      } else if (m < 0.0 && (m <= -std::numbers::pi || c > cm)) {
        psi = 1.0;  // theta + m below zero
        dpsi[j] = 0.0;
      } else {
        const double sin_theta = std::sqrt(std::max(0.0, 1.0 - c * c));
        psi = c * cm - sin_theta * sm;
        if (1.0 - std::abs(c) < kSingularCosine) {
          dpsi[j] = 0.0;
          out.clamped_gradient = true;
        } else {
          dpsi[j] = cm + c * sm / sin_theta;
        }
      }
    }
    logits[static_cast<std::size_t>(j)] = clf.scale * psi;
  }

  Vector grad_logits;
  out.loss = softmax_xent(logits, label, with_gradients ? &grad_logits : nullptr);
  if (!with_gradients) return out;

  out.grad_cos = clf.scale * grad_logits.cwiseProduct(dpsi);
  out.grad_features = Vector::Zero(x.size());
  out.grad_weights = Matrix::Zero(w.rows(), classes);
  const double inv_x2 = 1.0 / (x_norm * x_norm);
  for (Eigen::Index j = 0; j < classes; ++j) {
    const double g = out.grad_cos[j];
    if (g == 0.0) continue;
    const double inv_wx = 1.0 / (w_norm[j] * x_norm);
    out.grad_features += g * (w.col(j) * inv_wx - cos[j] * inv_x2 * x);
    out.grad_weights.col(j) = g * (x * inv_wx - cos[j] / (w_norm[j] * w_norm[j]) * w.col(j));
  }
  return out;
}

LossOutput cross_entropy(const Vector& x, int label, const CosineClassifier& clf, bool with_gradients) {
  const Matrix& w = clf.weights;
  check_inputs(x, label, w);
  const Vector z = w.transpose() * x;
  std::vector<double> logits(z.data(), z.data() + z.size());
  LossOutput out;
  Vector grad_logits;
  out.loss = softmax_xent(logits, label, with_gradients ? &grad_logits : nullptr);
  if (!with_gradients) return out;
  out.grad_cos = grad_logits;
  out.grad_features = w * grad_logits;
  out.grad_weights = x * grad_logits.transpose();
  return out;
}

}  // namespace

MarginMatrix MarginMatrix::zeros(int classes) {
  MarginMatrix out;
  out.m = Matrix::Zero(classes, classes);
  out.categories.resize(static_cast<std::size_t>(classes));
  for (int i = 0; i < classes; ++i) out.categories[static_cast<std::size_t>(i)] = static_cast<CategoryId>(i);
  return out;
}

InfoNormalization normalize_info(std::span<const double> raw, const NormalizationOptions& opts) {
  const std::size_t classes = raw.size();
  if (classes < 2) throw InputError("normalize_info: need at least two categories");
  for (double v : raw) {
    if (!std::isfinite(v) || v < 0.0) throw InputError("normalize_info: amounts must be finite and >= 0");
  }

  InfoNormalization out;
  out.raw.assign(raw.begin(), raw.end());
  out.variant = opts.variant;
  out.categories.resize(classes);
  for (std::size_t i = 0; i < classes; ++i) out.categories[i] = static_cast<CategoryId>(i);

  const double c = static_cast<double>(classes);
  double sum = 0.0;
  for (double v : raw) sum += v;
  out.i_bar = opts.reference == ReferenceMode::kSum ? sum : sum / c;

  const double root_c = std::sqrt(c);
  std::vector<double> scaled(classes);
  if (out.i_bar > 0.0) {
    for (std::size_t i = 0; i < classes; ++i) scaled[i] = raw[i] / (out.i_bar * root_c);
  } else {
    // All-zero input: use the value every equal-input table maps to.
    out.degenerate = true;
    const double equal = opts.reference == ReferenceMode::kSum ? 1.0 / (c * root_c) : 1.0 / root_c;
    std::fill(scaled.begin(), scaled.end(), equal);
  }

  const double log_denominator = log_sum_exp(scaled);
  const double log_c = std::log(c);
  out.normalized.resize(classes);
  out.log_normalized.resize(classes);
  for (std::size_t i = 0; i < classes; ++i) {
    const double numerator = opts.variant == InfoVariant::kPaperDoubleExp ? std::exp(scaled[i]) : scaled[i];
    // log of the ratio term before the +1 offset
    const double log_ratio = numerator - log_denominator + log_c;
    out.normalized[i] = std::exp(log_ratio) + 1.0;
    out.log_normalized[i] = softplus(log_ratio);
  }
  return out;
}

InfoNormalization normalize_info(const InfoAmountTable& table, const NormalizationOptions& opts) {
  std::vector<double> raw;
  std::vector<CategoryId> ids;
  for (const auto& [id, bits] : table.entries) {
    ids.push_back(id);
    raw.push_back(bits);
  }
  InfoNormalization out = normalize_info(raw, opts);
  out.categories = std::move(ids);
  return out;
}

MarginMatrix build_margins(const InfoNormalization& norm, MarginVariant variant) {
  const std::size_t classes = norm.log_normalized.size();
  for (std::size_t i = 0; i < classes; ++i) {
    if (!(norm.normalized[i] > 0.0) || std::isnan(norm.log_normalized[i])) {
      throw InputError("build_margins: normalized amounts must be positive");
    }
  }
  MarginMatrix out;
  out.categories = norm.categories;
  out.m = Matrix::Zero(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(classes));
  for (std::size_t i = 0; i < classes; ++i) {
    for (std::size_t j = 0; j < classes; ++j) {
      if (i == j) continue;
      double v = (norm.log_normalized[i] - norm.log_normalized[j]) / std::numbers::pi;
      if (variant == MarginVariant::kClamped) v = std::max(0.0, v);
      out.m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return out;
}

MarginMatrix build_margins(std::span<const double> normalized, MarginVariant variant) {
  InfoNormalization norm;
  norm.normalized.assign(normalized.begin(), normalized.end());
  norm.log_normalized.resize(normalized.size());
  norm.categories.resize(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    if (!(normalized[i] > 0.0)) throw InputError("build_margins: normalized amounts must be positive");
    norm.log_normalized[i] = std::log(normalized[i]);
    norm.categories[i] = static_cast<CategoryId>(i);
  }
  return build_margins(norm, variant);
}

Vector cosines(const Vector& x, const Matrix& weights) {
  const double x_norm = x.norm();
  Vector out(weights.cols());
  for (Eigen::Index j = 0; j < weights.cols(); ++j) {
    out[j] = std::clamp(weights.col(j).dot(x) / (weights.col(j).norm() * x_norm), -1.0, 1.0);
  }
  return out;
}

LossOutput igam_forward(const Vector& x, int label, const CosineClassifier& clf, const MarginMatrix& margins) {
  return cosine_loss(x, label, clf, &margins, false);
}

LossOutput igam_backward(const Vector& x, int label, const CosineClassifier& clf, const MarginMatrix& margins) {
  return cosine_loss(x, label, clf, &margins, true);
}

LossOutput normface_forward(const Vector& x, int label, const CosineClassifier& clf) {
  return cosine_loss(x, label, clf, nullptr, false);
}

LossOutput normface_backward(const Vector& x, int label, const CosineClassifier& clf) {
  return cosine_loss(x, label, clf, nullptr, true);
}

LossOutput ce_forward(const Vector& x, int label, const CosineClassifier& clf) {
  return cross_entropy(x, label, clf, false);
}

LossOutput ce_backward(const Vector& x, int label, const CosineClassifier& clf) {
  return cross_entropy(x, label, clf, true);
}

}  // namespace igam
