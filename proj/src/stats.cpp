#include "igam/stats.hpp"

#include <algorithm>
#include <functional>
#include <iterator>
#include <string>
#include <utility>

#include "igam/error.hpp"

namespace igam {
namespace {

void check_record(const EmbeddingRecord& r, Eigen::Index dim) {
  if (r.vector.size() != dim) {
    throw InputError("embedding dimension mismatch: expected " + std::to_string(dim) +
                     ", got " + std::to_string(r.vector.size()));
  }
  if (!r.vector.allFinite()) {
    throw InputError("embedding for category " + std::to_string(r.category) +
                     " has non-finite coordinates");
  }
}

// Two-pass mean/covariance, grouped by category.
template <typename Range>
std::vector<LocalStats> local_stats_impl(const Range& records, Eigen::Index dim) {
  std::map<CategoryId, LocalStats> acc;
  for (const EmbeddingRecord& r : records) {
    auto [it, inserted] = acc.try_emplace(r.category);
    LocalStats& s = it->second;
    if (inserted) {
      s.category = r.category;
      s.mean = Vector::Zero(dim);
      s.cov = Matrix::Zero(dim, dim);
    }
    s.mean += r.vector;
    ++s.count;
  }
  for (auto& [id, s] : acc) s.mean /= static_cast<double>(s.count);
  for (const EmbeddingRecord& r : records) {
    LocalStats& s = acc.at(r.category);
    const Vector centered = r.vector - s.mean;
    s.cov.template selfadjointView<Eigen::Lower>().rankUpdate(centered);
  }
  std::vector<LocalStats> out;
  out.reserve(acc.size());
  for (auto& [id, s] : acc) {
    s.cov.template triangularView<Eigen::StrictlyUpper>() = s.cov.transpose();
    s.cov /= static_cast<double>(s.count);
    symmetrize(s.cov);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

void symmetrize(Matrix& a) {
  const Matrix t = a.transpose();
  a = 0.5 * (a + t);
}

std::vector<LocalStats> compute_local_stats(std::span<const EmbeddingRecord> batch) {
  if (batch.empty()) throw InputError("compute_local_stats: empty batch");
  const Eigen::Index dim = batch.front().vector.size();
  if (dim == 0) throw InputError("compute_local_stats: zero-dimensional embedding");
  for (const auto& r : batch) check_record(r, dim);
  return local_stats_impl(batch, dim);
}

CategoryStats merge_stats(std::span<const LocalStats> windows) {
  if (windows.empty()) throw InputError("merge_stats: no windows");
  const CategoryId category = windows.front().category;
  const Eigen::Index dim = windows.front().mean.size();

  std::size_t total = 0;
  for (const LocalStats& w : windows) {
    if (w.category != category) {
      throw InputError("merge_stats: mixed categories " + std::to_string(category) + " and " +
                       std::to_string(w.category));
    }
    if (w.mean.size() != dim || w.cov.rows() != dim || w.cov.cols() != dim) {
      throw InputError("merge_stats: mixed dimensions");
    }
    if (w.count == 0) throw InputError("merge_stats: window with zero count");
    total += w.count;
  }

  const double n_total = static_cast<double>(total);
  Vector mean = Vector::Zero(dim);
  for (const LocalStats& w : windows) mean += static_cast<double>(w.count) * w.mean;
  mean /= n_total;

  Matrix cov = Matrix::Zero(dim, dim);
  for (const LocalStats& w : windows) {
    const double n = static_cast<double>(w.count);
    const Vector shift = w.mean - mean;
    cov += n * w.cov;
    cov.noalias() += n * shift * shift.transpose();
  }
  cov /= n_total;
  symmetrize(cov);

  return CategoryStats{category, total, std::move(mean), std::move(cov), windows.size()};
}

CategoryStats merge_stats(const CategoryStats& a, const CategoryStats& b) {
  const LocalStats pair[2] = {{a.category, a.total, a.mean, a.cov},
                              {b.category, b.total, b.mean, b.cov}};
  CategoryStats out = merge_stats(std::span<const LocalStats>(pair, 2));
  out.windows = a.windows + b.windows;
  return out;
}

EmbeddingQueue::EmbeddingQueue(std::size_t capacity, int dim) : capacity_(capacity), dim_(dim) {
  if (capacity == 0) throw InputError("queue capacity must be at least 1");
  if (dim <= 0) throw InputError("queue embedding dimension must be positive");
  slots_.resize(capacity);
}

bool EmbeddingQueue::push(EmbeddingRecord record) {
  check_record(record, dim_);
  slots_[head_] = std::move(record);
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
  if (++inserted_since_snapshot_ == capacity_) {
    inserted_since_snapshot_ = 0;
    return true;
  }
  return false;
}

std::vector<LocalStats> EmbeddingQueue::snapshot(std::size_t newest) const {
  newest = std::min(newest, size_);
  std::vector<std::reference_wrapper<const EmbeddingRecord>> view;
  view.reserve(newest);
  // Oldest first so that summation order matches insertion order.
  for (std::size_t k = newest; k > 0; --k) {
    view.emplace_back(slots_[(head_ + capacity_ - k) % capacity_]);
  }
  if (view.empty()) return {};
  return local_stats_impl(view, dim_);
}

void EmbeddingQueue::clear() noexcept {
  for (auto& s : slots_) s = EmbeddingRecord{};
  head_ = 0;
  size_ = 0;
  inserted_since_snapshot_ = 0;
}

GlobalStats epoch_finalize(EmbeddingQueue& queue, std::vector<LocalStats> accumulated,
                           std::span<const CategoryId> expected) {
  // Trailing partial window: only records not covered by an earlier snapshot,
  // so the windows partition the epoch's stream.
  if (queue.inserted_since_snapshot() > 0) {
    auto tail = queue.snapshot(queue.inserted_since_snapshot());
    std::move(tail.begin(), tail.end(), std::back_inserter(accumulated));
  }
  queue.reset_counter();

  std::map<CategoryId, std::vector<LocalStats>> by_category;
  for (auto& w : accumulated) by_category[w.category].push_back(std::move(w));

  GlobalStats out;
  out.dim = queue.dim();
  for (auto& [id, windows] : by_category) {
    out.categories.emplace(id, merge_stats(windows));
  }
  for (CategoryId id : expected) {
    if (!out.categories.contains(id)) out.absent.push_back(id);
  }
  std::sort(out.absent.begin(), out.absent.end());
  out.absent.erase(std::unique(out.absent.begin(), out.absent.end()), out.absent.end());
  return out;
}

StreamingStats::StreamingStats(std::size_t queue_length, int dim) : queue_(queue_length, dim) {}

void StreamingStats::push(EmbeddingRecord record) {
  if (queue_.push(std::move(record))) {
    auto windows = queue_.snapshot();
    std::move(windows.begin(), windows.end(), std::back_inserter(windows_));
    ++snapshots_;
  }
}

GlobalStats StreamingStats::finalize(std::span<const CategoryId> expected) {
  if (queue_.inserted_since_snapshot() > 0) ++snapshots_;
  GlobalStats out = epoch_finalize(queue_, std::move(windows_), expected);
  windows_.clear();
  last_epoch_snapshots_ = snapshots_;
  snapshots_ = 0;
  return out;
}

}  // namespace igam
