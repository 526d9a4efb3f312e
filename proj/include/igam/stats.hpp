#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace igam {

using CategoryId = std::uint32_t;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct EmbeddingRecord {
  CategoryId category = 0;
  Vector vector;
};

/// Mean and population covariance (divisor = count) of one category over one window.
struct LocalStats {
  CategoryId category = 0;
  std::size_t count = 0;
  Vector mean;
  Matrix cov;
};

/// Dataset-level statistics of one category, merged from `windows` local windows.
struct CategoryStats {
  CategoryId category = 0;
  std::size_t total = 0;
  Vector mean;
  Matrix cov;
  std::size_t windows = 0;
};

struct GlobalStats {
  int dim = 0;
  std::map<CategoryId, CategoryStats> categories;
  // Categories expected this epoch that received no records.
  std::vector<CategoryId> absent;
};

/// Per-category mean and covariance of a batch, ordered by category id.
/// Throws InputError on an empty batch, ragged dimensions or non-finite coordinates.
std::vector<LocalStats> compute_local_stats(std::span<const EmbeddingRecord> batch);

/// Exact pooled statistics from per-window statistics of a single category:
///
///   mu    = (1/N) sum_k n_k mu_k
///   Sigma = (1/N) (sum_k n_k Sigma_k + sum_k n_k (mu_k - mu)(mu_k - mu)^T)
///
/// with N = sum_k n_k. The result is identical (in exact arithmetic) to the
/// covariance of the concatenated windows.
CategoryStats merge_stats(std::span<const LocalStats> windows);

/// Merge two already-merged entries of the same category.
CategoryStats merge_stats(const CategoryStats& a, const CategoryStats& b);

/// Replace a square matrix by (A + A^T) / 2.
void symmetrize(Matrix& a);

/// Fixed-capacity FIFO of embeddings that signals when every slot has been
/// refreshed since the previous snapshot.
class EmbeddingQueue {
 public:
  static constexpr std::size_t kDefaultCapacity = 50000;

  EmbeddingQueue(std::size_t capacity, int dim);

  /// Append a record, evicting the oldest one when full. Returns true when the
  /// insertion counter reaches capacity; the counter is then reset to zero and
  /// the caller is expected to snapshot the queue contents.
  bool push(EmbeddingRecord record);

  /// Local statistics over the `newest` most recently inserted records.
  std::vector<LocalStats> snapshot(std::size_t newest) const;
  std::vector<LocalStats> snapshot() const { return snapshot(size()); }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return size_; }
  int dim() const noexcept { return dim_; }
  std::size_t inserted_since_snapshot() const noexcept { return inserted_since_snapshot_; }

  void reset_counter() noexcept { inserted_since_snapshot_ = 0; }
  void clear() noexcept;

 private:
  std::size_t capacity_;
  int dim_;
  std::vector<EmbeddingRecord> slots_;
  std::size_t head_ = 0;  // next slot to write
  std::size_t size_ = 0;
  std::size_t inserted_since_snapshot_ = 0;
};

/// Close an epoch: snapshot the records inserted since the last snapshot (if
/// any), merge every category's windows and reset the queue counter.
/// Categories in `expected` with no windows are listed in GlobalStats::absent.
GlobalStats epoch_finalize(EmbeddingQueue& queue,
                           std::vector<LocalStats> accumulated,
                           std::span<const CategoryId> expected = {});

/// Drives an EmbeddingQueue through one epoch and collects its snapshots.
class StreamingStats {
 public:
  StreamingStats(std::size_t queue_length, int dim);

  void push(EmbeddingRecord record);
  GlobalStats finalize(std::span<const CategoryId> expected = {});

  // Snapshots taken so far in the current epoch.
  std::size_t snapshots() const noexcept { return snapshots_; }
  // Snapshots taken by the most recent finalize(), including the trailing one.
  std::size_t last_epoch_snapshots() const noexcept { return last_epoch_snapshots_; }
  const EmbeddingQueue& queue() const noexcept { return queue_; }

 private:
  EmbeddingQueue queue_;
  std::vector<LocalStats> windows_;
  std::size_t snapshots_ = 0;
  std::size_t last_epoch_snapshots_ = 0;
};

}  // namespace igam
