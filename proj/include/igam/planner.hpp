#pragma once

#include <cstdint>

namespace igam {

enum class SearchMode {
  kPaperGrid,    // 100-point linear grid over [1000, N]
  kExactInteger  // global minimum over every integer d in [1, N]
};

struct PlanInput {
  std::int64_t instances = 0;  // N
  std::int64_t dim = 0;        // p
  std::int64_t classes = 0;    // C
  SearchMode search = SearchMode::kPaperGrid;
};

inline constexpr std::int64_t kBytesPerReal = 4;
inline constexpr double kBytesPerMegabyte = 1024.0 * 1024.0;

struct PlanResult {
  std::int64_t d_star = 0;
  double ratio = 0.0;            // R
  double savings_percent = 0.0;  // 100 * (1 - R)
  std::int64_t windows = 0;      // floor(N / d) + 1
  std::int64_t bytes_original = 0;
  std::int64_t bytes_new = 0;  // queue + covariances
  // bytes_new plus the per-window means, which the ratio does not account for
  std::int64_t bytes_new_with_means = 0;

  double megabytes_original() const { return static_cast<double>(bytes_original) / kBytesPerMegabyte; }
  double megabytes_new() const { return static_cast<double>(bytes_new) / kBytesPerMegabyte; }
};

/// R(d) = (d + C * (floor(N/d) + 1) * p) / N, the windowed-statistics storage
/// divided by the storage of all N embeddings.
double storage_ratio(const PlanInput& input, std::int64_t d);

/// Queue length minimizing R under input.search; ties go to the smaller d.
PlanResult optimal_queue_length(const PlanInput& input);

/// Storage accounting for a given queue length.
PlanResult memory_report(const PlanInput& input, std::int64_t d);

}  // namespace igam
