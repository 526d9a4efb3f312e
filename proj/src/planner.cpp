#include "igam/planner.hpp"

#include <cmath>
#include <string>

#include "igam/error.hpp"

namespace igam {
namespace {

void check_input(const PlanInput& in) {
  if (in.instances < 1 || in.dim < 1 || in.classes < 1) {
    throw InputError("plan needs instances, dim and classes all >= 1");
  }
}

void check_length(const PlanInput& in, std::int64_t d) {
  if (d < 1 || d > in.instances) {
    throw InputError("queue length " + std::to_string(d) + " outside [1, " +
                     std::to_string(in.instances) + "]");
  }
}

std::int64_t grid_search(const PlanInput& in) {
  constexpr int kPoints = 100;
  const double n = static_cast<double>(in.instances);
  const double lo = in.instances >= 1000 ? 1000.0 : 1.0;
  const double step = (n - lo) / (kPoints - 1);
  double best_ratio = 0.0;
  double best_d = lo;
  for (int k = 0; k < kPoints; ++k) {
    // Same point placement as numpy.linspace: the last point is exactly N.
    const double d = k == kPoints - 1 ? n : lo + k * step;
    const double r = std::abs((d + in.classes * (std::floor(n / d) + 1.0) * in.dim) / n);
    if (k == 0 || r < best_ratio) {
      best_ratio = r;
      best_d = d;
    }
  }
  return static_cast<std::int64_t>(best_d);
}

// R is increasing in d while floor(N/d) is constant, so only the first d of
// each quotient block can be a minimizer. O(sqrt(N)) blocks.
std::int64_t exact_search(const PlanInput& in) {
  const std::int64_t n = in.instances;
  std::int64_t best_d = 1;
  double best_ratio = storage_ratio(in, 1);
  for (std::int64_t d = 1; d <= n;) {
    const std::int64_t q = n / d;
    const double r = storage_ratio(in, d);
    if (r < best_ratio) {
      best_ratio = r;
      best_d = d;
    }
    d = n / q + 1;
  }
  return best_d;
}

}  // namespace

double storage_ratio(const PlanInput& input, std::int64_t d) {
  check_input(input);
  check_length(input, d);
  const std::int64_t windows = input.instances / d + 1;
  // Numerator is exact in 64-bit integers for any realistic N, C, p.
  const std::int64_t numerator = d + input.classes * windows * input.dim;
  return static_cast<double>(numerator) / static_cast<double>(input.instances);
}

PlanResult memory_report(const PlanInput& input, std::int64_t d) {
  check_input(input);
  check_length(input, d);
  PlanResult out;
  out.d_star = d;
  out.ratio = storage_ratio(input, d);
  out.savings_percent = 100.0 * (1.0 - out.ratio);
  out.windows = input.instances / d + 1;
  const std::int64_t p = input.dim;
  out.bytes_original = input.instances * p * kBytesPerReal;
  out.bytes_new = (d * p + input.classes * out.windows * p * p) * kBytesPerReal;
  out.bytes_new_with_means = out.bytes_new + input.classes * out.windows * p * kBytesPerReal;
  return out;
}

PlanResult optimal_queue_length(const PlanInput& input) {
  check_input(input);
  const std::int64_t d = input.search == SearchMode::kPaperGrid ? grid_search(input) : exact_search(input);
  return memory_report(input, d);
}

}  // namespace igam
