#include <cmath>
#include <random>

#include <doctest.h>

#include "igam/error.hpp"
#include "igam/planner.hpp"

using namespace igam;

namespace {

long double ratio_oracle(long double n, long double p, long double c, long double d) {
  return (d + c * (std::floor(n / d) + 1.0L) * p) / n;
}

}  // namespace

TEST_CASE("storage ratio closed form") {
  const PlanInput in{1000, 8, 5, SearchMode::kExactInteger};
  CHECK(storage_ratio(in, 1000) == doctest::Approx(1.0 + 2.0 * 5 * 8 / 1000.0).epsilon(1e-15));
  CHECK(storage_ratio(in, 100) == doctest::Approx((100.0 + 5 * 11 * 8) / 1000.0).epsilon(1e-15));
  CHECK_THROWS_AS(storage_ratio(in, 0), InputError);
  CHECK_THROWS_AS(storage_ratio(in, 1001), InputError);
}

TEST_CASE("queue length on the 100-point grid") {
  const PlanInput in{55800, 128, 20, SearchMode::kPaperGrid};
  const PlanResult r = optimal_queue_length(in);
  CHECK(r.d_star == 11517);
  CHECK(std::abs(r.savings_percent - 56.44) < 0.1);
  CHECK(std::abs(r.megabytes_original() - 27.25) < 0.01);
  CHECK(std::abs(r.megabytes_new() - 11.87) < 0.01);
  CHECK(r.bytes_original == 55800LL * 128 * 4);
}

TEST_CASE("large-dataset queue length and size report") {
  const PlanInput in{605638, 128, 80, SearchMode::kPaperGrid};
  const PlanResult best = optimal_queue_length(in);
  CHECK(best.d_star == 68182);
  CHECK(std::abs(best.savings_percent - 73.52) < 0.1);
  const PlanResult r = memory_report(in, 68182);
  CHECK(std::abs(r.megabytes_original() - 295.72) < 0.01);
  CHECK(std::abs(r.megabytes_new() - 78.29) < 0.01);
  CHECK(r.windows == 9);
  CHECK(r.bytes_new_with_means > r.bytes_new);
}

TEST_CASE("exact search finds the integer minimum") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const std::int64_t n = 50 + static_cast<std::int64_t>(rng() % 200000);
    const std::int64_t p = 1 + static_cast<std::int64_t>(rng() % 256);
    const std::int64_t c = 1 + static_cast<std::int64_t>(rng() % 200);
    const PlanInput exact{n, p, c, SearchMode::kExactInteger};
    const PlanResult best = optimal_queue_length(exact);
    REQUIRE(best.d_star >= 1);
    REQUIRE(best.d_star <= n);
    const long double r_best = ratio_oracle(n, p, c, best.d_star);
    CHECK(std::abs(static_cast<long double>(best.ratio) - r_best) < 1e-12L);

    std::uniform_int_distribution<std::int64_t> pick(1, n);
    for (int k = 0; k < 1000; ++k) CHECK(r_best <= ratio_oracle(n, p, c, pick(rng)) + 1e-15L);

    // Brute force on small N.
    if (n <= 20000) {
      std::int64_t arg = 1;
      for (std::int64_t d = 2; d <= n; ++d)
        if (ratio_oracle(n, p, c, d) < ratio_oracle(n, p, c, arg)) arg = d;
      CHECK(best.d_star == arg);
    }

    const PlanResult grid = optimal_queue_length(PlanInput{n, p, c, SearchMode::kPaperGrid});
    CHECK(best.ratio <= grid.ratio + 1e-15);
  }
}

TEST_CASE("storage identity R * N * p = S_new") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 1000000);
    const std::int64_t p = 1 + static_cast<std::int64_t>(rng() % 512);
    const std::int64_t c = 1 + static_cast<std::int64_t>(rng() % 1000);
    const std::int64_t d = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n));
    const PlanInput in{n, p, c, SearchMode::kExactInteger};
    const PlanResult r = memory_report(in, d);
    CHECK(r.ratio * static_cast<double>(n * p * kBytesPerReal) ==
          doctest::Approx(static_cast<double>(r.bytes_new)).epsilon(1e-12));
    CHECK(r.windows == n / d + 1);
  }
}

TEST_CASE("planner input errors") {
  CHECK_THROWS_AS(optimal_queue_length(PlanInput{0, 4, 2, SearchMode::kPaperGrid}), InputError);
  CHECK_THROWS_AS(optimal_queue_length(PlanInput{100, 0, 2, SearchMode::kPaperGrid}), InputError);
  CHECK_THROWS_AS(optimal_queue_length(PlanInput{100, 4, -1, SearchMode::kPaperGrid}), InputError);
  // Below the grid floor the search starts at 1.
  const PlanResult small = optimal_queue_length(PlanInput{500, 4, 2, SearchMode::kPaperGrid});
  CHECK(small.d_star >= 1);
  CHECK(small.d_star <= 500);
}
