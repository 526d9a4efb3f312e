#pragma once

#include <map>

#include "igam/stats.hpp"

namespace igam {

/// Eigenvalue floor used to regularize a sample covariance of `samples`
/// observations in `dim` dimensions: (1 - sqrt(dim / samples))^2.
struct ShrinkageSpec {
  int dim = 0;
  std::size_t samples = 0;

  double lambda_minus() const;
};

/// Per-category information amount in bits.
struct InfoAmountTable {
  std::map<CategoryId, double> entries;
  int epoch = 0;
};

/// Eigen-decompose `cov`, raise every eigenvalue to at least lambda_minus and
/// reconstruct. Throws InputError when `cov` is not symmetric.
Matrix shrink_covariance(const Matrix& cov, const ShrinkageSpec& spec);

/// Half the base-2 log-determinant of (I + cov), evaluated as
/// 0.5 * sum_k log2(1 + lambda_k) over the eigenvalues of `cov`.
double information_amount(const Matrix& cov);

/// Population covariance of the rows of `embeddings` (one embedding per row),
/// shrunk and measured as above.
double information_amount_from_embeddings(const Matrix& embeddings);

/// Information amount of merged statistics, using stats.total as the sample count.
double information_amount(const CategoryStats& stats);

/// Information amounts for every category present in `stats`. Categories
/// absent from `stats` keep their value from `previous`, when it has one.
InfoAmountTable compute_info_table(const GlobalStats& stats, int epoch,
                                   const InfoAmountTable* previous = nullptr);

}  // namespace igam
