#include "igam/info_amount.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "igam/error.hpp"

namespace igam {
namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kPsdTolerance = 1e-6;

void check_square_symmetric(const Matrix& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw InputError(std::string(who) + ": expected a non-empty square matrix");
  }
  if (!a.allFinite()) throw InputError(std::string(who) + ": matrix has non-finite entries");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw InputError(std::string(who) + ": matrix is not symmetric");
  }
}

Eigen::SelfAdjointEigenSolver<Matrix> decompose(const Matrix& a, Eigen::DecompositionOptions opt) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, opt);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition did not converge");
  }
  return solver;
}

}  // namespace

double ShrinkageSpec::lambda_minus() const {
  if (dim < 1 || samples < 1) throw InputError("shrinkage needs dim >= 1 and samples >= 1");
  const double ratio = static_cast<double>(dim) / static_cast<double>(samples);
  const double edge = 1.0 - std::sqrt(ratio);
  return edge * edge;
}

Matrix shrink_covariance(const Matrix& cov, const ShrinkageSpec& spec) {
  check_square_symmetric(cov, "shrink_covariance");
  if (cov.rows() != spec.dim) throw InputError("shrink_covariance: dimension does not match spec");
  const double floor = spec.lambda_minus();
  const auto solver = decompose(cov, Eigen::ComputeEigenvectors);
  // Slightly negative eigenvalues are rounding noise of a PSD matrix.
  const Vector clipped = solver.eigenvalues().cwiseMax(0.0).cwiseMax(floor);
  const Matrix& v = solver.eigenvectors();
  Matrix out = v * clipped.asDiagonal() * v.transpose();
  symmetrize(out);
  return out;
}

double information_amount(const Matrix& cov) {
  check_square_symmetric(cov, "information_amount");
  const auto solver = decompose(cov, Eigen::EigenvaluesOnly);
  double bits = 0.0;
  for (double lambda : solver.eigenvalues()) {
    if (lambda < -kPsdTolerance) {
      throw InputError("information_amount: matrix is not positive semidefinite (eigenvalue " +
                       std::to_string(lambda) + ")");
    }
    bits += std::log1p(std::max(lambda, 0.0));
  }
  return 0.5 * bits / std::numbers::ln2;
}

double information_amount_from_embeddings(const Matrix& embeddings) {
  const Eigen::Index m = embeddings.rows();
  const Eigen::Index p = embeddings.cols();
  if (m == 0) throw InputError("information_amount_from_embeddings: no embeddings");
  if (p == 0) throw InputError("information_amount_from_embeddings: zero-dimensional embeddings");
  if (!embeddings.allFinite()) throw InputError("information_amount_from_embeddings: non-finite input");

  const Eigen::RowVectorXd mean = embeddings.colwise().mean();
  const Matrix centered = embeddings.rowwise() - mean;
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(m);
  symmetrize(cov);
  const ShrinkageSpec spec{static_cast<int>(p), static_cast<std::size_t>(m)};
  return information_amount(shrink_covariance(cov, spec));
}

double information_amount(const CategoryStats& stats) {
  if (stats.total == 0) throw InputError("information_amount: category has no samples");
  const ShrinkageSpec spec{static_cast<int>(stats.cov.rows()), stats.total};
  return information_amount(shrink_covariance(stats.cov, spec));
}

InfoAmountTable compute_info_table(const GlobalStats& stats, int epoch,
                                   const InfoAmountTable* previous) {
  InfoAmountTable table;
  table.epoch = epoch;
  for (const auto& [id, entry] : stats.categories) {
    const double bits = information_amount(entry);
    if (!std::isfinite(bits)) {
      throw NumericalError("information amount of category " + std::to_string(id) + " is not finite");
    }
    table.entries[id] = bits;
  }
  if (previous != nullptr) {
    for (CategoryId id : stats.absent) {
      if (auto it = previous->entries.find(id); it != previous->entries.end()) {
        table.entries.emplace(id, it->second);
      }
    }
  }
  return table;
}

}  // namespace igam
