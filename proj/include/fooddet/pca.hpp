#pragma once

#include <vector>

#include "fooddet/tensorio.hpp"

namespace fooddet {

/// Sample covariance (n - 1 denominator) of the rows of `m`.
Matrix covariance(const FeatureMatrix& m);

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // row i is the unit eigenvector of values[i]
  int sweeps = 0;
};

struct JacobiOptions {
  int max_sweeps = 100;
  double relative_tolerance = 1e-10;  // on the off-diagonal Frobenius norm, relative to ||C||_F
  double symmetry_tolerance = 1e-9;
};

/// Cyclic Jacobi eigensolver for a symmetric matrix.
///
/// Eigenvectors are sign-normalized so that the entry of largest magnitude is
/// positive (the lowest index wins ties), which makes the output reproducible.
/// Throws ValidationError for asymmetric input and ConvergenceError when the
/// sweep cap is reached.
EigenDecomposition sym_eigen(const Matrix& c, const JacobiOptions& options = {});

struct PcaModel {
  Matrix components;                // k x d, orthonormal rows
  std::vector<double> eigenvalues;  // k, descending
  std::size_t kaiser_count = 0;     // eigenvalues strictly above 1 (0 means the k = 1 fallback)

  std::size_t d() const noexcept { return components.cols(); }
  std::size_t k() const noexcept { return components.rows(); }
  bool used_fallback() const noexcept { return kaiser_count == 0; }
  bool operator==(const PcaModel&) const = default;
};

/// Keeps the components whose eigenvalue exceeds 1, or the leading one if none does.
PcaModel fit_pca(const FeatureMatrix& standardized_train, const JacobiOptions& options = {});
FeatureMatrix project(const PcaModel& p, const FeatureMatrix& m);

}  // namespace fooddet
