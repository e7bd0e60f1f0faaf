#pragma once

#include <vector>

#include "sleepgp/common.hpp"

namespace sleepgp {

struct PcaModel {
  std::vector<double> mean;        // column means of the fit data
  std::vector<double> col_scale;   // 1/sd when standardized (0 for constant columns)
  bool standardized = true;
  Matrix axes;                     // all principal axes, one per row, unit length
  std::vector<double> explained_ratio;  // non-increasing, sums to 1
  int retained = 0;                // minimal prefix reaching the variance threshold
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
// (eigenvalues, eigenvectors) sorted by descending eigenvalue; eigenvectors
// are the rows of the second result.
std::pair<std::vector<double>, Matrix> jacobi_eigensymm(Matrix a);

// Covariance (divisor n-1) PCA; columns are z-scored first when standardize
// is set, so the decomposition runs on the correlation matrix.
PcaModel pca_fit(const Matrix& x, double var_threshold = 0.95, bool standardize = true);

// Project onto the first n_components axes (retained count when <= 0).
Matrix pca_transform(const PcaModel& m, const Matrix& x, int n_components = 0);

}  // namespace sleepgp
