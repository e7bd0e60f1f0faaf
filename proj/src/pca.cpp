#include "sleepgp/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sleepgp {

std::pair<std::vector<double>, Matrix> jacobi_eigensymm(Matrix a) {
  const size_t n = a.size();
  for (const auto& row : a)
    if (row.size() != n) throw data_error("jacobi: matrix must be square");

  Matrix v(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  double fro0 = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) fro0 += a[i][j] * a[i][j];
  fro0 = std::sqrt(fro0);
  // Off-diagonal Frobenius target, scaled by the matrix magnitude so large
  // covariances still converge in double precision.
  const double tol = 1e-12 * std::max(1.0, fro0);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < n; ++p)
      for (size_t q = p + 1; q < n; ++q) off += 2.0 * a[p][q] * a[p][q];
    if (std::sqrt(off) < tol) break;

    for (size_t p = 0; p + 1 < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        double apq = a[p][q];
        if (std::abs(apq) == 0.0) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;

        double app = a[p][p], aqq = a[q][q];
        a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
        a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
        a[p][q] = a[q][p] = 0.0;
        for (size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = a[p][k] = c * akp - s * akq;
          a[k][q] = a[q][k] = s * akp + c * akq;
        }
        for (size_t k = 0; k < n; ++k) {
          double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (size_t i = 0; i < n; ++i) eig[i] = a[i][i];

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t i, size_t j) { return eig[i] > eig[j]; });

  std::vector<double> w(n);
  Matrix vec(n, std::vector<double>(n));
  for (size_t r = 0; r < n; ++r) {
    w[r] = eig[order[r]];
    for (size_t k = 0; k < n; ++k) vec[r][k] = v[k][order[r]];
    // Deterministic sign: largest-magnitude entry positive.
    size_t arg = 0;
    for (size_t k = 1; k < n; ++k)
      if (std::abs(vec[r][k]) > std::abs(vec[r][arg])) arg = k;
    if (vec[r][arg] < 0.0)
      for (auto& x : vec[r]) x = -x;
  }
  return {std::move(w), std::move(vec)};
}

PcaModel pca_fit(const Matrix& x, double var_threshold, bool standardize) {
  if (x.empty()) throw data_error("pca: empty input");
  const size_t n = x.size(), d = x.front().size();
  if (n < 2) throw data_error("pca: need at least 2 rows");
  if (var_threshold <= 0.0 || var_threshold > 1.0)
    throw config_error("pca: variance threshold must be in (0, 1]");

  PcaModel m;
  m.standardized = standardize;
  m.mean.assign(d, 0.0);
  for (const auto& row : x)
    for (size_t j = 0; j < d; ++j) m.mean[j] += row[j];
  for (auto& v : m.mean) v /= static_cast<double>(n);

  m.col_scale.assign(d, 1.0);
  if (standardize) {
    std::vector<double> var(d, 0.0);
    for (const auto& row : x)
      for (size_t j = 0; j < d; ++j) {
        double dv = row[j] - m.mean[j];
        var[j] += dv * dv;
      }
    for (size_t j = 0; j < d; ++j) {
      double sd = std::sqrt(var[j] / static_cast<double>(n - 1));
      m.col_scale[j] = sd < 1e-12 ? 0.0 : 1.0 / sd;
    }
  }

  Matrix z(n, std::vector<double>(d));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j)
      z[i][j] = (x[i][j] - m.mean[j]) * m.col_scale[j];

  Matrix cov(d, std::vector<double>(d, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j)
      for (size_t k = j; k < d; ++k) cov[j][k] += z[i][j] * z[i][k];
  for (size_t j = 0; j < d; ++j)
    for (size_t k = j; k < d; ++k) {
      cov[j][k] /= static_cast<double>(n - 1);
      cov[k][j] = cov[j][k];
    }

  auto [eig, vec] = jacobi_eigensymm(cov);
  double total = 0.0;
  for (double& e : eig) {
    if (e < 0.0) e = 0.0;  // numerical noise on rank-deficient input
    total += e;
  }
  if (total <= 0.0) throw data_error("pca: zero total variance");

  m.axes = std::move(vec);
  m.explained_ratio.resize(d);
  for (size_t j = 0; j < d; ++j) m.explained_ratio[j] = eig[j] / total;

  double cum = 0.0;
  m.retained = static_cast<int>(d);
  for (size_t j = 0; j < d; ++j) {
    cum += m.explained_ratio[j];
    if (cum >= var_threshold - 1e-12) {
      m.retained = static_cast<int>(j + 1);
      break;
    }
  }
  return m;
}

Matrix pca_transform(const PcaModel& m, const Matrix& x, int n_components) {
  const size_t d = m.mean.size();
  size_t nc = n_components > 0 ? static_cast<size_t>(n_components)
                               : static_cast<size_t>(m.retained);
  if (nc > m.axes.size()) throw data_error("pca: component count exceeds axes");
  Matrix out;
  out.reserve(x.size());
  for (const auto& row : x) {
    if (row.size() != d) throw data_error("pca: dimension mismatch");
    std::vector<double> proj(nc, 0.0);
    for (size_t c = 0; c < nc; ++c) {
      double acc = 0.0;
      for (size_t j = 0; j < d; ++j)
        acc += (row[j] - m.mean[j]) * m.col_scale[j] * m.axes[c][j];
      proj[c] = acc;
    }
    out.push_back(std::move(proj));
  }
  return out;
}

}  // namespace sleepgp
