#include "fooddet/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fooddet {

Matrix covariance(const FeatureMatrix& m) {
  const std::size_t n = m.n();
  const std::size_t d = m.d();
  if (n < 2) throw InsufficientDataError("covariance needs at least 2 rows");

  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
  }
  for (auto& v : mean) v /= static_cast<double>(n);

  // Upper triangle accumulation of centered outer products, mirrored at the end.
  Matrix c(d, d);
  std::vector<double> centered(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < d; ++j) centered[j] = row[j] - mean[j];
    for (std::size_t j = 0; j < d; ++j) {
      const double xj = centered[j];
      if (xj == 0.0) continue;
      auto crow = c.row(j);
      for (std::size_t l = j; l < d; ++l) crow[l] += xj * centered[l];
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t l = j; l < d; ++l) {
      c(j, l) /= denom;
      c(l, j) = c(j, l);
    }
  }
  return c;
}

namespace {

double frobenius(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t p = 0; p < a.rows(); ++p) {
    for (std::size_t q = p + 1; q < a.cols(); ++q) s += 2.0 * a(p, q) * a(p, q);
  }
  return std::sqrt(s);
}

// Annihilates a(p, q) with one Jacobi rotation. `vt` holds eigenvectors as rows.
void rotate(Matrix& a, Matrix& vt, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  const std::size_t d = a.rows();
  for (std::size_t k = 0; k < d; ++k) {
    if (k == p || k == q) continue;
    const double akp = a(k, p);
    const double akq = a(k, q);
    const double np = c * akp - s * akq;
    const double nq = s * akp + c * akq;
    a(k, p) = np;
    a(p, k) = np;
    a(k, q) = nq;
    a(q, k) = nq;
  }
  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;

  auto vp = vt.row(p);
  auto vq = vt.row(q);
  for (std::size_t k = 0; k < d; ++k) {
    const double x = vp[k];
    const double y = vq[k];
    vp[k] = c * x - s * y;
    vq[k] = s * x + c * y;
  }
}

void normalize_sign(std::span<double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (v[best] < 0.0) {
    for (auto& x : v) x = -x;
  }
}

}  // namespace

EigenDecomposition sym_eigen(const Matrix& c, const JacobiOptions& options) {
  const std::size_t d = c.rows();
  if (c.cols() != d) throw ShapeError("eigensolver needs a square matrix");
  for (std::size_t p = 0; p < d; ++p) {
    for (std::size_t q = p + 1; q < d; ++q) {
      if (!(std::abs(c(p, q) - c(q, p)) <= options.symmetry_tolerance)) {
        throw ValidationError("matrix is not symmetric at (" + std::to_string(p) + ", " +
                              std::to_string(q) + ")");
      }
    }
  }

  // Work on the symmetrized copy so tiny input asymmetry cannot bias rotations.
  Matrix a(d, d);
  for (std::size_t p = 0; p < d; ++p) {
    for (std::size_t q = 0; q < d; ++q) a(p, q) = 0.5 * (c(p, q) + c(q, p));
  }
  Matrix vt = Matrix::identity(d);
  const double threshold = options.relative_tolerance * frobenius(a);

  int sweep = 0;
  while (off_diagonal_norm(a) > threshold) {
    if (sweep == options.max_sweeps) {
      throw ConvergenceError("Jacobi eigensolver did not converge in " +
                             std::to_string(options.max_sweeps) + " sweeps");
    }
    ++sweep;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        if (a(p, q) != 0.0) rotate(a, vt, p, q);
      }
    }
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.sweeps = sweep;
  out.values.resize(d);
  out.vectors = Matrix(d, d);
  for (std::size_t r = 0; r < d; ++r) {
    out.values[r] = a(order[r], order[r]);
    const auto src = vt.row(order[r]);
    auto dst = out.vectors.row(r);
    std::copy(src.begin(), src.end(), dst.begin());
    normalize_sign(dst);
  }
  return out;
}

PcaModel fit_pca(const FeatureMatrix& standardized_train, const JacobiOptions& options) {
  const auto eig = sym_eigen(covariance(standardized_train), options);

  PcaModel model;
  model.kaiser_count = static_cast<std::size_t>(
      std::count_if(eig.values.begin(), eig.values.end(), [](double v) { return v > 1.0; }));
  const std::size_t k = std::max<std::size_t>(model.kaiser_count, 1);
  const std::size_t d = standardized_train.d();

  model.eigenvalues.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(k));
  model.components = Matrix(k, d);
  for (std::size_t r = 0; r < k; ++r) {
    const auto src = eig.vectors.row(r);
    std::copy(src.begin(), src.end(), model.components.row(r).begin());
  }
  return model;
}

FeatureMatrix project(const PcaModel& p, const FeatureMatrix& m) {
  if (m.d() != p.d()) {
    throw ShapeError("PCA expects dimension " + std::to_string(p.d()) + ", got " +
                     std::to_string(m.d()));
  }
  Matrix out(m.n(), p.k());
  for (std::size_t i = 0; i < m.n(); ++i) {
    const auto x = m.row(i);
    for (std::size_t r = 0; r < p.k(); ++r) out(i, r) = dot(x, p.components.row(r));
  }
  return FeatureMatrix(std::move(out), m.ids());
}

}  // namespace fooddet
