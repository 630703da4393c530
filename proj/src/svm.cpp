#include "fooddet/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

namespace fooddet {

double sigmoid_kernel(std::span<const double> x, std::span<const double> y, const KernelParams& p) {
  if (x.size() != y.size()) {
    throw ShapeError("kernel arguments differ in length (" + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()) + ")");
  }
  return std::tanh(p.gamma * dot(x, y) + p.coef0);
}

namespace {

constexpr double kTau = 1e-12;
constexpr double kSupportThreshold = 1e-12;

// LRU cache of signed kernel rows Q_i[j] = y_i y_j K(x_i, x_j).
class KernelRowCache {
 public:
  KernelRowCache(const Matrix& x, std::span<const int> y, const KernelParams& params,
                 std::size_t budget_bytes)
      : x_(x), y_(y), params_(params) {
    const std::size_t row_bytes = std::max<std::size_t>(x.rows(), 1) * sizeof(double);
    capacity_ = std::max<std::size_t>(budget_bytes / row_bytes, 2);
  }

  // The returned span stays valid until two further distinct rows are requested.
  std::span<const double> row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->values;
    }
    std::vector<double> values;
    if (lru_.size() >= capacity_) {
      values = std::move(lru_.back().values);
      index_.erase(lru_.back().row);
      lru_.pop_back();
    }
    values.resize(x_.rows());
    const auto xi = x_.row(i);
    for (std::size_t j = 0; j < x_.rows(); ++j) {
      values[j] = static_cast<double>(y_[i] * y_[j]) *
                  std::tanh(params_.gamma * dot(xi, x_.row(j)) + params_.coef0);
    }
    lru_.push_front({i, std::move(values)});
    index_.emplace(i, lru_.begin());
    return lru_.front().values;
  }

 private:
  struct Entry {
    std::size_t row;
    std::vector<double> values;
  };
  const Matrix& x_;
  std::span<const int> y_;
  KernelParams params_;
  std::size_t capacity_;
  std::list<Entry> lru_;
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

// Dual objective sum(alpha) - 1/2 alpha' Q alpha, via the gradient G = Q alpha - 1.
double dual_from_gradient(std::span<const double> alpha, std::span<const double> grad) {
  double s = 0.0;
  for (std::size_t t = 0; t < alpha.size(); ++t) s += alpha[t] * (grad[t] - 1.0);
  return -0.5 * s;
}

}  // namespace

SvmModel smo_train(const Matrix& x, std::span<const int> y, double c, const KernelParams& params,
                   const SvmSettings& settings) {
  const std::size_t n = x.rows();
  if (y.size() != n) throw ShapeError("label count does not match row count");
  if (n < 2) throw ValidationError("SVM training needs at least 2 samples");
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("C must be positive and finite");
  if (!(params.gamma > 0.0) || !std::isfinite(params.gamma)) {
    throw ValidationError("gamma must be positive and finite");
  }
  if (!std::isfinite(params.coef0)) throw ValidationError("coef0 must be finite");
  bool has_pos = false;
  bool has_neg = false;
  for (int v : y) {
    if (v == 1) {
      has_pos = true;
    } else if (v == -1) {
      has_neg = true;
    } else {
      throw ValidationError("labels must be +1 or -1");
    }
  }
  if (!has_pos || !has_neg) throw ValidationError("SVM training needs both classes present");

  KernelRowCache cache(x, y, params, settings.cache_bytes);
  std::vector<double> diag(n);
  for (std::size_t t = 0; t < n; ++t) diag[t] = sigmoid_kernel(x.row(t), x.row(t), params);

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto in_up = [&](std::size_t t) { return y[t] == 1 ? alpha[t] < c : alpha[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return y[t] == 1 ? alpha[t] > 0.0 : alpha[t] < c; };

  TrainingMeta meta;
  double objective = 0.0;
  while (true) {
    // Maximal violating pair: i maximizes -y G over I_up, j minimizes it over I_low.
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    std::size_t i = n;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > g_max) {
        g_max = v;
        i = t;
      }
      if (in_low(t) && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    meta.kkt_violation = (i == n || j == n) ? 0.0 : g_max - g_min;
    if (meta.kkt_violation < settings.tol) {
      meta.converged = true;
      break;
    }
    if (meta.iterations >= settings.max_iter) break;
    ++meta.iterations;

    const auto qi = cache.row(i);
    const double qij = qi[j];
    const auto qj = cache.row(j);
    const double old_i = alpha[i];
    const double old_j = alpha[j];

    // Curvature along the feasible direction; non-PSD pairs step to the box edge.
    double eta = diag[i] + diag[j] - 2.0 * y[i] * y[j] * qij;
    if (eta <= 0.0) eta = kTau;

    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / eta;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      const double delta = (grad[i] - grad[j]) / eta;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    // qi may have been evicted by the qj fetch only if capacity < 2, which the cache forbids.
    for (std::size_t t = 0; t < n; ++t) grad[t] += qi[t] * di + qj[t] * dj;

    if (settings.audit) {
      const double next = dual_from_gradient(alpha, grad);
      if (next < objective - 1e-12 * std::max(1.0, std::abs(objective))) {
        ++meta.objective_decreases;
      }
      objective = next;
    }
  }
  meta.dual_objective = dual_from_gradient(alpha, grad);

  // Bias: mean over free vectors, else midpoint of the feasible interval.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    const bool at_upper = alpha[t] >= c;
    const bool at_lower = alpha[t] <= 0.0;
    if (at_upper) {
      if (y[t] == -1) {
        upper = std::min(upper, yg);
      } else {
        lower = std::max(lower, yg);
      }
    } else if (at_lower) {
      if (y[t] == 1) {
        upper = std::min(upper, yg);
      } else {
        lower = std::max(lower, yg);
      }
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count)
                                    : 0.5 * (upper + lower);

  SvmModel model;
  model.params = params;
  model.c = c;
  model.dim = x.cols();
  model.bias = -rho;
  model.meta = meta;
  std::vector<std::size_t> support;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > kSupportThreshold) support.push_back(t);
  }
  model.support_vectors = Matrix(support.size(), x.cols());
  model.dual_coefs.reserve(support.size());
  for (std::size_t s = 0; s < support.size(); ++s) {
    const auto src = x.row(support[s]);
    std::copy(src.begin(), src.end(), model.support_vectors.row(s).begin());
    model.dual_coefs.push_back(alpha[support[s]] * y[support[s]]);
  }
  return model;
}

double decision(const SvmModel& m, std::span<const double> x) {
  if (x.size() != m.dim) {
    throw ShapeError("SVM expects dimension " + std::to_string(m.dim) + ", got " +
                     std::to_string(x.size()));
  }
  double f = m.bias;
  for (std::size_t s = 0; s < m.dual_coefs.size(); ++s) {
    f += m.dual_coefs[s] * sigmoid_kernel(m.support_vectors.row(s), x, m.params);
  }
  return f;
}

std::vector<int> predict(const SvmModel& m, const Matrix& x) {
  if (x.rows() > 0 && x.cols() != m.dim) {
    throw ShapeError("SVM expects dimension " + std::to_string(m.dim) + ", got " +
                     std::to_string(x.cols()));
  }
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = decision(m, x.row(i)) >= 0.0 ? 1 : -1;
  return out;
}

std::vector<int> predict(const SvmModel& m, const FeatureMatrix& x) { return predict(m, x.values()); }

}  // namespace fooddet
