#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fooddet/tensorio.hpp"

namespace fooddet {

struct KernelParams {
  double gamma = 1.0;
  double coef0 = 0.0;
  bool operator==(const KernelParams&) const = default;
};

/// tanh(gamma * <x, y> + coef0)
double sigmoid_kernel(std::span<const double> x, std::span<const double> y, const KernelParams& p);

struct SvmSettings {
  double tol = 1e-3;                       // stop once the maximal KKT violation is below this
  std::uint64_t max_iter = 10'000'000;     // pair updates
  std::size_t cache_bytes = 512ull << 20;  // kernel row cache budget
  bool audit = false;                      // track the dual objective after every update
};

struct TrainingMeta {
  std::uint64_t iterations = 0;
  double kkt_violation = 0.0;
  bool converged = false;
  double dual_objective = 0.0;
  std::uint64_t objective_decreases = 0;  // only counted in audit mode
  bool operator==(const TrainingMeta&) const = default;
};

struct SvmModel {
  KernelParams params;
  double c = 1.0;
  std::size_t dim = 0;
  Matrix support_vectors;          // m x dim
  std::vector<double> dual_coefs;  // alpha_i * y_i
  double bias = 0.0;
  TrainingMeta meta;
  bool operator==(const SvmModel&) const = default;
};

/// Soft-margin SVM dual solved by SMO with maximal-violating-pair selection.
///
/// Labels must be +1/-1 with both classes present. Reaching max_iter is not an
/// error: the model comes back with meta.converged == false.
SvmModel smo_train(const Matrix& x, std::span<const int> y, double c, const KernelParams& params,
                   const SvmSettings& settings = {});

double decision(const SvmModel& m, std::span<const double> x);
/// sign(decision) per row, with 0 mapped to +1.
std::vector<int> predict(const SvmModel& m, const Matrix& x);
std::vector<int> predict(const SvmModel& m, const FeatureMatrix& x);

}  // namespace fooddet
