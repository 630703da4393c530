#include "fooddet/standardize.hpp"

#include <cmath>

namespace fooddet {

StandardizerModel fit_standardizer(const FeatureMatrix& train) {
  const std::size_t n = train.n();
  const std::size_t d = train.d();
  if (n < 2) throw InsufficientDataError("standardizer needs at least 2 training rows");

  StandardizerModel s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = train.row(i);
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += row[j];
  }
  for (auto& m : s.mean) m /= static_cast<double>(n);

  // Second pass on centered values.
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = train.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double c = row[j] - s.mean[j];
      s.scale[j] += c * c;
    }
  }
  for (auto& v : s.scale) {
    v = std::sqrt(v / static_cast<double>(n));
    if (v == 0.0) v = 1.0;
  }
  return s;
}

FeatureMatrix apply_standardizer(const StandardizerModel& s, const FeatureMatrix& m) {
  if (m.d() != s.d()) {
    throw ShapeError("standardizer expects dimension " + std::to_string(s.d()) + ", got " +
                     std::to_string(m.d()));
  }
  Matrix out(m.n(), m.d());
  for (std::size_t i = 0; i < m.n(); ++i) {
    const auto src = m.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < m.d(); ++j) dst[j] = (src[j] - s.mean[j]) / s.scale[j];
  }
  return FeatureMatrix(std::move(out), m.ids());
}

}  // namespace fooddet
