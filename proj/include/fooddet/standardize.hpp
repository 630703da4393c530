#pragma once

#include <vector>

#include "fooddet/tensorio.hpp"

namespace fooddet {

/// Per-dimension z-scoring fitted on the training rows.
struct StandardizerModel {
  std::vector<double> mean;
  std::vector<double> scale;  // population std-dev; 1.0 where a column is constant

  std::size_t d() const noexcept { return mean.size(); }
  bool operator==(const StandardizerModel&) const = default;
};

StandardizerModel fit_standardizer(const FeatureMatrix& train);
FeatureMatrix apply_standardizer(const StandardizerModel& s, const FeatureMatrix& m);

}  // namespace fooddet
