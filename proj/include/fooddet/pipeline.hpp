#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fooddet/modelsearch.hpp"
#include "fooddet/pca.hpp"
#include "fooddet/standardize.hpp"
#include "fooddet/svm.hpp"

namespace fooddet {

inline constexpr int kPipelineVersion = 1;

struct Provenance {
  std::uint64_t seed = 42;
  std::size_t folds = 3;
  GridAxis grid_c = kStandardCAxis;
  GridAxis grid_gamma = kStandardGammaAxis;
  double best_c = 0.0;
  double best_gamma = 0.0;
  double best_cv_accuracy = 0.0;
  std::size_t train_rows = 0;
  std::uint32_t manifest_digest = 0;
  bool operator==(const Provenance&) const = default;
};

/// Standardizer -> optional PCA -> SVM, the full raw-feature-to-label chain.
struct PipelineModel {
  int version = kPipelineVersion;
  StandardizerModel standardizer;
  std::optional<PcaModel> pca;  // absent for the no-PCA variant
  SvmModel svm;
  Provenance provenance;

  std::size_t input_dim() const noexcept { return standardizer.d(); }
  /// Throws ValidationError when stage dimensions do not chain.
  void validate() const;
  /// Standardized and projected features, i.e. what the SVM sees.
  FeatureMatrix reduce(const FeatureMatrix& raw) const;
  std::vector<double> decision_values(const FeatureMatrix& raw) const;
  std::vector<int> predict(const FeatureMatrix& raw) const;

  bool operator==(const PipelineModel&) const = default;
};

struct FitConfig {
  std::uint64_t seed = 42;
  std::size_t folds = 3;
  GridAxis grid_c = kStandardCAxis;
  GridAxis grid_gamma = kStandardGammaAxis;
  bool use_pca = true;
  SearchSettings search;
};

struct FitOutcome {
  PipelineModel model;
  SearchResult search;
};

/// Standardize, PCA, 3-fold grid search, then retrain on every training row.
FitOutcome fit_pipeline(const AlignedSet& train, const FitConfig& config,
                        std::uint32_t manifest_digest = 0);

std::uint32_t crc32_of(std::string_view bytes);
/// Digest of the (id, label) pairs of the training split, in manifest order.
std::uint32_t training_digest(const DatasetManifest& manifest);

/// Sectioned text with 17-significant-digit numbers and a trailing CRC32 line.
std::string serialize_model(const PipelineModel& model);
PipelineModel deserialize_model(std::string_view text);
void save_model(const PipelineModel& model, const std::filesystem::path& path);
PipelineModel load_model(const std::filesystem::path& path);

}  // namespace fooddet
