#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fooddet/metrics.hpp"
#include "fooddet/pipeline.hpp"
#include "fooddet/tensorio.hpp"

namespace fooddet {

namespace fs = std::filesystem;

enum class SplitProtocol { kFcd, kRagusa, kFractional };

/// Manifest group tokens understood by the ragusa protocol.
inline constexpr std::string_view kGroupUnict = "unict";
inline constexpr std::string_view kGroupFlickrFood = "flickr_food";
inline constexpr std::string_view kGroupFlickrNonFood = "flickr_nonfood";

struct SplitOptions {
  SplitProtocol protocol = SplitProtocol::kFcd;
  double test_fraction = 0.2;  // of everything
  double val_fraction = 0.2;   // of what remains after the test split
  std::uint64_t seed = 42;
};

std::optional<SplitProtocol> parse_protocol(std::string_view token);

/// Assigns train/val/test. Refuses manifests that already carry splits unless `force`.
///
/// fcd / fractional: per-label seeded shuffle; the test and val totals are
/// rounded once and shared across labels by largest remainder.
/// ragusa: unict plus the leading flickr_nonfood rows (as many as there are
/// unict rows, in file order) form the train/val pool split by val_fraction;
/// flickr_food and the remaining flickr_nonfood rows are test.
DatasetManifest split_manifest(const DatasetManifest& in, const SplitOptions& options, bool force = false);

void cmd_split(const fs::path& in, const fs::path& out, const SplitOptions& options, bool force);

/// Histogram features for every manifest entry, in manifest order. Relative
/// image paths resolve against the manifest's directory.
FeatureMatrix extract_features(const DatasetManifest& manifest, const fs::path& base_dir, int bins);
void cmd_extract(const fs::path& manifest, const fs::path& out, int bins);

/// Keeps, per food group (category), the `keep` images whose histograms are
/// farthest from the group mean. Nonfood entries pass through.
DatasetManifest curate_manifest(const DatasetManifest& manifest, const fs::path& base_dir,
                                std::size_t keep, int bins);
void cmd_curate(const fs::path& manifest, const fs::path& out, std::size_t keep, int bins);

struct FitPaths {
  fs::path features;
  fs::path manifest;
  fs::path model_out;
  fs::path search_csv_out;
};
FitOutcome cmd_fit(const FitPaths& paths, const FitConfig& config);

/// Writes <prefix>.csv, <prefix>_fp_ids.txt and <prefix>_fn_ids.txt.
EvalReport cmd_evaluate(const fs::path& model, const fs::path& features, const fs::path& manifest,
                        Split split, const fs::path& out_prefix);

/// `id,label,decision_value` rows in feature-file order.
std::string format_predictions(const PipelineModel& model, const FeatureMatrix& features);
void cmd_predict(const fs::path& model, const fs::path& features, const fs::path& out_csv);

/// Text summary of a search CSV and/or evaluation reports (plus their merge).
std::string cmd_report(const std::optional<fs::path>& search_csv,
                       const std::vector<fs::path>& eval_csvs);

}  // namespace fooddet
