#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fooddet/matrix.hpp"

namespace fooddet {

enum class Label : int { kFood = 1, kNonFood = -1 };
enum class Split { kTrain, kVal, kTest };

inline int sign_of(Label l) noexcept { return static_cast<int>(l); }
std::string_view to_string(Label l);
std::string_view to_string(Split s);
std::optional<Label> parse_label(std::string_view token);
std::optional<Split> parse_split(std::string_view token);

/// n x d feature rows with one unique identifier per row. Values are finite.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  /// Validates shape, id uniqueness and finiteness.
  FeatureMatrix(Matrix values, std::vector<std::string> ids);
  /// An n = 0 matrix that still remembers its feature dimension.
  static FeatureMatrix empty(std::size_t d);

  std::size_t n() const noexcept { return values_.rows(); }
  std::size_t d() const noexcept { return values_.cols(); }
  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const double> row(std::size_t i) const noexcept { return values_.row(i); }

  bool operator==(const FeatureMatrix&) const = default;

 private:
  Matrix values_;
  std::vector<std::string> ids_;
};

inline constexpr char kFeatureMagic[4] = {'F', 'V', 'B', '1'};
inline constexpr std::uint32_t kFeatureVersion = 1;

FeatureMatrix read_feature_file(const std::filesystem::path& path);
void write_feature_file(const FeatureMatrix& m, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_features(const FeatureMatrix& m);
FeatureMatrix decode_features(std::span<const std::uint8_t> bytes);

struct ManifestEntry {
  std::string id;
  std::string path;
  Label label = Label::kFood;
  std::optional<Split> split;  // unset until a split protocol assigns one
  std::string group;           // optional source group / category column

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::size_t count(Split s) const;
  bool has_groups() const;
  bool operator==(const DatasetManifest&) const = default;
};

/// Parses `id,path,label,split[,group]` CSV. An empty split field means unassigned.
DatasetManifest parse_manifest(std::string_view text);
DatasetManifest read_manifest(const std::filesystem::path& path);
std::string format_manifest(const DatasetManifest& manifest);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct AlignedSet {
  FeatureMatrix features;
  std::vector<int> labels;  // +1 food, -1 nonfood
};

/// Rows of `m` for the manifest entries in `split`, in manifest order.
AlignedSet align(const FeatureMatrix& m, const DatasetManifest& manifest, Split split);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace fooddet
