#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fooddet/tensorio.hpp"

namespace fooddet {

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB triples

  static RgbImage filled(std::size_t w, std::size_t h, std::uint8_t r, std::uint8_t g,
                         std::uint8_t b);
  bool operator==(const RgbImage&) const = default;
};

/// Binary PPM (P6, maxval 255) only.
RgbImage decode_ppm(std::span<const std::uint8_t> bytes);
RgbImage load_image(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_ppm(const RgbImage& img);
void save_image(const RgbImage& img, const std::filesystem::path& path);

inline constexpr int kDefaultBins = 8;

struct ColorHistogram {
  int bins_per_channel = kDefaultBins;
  std::vector<double> values;  // bins^3 entries, r-major, sums to 1
};

/// Joint RGB histogram normalized by pixel count; bins in [2, 16].
ColorHistogram color_histogram(const RgbImage& img, int bins);

/// The 8-bins-per-channel histogram as a 512-long feature row.
std::vector<double> histogram_features(const RgbImage& img, int bins = kDefaultBins);

/// Ids of the n_keep histograms farthest (squared Euclidean) from the category
/// mean. Ties go to the lexicographically smaller id. Returned in that ranking order.
std::vector<std::string> select_by_variance(
    std::span<const std::pair<std::string, ColorHistogram>> category, std::size_t n_keep);

}  // namespace fooddet
