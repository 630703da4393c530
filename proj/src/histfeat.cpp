#include "fooddet/histfeat.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <numeric>

namespace fooddet {

RgbImage RgbImage::filled(std::size_t w, std::size_t h, std::uint8_t r, std::uint8_t g,
                          std::uint8_t b) {
  RgbImage img{w, h, {}};
  img.pixels.reserve(w * h * 3);
  for (std::size_t i = 0; i < w * h; ++i) {
    img.pixels.push_back(r);
    img.pixels.push_back(g);
    img.pixels.push_back(b);
  }
  return img;
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
    tok.push_back(static_cast<char>(bytes[pos++]));
  }
  return tok;
}

std::size_t header_number(std::span<const std::uint8_t> bytes, std::size_t& pos,
                          const char* what) {
  const auto tok = header_token(bytes, pos);
  if (tok.empty() || tok.size() > 9 ||
      !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(c); })) {
    if (tok.empty()) throw CorruptionError(std::string("PPM header truncated before ") + what);
    throw FormatError(std::string("PPM header has invalid ") + what + " '" + tok + "'");
  }
  return std::stoul(tok);
}

}  // namespace

RgbImage decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  if (header_token(bytes, pos) != "P6") throw FormatError("not a binary PPM (P6) image");
  RgbImage img;
  img.width = header_number(bytes, pos, "width");
  img.height = header_number(bytes, pos, "height");
  const auto maxval = header_number(bytes, pos, "maxval");
  if (img.width == 0 || img.height == 0) throw FormatError("PPM image has zero size");
  if (maxval != 255) throw FormatError("PPM maxval must be 255, got " + std::to_string(maxval));
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= bytes.size()) throw CorruptionError("PPM truncated after header");
  ++pos;
  const std::size_t need = img.width * img.height * 3;
  if (bytes.size() - pos < need) {
    throw CorruptionError("PPM pixel data truncated: need " + std::to_string(need) + " bytes, have " +
                          std::to_string(bytes.size() - pos));
  }
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return img;
}

RgbImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  try {
    return decode_ppm(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
  if (img.pixels.size() != img.width * img.height * 3) {
    throw ValidationError("image pixel buffer does not match its size");
  }
  const auto header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

void save_image(const RgbImage& img, const std::filesystem::path& path) {
  const auto bytes = encode_ppm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write image '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ColorHistogram color_histogram(const RgbImage& img, int bins) {
  if (bins < 2 || bins > 16) throw DomainError("histogram bins must be in [2, 16]");
  const std::size_t pixels = img.width * img.height;
  if (pixels == 0 || img.pixels.size() != pixels * 3) {
    throw ValidationError("image is empty or its pixel buffer is inconsistent");
  }
  const auto b = static_cast<std::size_t>(bins);
  std::vector<std::size_t> counts(b * b * b, 0);
  for (std::size_t p = 0; p < pixels; ++p) {
    const std::size_t r = img.pixels[3 * p] * b / 256;
    const std::size_t g = img.pixels[3 * p + 1] * b / 256;
    const std::size_t bl = img.pixels[3 * p + 2] * b / 256;
    ++counts[(r * b + g) * b + bl];
  }
  ColorHistogram h;
  h.bins_per_channel = bins;
  h.values.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    h.values[i] = static_cast<double>(counts[i]) / static_cast<double>(pixels);
  }
  return h;
}

std::vector<double> histogram_features(const RgbImage& img, int bins) {
  return color_histogram(img, bins).values;
}

std::vector<std::string> select_by_variance(
    std::span<const std::pair<std::string, ColorHistogram>> category, std::size_t n_keep) {
  if (category.empty()) throw ValidationError("cannot select from an empty category");
  if (n_keep == 0) throw ValidationError("n_keep must be at least 1");
  const std::size_t len = category.front().second.values.size();
  for (const auto& [id, h] : category) {
    if (h.values.size() != len) throw ShapeError("histograms in a category differ in length");
  }
  std::vector<std::string_view> ids;
  for (const auto& entry : category) ids.push_back(entry.first);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw ValidationError("duplicate id in category");
  }

  std::vector<double> mean(len, 0.0);
  for (const auto& [id, h] : category) {
    for (std::size_t i = 0; i < len; ++i) mean[i] += h.values[i];
  }
  for (auto& m : mean) m /= static_cast<double>(category.size());

  std::vector<double> score(category.size(), 0.0);
  for (std::size_t c = 0; c < category.size(); ++c) {
    for (std::size_t i = 0; i < len; ++i) {
      const double diff = category[c].second.values[i] - mean[i];
      score[c] += diff * diff;
    }
  }
  std::vector<std::size_t> order(category.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return category[a].first < category[b].first;
  });
  order.resize(std::min(n_keep, order.size()));
  std::vector<std::string> out;
  out.reserve(order.size());
  for (auto idx : order) out.push_back(category[idx].first);
  return out;
}

}  // namespace fooddet
