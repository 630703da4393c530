#include "fooddet/tensorio.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace fooddet {

std::string_view to_string(Label l) { return l == Label::kFood ? "food" : "nonfood"; }

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "";
}

std::optional<Label> parse_label(std::string_view token) {
  if (token == "food") return Label::kFood;
  if (token == "nonfood") return Label::kNonFood;
  return std::nullopt;
}

std::optional<Split> parse_split(std::string_view token) {
  if (token == "train") return Split::kTrain;
  if (token == "val") return Split::kVal;
  if (token == "test") return Split::kTest;
  return std::nullopt;
}

FeatureMatrix::FeatureMatrix(Matrix values, std::vector<std::string> ids)
    : values_(std::move(values)), ids_(std::move(ids)) {
  if (values_.cols() == 0) throw ValidationError("feature dimension must be at least 1");
  if (ids_.size() != values_.rows()) {
    throw ValidationError("feature matrix has " + std::to_string(values_.rows()) + " rows but " +
                          std::to_string(ids_.size()) + " ids");
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(ids_.size());
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) throw ValidationError("duplicate sample id '" + id + "'");
  }
  for (std::size_t i = 0; i < values_.data().size(); ++i) {
    if (!std::isfinite(values_.data()[i])) {
      throw ValidationError("non-finite feature value in row '" + ids_[i / values_.cols()] + "'");
    }
  }
}

FeatureMatrix FeatureMatrix::empty(std::size_t d) { return FeatureMatrix(Matrix(0, d), {}); }

// ---------------------------------------------------------------------------
// FVB1

namespace {

class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
    }
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  void need(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n) {
      throw CorruptionError(std::string("feature file truncated while reading ") + what);
    }
  }
  template <typename T>
  T le(const char* what) {
    need(sizeof(T), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t{in_[pos_ + i]} << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  std::string_view str(std::size_t n, const char* what) {
    need(n, what);
    std::string_view s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_features(const FeatureMatrix& m) {
  ByteWriter w;
  w.bytes(kFeatureMagic, 4);
  w.le<std::uint32_t>(kFeatureVersion);
  w.le<std::uint64_t>(m.n());
  if (m.d() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("feature dimension exceeds u32");
  }
  w.le<std::uint32_t>(static_cast<std::uint32_t>(m.d()));
  for (const auto& id : m.ids()) {
    if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw ValidationError("sample id longer than 65535 bytes");
    }
    w.le<std::uint16_t>(static_cast<std::uint16_t>(id.size()));
    w.bytes(id.data(), id.size());
  }
  for (double v : m.values().data()) {
    const auto f = static_cast<float>(v);
    if (!std::isfinite(f)) throw ValidationError("feature value overflows f32");
    w.le<std::uint32_t>(std::bit_cast<std::uint32_t>(f));
  }
  return w.take();
}

FeatureMatrix decode_features(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(kFeatureMagic, kFeatureMagic + 4, bytes.begin())) {
    throw FormatError("not an FVB1 feature file (bad magic)");
  }
  ByteReader r(bytes.subspan(4));
  const auto version = r.le<std::uint32_t>("version");
  if (version != kFeatureVersion) {
    throw FormatError("unsupported FVB1 version " + std::to_string(version));
  }
  const auto n = r.le<std::uint64_t>("row count");
  const auto d = r.le<std::uint32_t>("dimension");
  if (d == 0) throw ValidationError("feature dimension must be at least 1");
  // Each row needs at least a u16 id length; reject absurd headers before allocating.
  if (n > r.remaining() / 2) throw CorruptionError("feature file truncated: header claims " +
                                                   std::to_string(n) + " rows");
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto len = r.le<std::uint16_t>("id length");
    ids.emplace_back(r.str(len, "id"));
  }
  if (r.remaining() / 4 / d < n) throw CorruptionError("feature file truncated in value block");
  if (r.remaining() != n * d * 4) throw CorruptionError("trailing bytes after value block");
  std::vector<double> values(n * d);
  for (auto& v : values) v = std::bit_cast<float>(r.le<std::uint32_t>("value"));
  return FeatureMatrix(Matrix(n, d, std::move(values)), std::move(ids));
}

namespace {

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

FeatureMatrix read_feature_file(const std::filesystem::path& path) {
  return decode_features(read_binary_file(path));
}

void write_feature_file(const FeatureMatrix& m, const std::filesystem::path& path) {
  write_binary_file(path, encode_features(m));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Manifest CSV

std::size_t DatasetManifest::count(Split s) const {
  std::size_t c = 0;
  for (const auto& e : entries) c += (e.split == s);
  return c;
}

bool DatasetManifest::has_groups() const {
  for (const auto& e : entries) {
    if (!e.group.empty()) return true;
  }
  return false;
}

namespace {

// Minimal RFC 4180 field splitting: quoted fields may contain commas and "".
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ValidationError("line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

DatasetManifest parse_manifest(std::string_view text) {
  DatasetManifest manifest;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  bool with_group = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line == "id,path,label,split,group") {
        with_group = true;
      } else if (line != "id,path,label,split") {
        throw ValidationError("manifest header must be 'id,path,label,split[,group]'");
      }
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_csv_line(line, line_no);
    const std::size_t expected = with_group ? 5 : 4;
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != expected) {
      throw ValidationError(where + "expected " + std::to_string(expected) + " fields, got " +
                            std::to_string(fields.size()));
    }
    ManifestEntry e;
    e.id = std::move(fields[0]);
    e.path = std::move(fields[1]);
    if (e.id.empty()) throw ValidationError(where + "empty id");
    const auto label = parse_label(fields[2]);
    if (!label) throw ValidationError(where + "unknown label '" + fields[2] + "'");
    e.label = *label;
    if (!fields[3].empty()) {
      e.split = parse_split(fields[3]);
      if (!e.split) throw ValidationError(where + "unknown split '" + fields[3] + "'");
    }
    if (with_group) e.group = std::move(fields[4]);
    if (!seen.insert(e.id).second) throw ValidationError(where + "duplicate id '" + e.id + "'");
    manifest.entries.push_back(std::move(e));
  }
  if (line_no == 0) throw ValidationError("manifest is empty (missing header)");
  return manifest;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path));
}

std::string format_manifest(const DatasetManifest& manifest) {
  const bool with_group = manifest.has_groups();
  std::string out = with_group ? "id,path,label,split,group\n" : "id,path,label,split\n";
  for (const auto& e : manifest.entries) {
    out += csv_field(e.id);
    out += ',';
    out += csv_field(e.path);
    out += ',';
    out += to_string(e.label);
    out += ',';
    if (e.split) out += to_string(*e.split);
    if (with_group) {
      out += ',';
      out += csv_field(e.group);
    }
    out += '\n';
  }
  return out;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  write_text_file(path, format_manifest(manifest));
}

AlignedSet align(const FeatureMatrix& m, const DatasetManifest& manifest, Split split) {
  std::unordered_map<std::string_view, std::size_t> row_of;
  row_of.reserve(m.n());
  for (std::size_t i = 0; i < m.n(); ++i) row_of.emplace(m.ids()[i], i);

  std::vector<std::size_t> rows;
  std::vector<int> labels;
  std::vector<std::string> ids;
  std::vector<std::string> missing;
  for (const auto& e : manifest.entries) {
    if (e.split != split) continue;
    const auto it = row_of.find(e.id);
    if (it == row_of.end()) {
      missing.push_back(e.id);
      continue;
    }
    rows.push_back(it->second);
    labels.push_back(sign_of(e.label));
    ids.push_back(e.id);
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " manifest id(s) missing from features:";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " ...";
    throw AlignmentError(msg);
  }
  Matrix out(rows.size(), m.d());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = m.row(rows[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return {FeatureMatrix(std::move(out), std::move(ids)), std::move(labels)};
}

}  // namespace fooddet
