#include "fooddet/pipeline.hpp"

#include <zlib.h>

#include <cstdio>
#include <sstream>

#include "fooddet/format.hpp"

namespace fooddet {

void PipelineModel::validate() const {
  if (version != kPipelineVersion) {
    throw VersionError("unsupported pipeline version " + std::to_string(version));
  }
  if (standardizer.mean.size() != standardizer.scale.size() || standardizer.d() == 0) {
    throw ValidationError("standardizer mean/scale lengths disagree");
  }
  for (double s : standardizer.scale) {
    if (!(s > 0.0)) throw ValidationError("standardizer scale must be positive");
  }
  std::size_t dim = standardizer.d();
  if (pca) {
    if (pca->d() != dim) {
      throw ValidationError("dimension chain broken: standardizer d=" + std::to_string(dim) +
                            " but PCA d=" + std::to_string(pca->d()));
    }
    if (pca->k() == 0 || pca->eigenvalues.size() != pca->k()) {
      throw ValidationError("PCA component and eigenvalue counts disagree");
    }
    dim = pca->k();
  }
  if (svm.dim != dim) {
    throw ValidationError("dimension chain broken: SVM expects " + std::to_string(svm.dim) +
                          " features but the reduction yields " + std::to_string(dim));
  }
  if (svm.support_vectors.rows() != svm.dual_coefs.size() ||
      (svm.support_vectors.rows() > 0 && svm.support_vectors.cols() != svm.dim)) {
    throw ValidationError("SVM support vector table is inconsistent");
  }
}

FeatureMatrix PipelineModel::reduce(const FeatureMatrix& raw) const {
  auto z = apply_standardizer(standardizer, raw);
  return pca ? project(*pca, z) : z;
}

std::vector<double> PipelineModel::decision_values(const FeatureMatrix& raw) const {
  const auto reduced = reduce(raw);
  std::vector<double> out(reduced.n());
  for (std::size_t i = 0; i < reduced.n(); ++i) out[i] = decision(svm, reduced.row(i));
  return out;
}

std::vector<int> PipelineModel::predict(const FeatureMatrix& raw) const {
  return fooddet::predict(svm, reduce(raw));
}

FitOutcome fit_pipeline(const AlignedSet& train, const FitConfig& config,
                        std::uint32_t manifest_digest) {
  if (train.features.n() == 0) throw ValidationError("no training rows");

  PipelineModel model;
  model.standardizer = fit_standardizer(train.features);
  auto reduced = apply_standardizer(model.standardizer, train.features);
  if (config.use_pca) {
    model.pca = fit_pca(reduced);
    reduced = project(*model.pca, reduced);
  }

  const auto grid = SearchGrid::from_axes(config.grid_c, config.grid_gamma);
  const auto folds = stratified_kfold(train.labels, config.folds, config.seed);
  auto search = grid_search(reduced.values(), train.labels, grid, folds, config.search);
  model.svm = train_final(reduced.values(), train.labels, search.best_c(), search.best_gamma(),
                          config.search);

  auto& p = model.provenance;
  p.seed = config.seed;
  p.folds = config.folds;
  p.grid_c = config.grid_c;
  p.grid_gamma = config.grid_gamma;
  p.best_c = search.best_c();
  p.best_gamma = search.best_gamma();
  p.best_cv_accuracy = search.best_accuracy();
  p.train_rows = train.features.n();
  p.manifest_digest = manifest_digest;
  return {std::move(model), std::move(search)};
}

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  while (!bytes.empty()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size(), 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), chunk);
    bytes.remove_prefix(chunk);
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t training_digest(const DatasetManifest& manifest) {
  std::string buf;
  for (const auto& e : manifest.entries) {
    if (e.split != Split::kTrain) continue;
    buf += e.id;
    buf += ',';
    buf += to_string(e.label);
    buf += '\n';
  }
  return crc32_of(buf);
}

// ---------------------------------------------------------------------------
// Text model format

namespace {

constexpr std::string_view kMagic = "fooddet-pipeline";

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

class ModelWriter {
 public:
  void section(std::string_view name) { out_ << '[' << name << "]\n"; }
  void line(std::string_view key, const std::string& value) { out_ << key << ' ' << value << '\n'; }
  void num(std::string_view key, double v) { line(key, format_double(v)); }
  void count(std::string_view key, std::uint64_t v) { line(key, std::to_string(v)); }
  void vec(std::string_view key, std::span<const double> v) {
    out_ << key;
    for (double x : v) out_ << ' ' << format_double(x);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

class ModelReader {
 public:
  explicit ModelReader(std::string_view text) : text_(text) {}

  std::vector<std::string_view> next_line() {
    if (pos_ >= text_.size()) throw CorruptionError("model file ends unexpectedly");
    auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    const auto line = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++line_no_;
    std::vector<std::string_view> tokens;
    std::size_t p = 0;
    while (p < line.size()) {
      const auto q = std::min(line.find(' ', p), line.size());
      if (q > p) tokens.push_back(line.substr(p, q - p));
      p = q + 1;
    }
    return tokens;
  }

  void section(std::string_view name) {
    const auto t = next_line();
    if (t.size() != 1 || t[0] != "[" + std::string(name) + "]") {
      fail("expected section [" + std::string(name) + "]");
    }
  }

  std::vector<std::string_view> keyed(std::string_view key, std::size_t values) {
    auto t = next_line();
    if (t.empty() || t[0] != key || t.size() != values + 1) {
      fail("expected '" + std::string(key) + "' with " + std::to_string(values) + " value(s)");
    }
    t.erase(t.begin());
    return t;
  }

  double num(std::string_view key) { return to_double(keyed(key, 1)[0]); }
  std::uint64_t count(std::string_view key) { return to_u64(keyed(key, 1)[0]); }
  std::vector<double> vec(std::string_view key, std::size_t n) {
    std::vector<double> out;
    for (auto tok : keyed(key, n)) out.push_back(to_double(tok));
    return out;
  }

  double to_double(std::string_view tok) {
    double v = 0.0;
    if (!parse_double(tok, v)) fail("bad number '" + std::string(tok) + "'");
    return v;
  }
  std::uint64_t to_u64(std::string_view tok) {
    std::uint64_t v = 0;
    if (!parse_u64(tok, v)) fail("bad integer '" + std::string(tok) + "'");
    return v;
  }
  bool at_end() const { return pos_ >= text_.size(); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw CorruptionError("model file line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace

std::string serialize_model(const PipelineModel& model) {
  model.validate();
  ModelWriter w;
  w.line(kMagic, std::to_string(model.version));

  w.section("STANDARDIZER");
  w.count("d", model.standardizer.d());
  w.vec("mean", model.standardizer.mean);
  w.vec("scale", model.standardizer.scale);

  w.section("PCA");
  w.count("enabled", model.pca ? 1 : 0);
  if (model.pca) {
    const auto& p = *model.pca;
    w.count("d", p.d());
    w.count("k", p.k());
    w.count("kaiser_count", p.kaiser_count);
    w.vec("eigenvalues", p.eigenvalues);
    for (std::size_t r = 0; r < p.k(); ++r) w.vec("component", p.components.row(r));
  }

  w.section("SVM");
  const auto& s = model.svm;
  w.count("dim", s.dim);
  w.num("c", s.c);
  w.num("gamma", s.params.gamma);
  w.num("coef0", s.params.coef0);
  w.num("bias", s.bias);
  w.count("iterations", s.meta.iterations);
  w.num("kkt_violation", s.meta.kkt_violation);
  w.count("converged", s.meta.converged ? 1 : 0);
  w.num("dual_objective", s.meta.dual_objective);
  w.count("support_vectors", s.dual_coefs.size());
  for (std::size_t i = 0; i < s.dual_coefs.size(); ++i) {
    std::vector<double> row{s.dual_coefs[i]};
    const auto sv = s.support_vectors.row(i);
    row.insert(row.end(), sv.begin(), sv.end());
    w.vec("sv", row);
  }

  w.section("PROVENANCE");
  const auto& p = model.provenance;
  w.count("seed", p.seed);
  w.count("folds", p.folds);
  w.line("grid_c", format_double(p.grid_c.lo) + ' ' + format_double(p.grid_c.hi) + ' ' +
                       std::to_string(p.grid_c.n));
  w.line("grid_gamma", format_double(p.grid_gamma.lo) + ' ' + format_double(p.grid_gamma.hi) +
                           ' ' + std::to_string(p.grid_gamma.n));
  w.num("best_c", p.best_c);
  w.num("best_gamma", p.best_gamma);
  w.num("best_cv_accuracy", p.best_cv_accuracy);
  w.count("train_rows", p.train_rows);
  w.line("manifest_digest", hex32(p.manifest_digest));

  auto body = w.str();
  body += "crc32 " + hex32(crc32_of(body)) + '\n';
  return body;
}

PipelineModel deserialize_model(std::string_view text) {
  // Trailing "crc32 xxxxxxxx\n" covers every byte before it.
  constexpr std::string_view kCrcKey = "crc32 ";
  if (text.empty() || text.back() != '\n') throw CorruptionError("model file is truncated");
  const auto last = text.rfind('\n', text.size() - 2);
  const std::size_t crc_start = last == std::string_view::npos ? 0 : last + 1;
  const auto crc_line = text.substr(crc_start, text.size() - 1 - crc_start);
  if (crc_line.substr(0, kCrcKey.size()) != kCrcKey || crc_line.size() != kCrcKey.size() + 8) {
    throw CorruptionError("model file has no checksum line");
  }
  const auto body = text.substr(0, crc_start);
  if (hex32(crc32_of(body)) != crc_line.substr(kCrcKey.size())) {
    throw CorruptionError("model file checksum mismatch");
  }

  ModelReader r(body);
  PipelineModel m;
  const auto head = r.next_line();
  if (head.size() != 2 || head[0] != kMagic) r.fail("not a fooddet pipeline model");
  const auto version = r.to_u64(head[1]);
  if (version != kPipelineVersion) {
    throw VersionError("unsupported pipeline version " + std::string(head[1]));
  }
  m.version = static_cast<int>(version);

  r.section("STANDARDIZER");
  const auto d = r.count("d");
  m.standardizer.mean = r.vec("mean", d);
  m.standardizer.scale = r.vec("scale", d);

  r.section("PCA");
  if (r.count("enabled") != 0) {
    PcaModel p;
    const auto pd = r.count("d");
    const auto k = r.count("k");
    p.kaiser_count = r.count("kaiser_count");
    p.eigenvalues = r.vec("eigenvalues", k);
    std::vector<double> comps;
    for (std::uint64_t i = 0; i < k; ++i) {
      const auto row = r.vec("component", pd);
      comps.insert(comps.end(), row.begin(), row.end());
    }
    p.components = Matrix(k, pd, std::move(comps));
    m.pca = std::move(p);
  }

  r.section("SVM");
  auto& s = m.svm;
  s.dim = r.count("dim");
  s.c = r.num("c");
  s.params.gamma = r.num("gamma");
  s.params.coef0 = r.num("coef0");
  s.bias = r.num("bias");
  s.meta.iterations = r.count("iterations");
  s.meta.kkt_violation = r.num("kkt_violation");
  s.meta.converged = r.count("converged") != 0;
  s.meta.dual_objective = r.num("dual_objective");
  const auto nsv = r.count("support_vectors");
  std::vector<double> svs;
  for (std::uint64_t i = 0; i < nsv; ++i) {
    const auto row = r.vec("sv", s.dim + 1);
    s.dual_coefs.push_back(row[0]);
    svs.insert(svs.end(), row.begin() + 1, row.end());
  }
  s.support_vectors = Matrix(nsv, s.dim, std::move(svs));

  r.section("PROVENANCE");
  auto& p = m.provenance;
  p.seed = r.count("seed");
  p.folds = r.count("folds");
  for (auto [key, axis] : {std::pair{"grid_c", &p.grid_c}, std::pair{"grid_gamma", &p.grid_gamma}}) {
    const auto t = r.keyed(key, 3);
    axis->lo = r.to_double(t[0]);
    axis->hi = r.to_double(t[1]);
    axis->n = r.to_u64(t[2]);
  }
  p.best_c = r.num("best_c");
  p.best_gamma = r.num("best_gamma");
  p.best_cv_accuracy = r.num("best_cv_accuracy");
  p.train_rows = r.count("train_rows");
  const auto digest = r.keyed("manifest_digest", 1)[0];
  unsigned long parsed = 0;
  if (digest.size() != 8 || std::sscanf(std::string(digest).c_str(), "%8lx", &parsed) != 1) {
    r.fail("bad manifest digest");
  }
  p.manifest_digest = static_cast<std::uint32_t>(parsed);
  if (!r.at_end()) r.fail("unexpected content after PROVENANCE");

  m.validate();
  return m;
}

void save_model(const PipelineModel& model, const std::filesystem::path& path) {
  write_text_file(path, serialize_model(model));
}

PipelineModel load_model(const std::filesystem::path& path) {
  return deserialize_model(read_text_file(path));
}

}  // namespace fooddet
