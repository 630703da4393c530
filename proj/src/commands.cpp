#include "fooddet/commands.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "fooddet/format.hpp"
#include "fooddet/histfeat.hpp"
#include "fooddet/random.hpp"

namespace fooddet {

std::optional<SplitProtocol> parse_protocol(std::string_view token) {
  if (token == "fcd") return SplitProtocol::kFcd;
  if (token == "ragusa") return SplitProtocol::kRagusa;
  if (token == "fractional") return SplitProtocol::kFractional;
  return std::nullopt;
}

namespace {

// Shares `total` among groups proportionally to their sizes (largest remainder).
std::vector<std::size_t> apportion(std::size_t total, const std::vector<std::size_t>& sizes) {
  std::size_t n = 0;
  for (auto s : sizes) n += s;
  std::vector<std::size_t> out(sizes.size(), 0);
  if (n == 0) return out;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t given = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const double ideal = static_cast<double>(total) * static_cast<double>(sizes[g]) /
                         static_cast<double>(n);
    out[g] = static_cast<std::size_t>(std::floor(ideal));
    given += out[g];
    remainders.emplace_back(ideal - static_cast<double>(out[g]), g);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; given < total && r < remainders.size(); ++r) {
    const auto g = remainders[r].second;
    if (out[g] < sizes[g]) {
      ++out[g];
      ++given;
    }
  }
  return out;
}

std::size_t rounded_share(std::size_t n, double fraction) {
  return std::min(n, static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction)));
}

void check_fraction(double f, const char* name) {
  if (!(f > 0.0 && f < 1.0)) {
    throw ValidationError(std::string(name) + " must lie strictly between 0 and 1");
  }
}

// Stratified split of `pool` (indices into entries): `test_fraction` of the pool
// goes to test (if > 0), then `val_fraction` of the rest to val, the remainder to train.
void stratified_assign(std::vector<ManifestEntry>& entries, const std::vector<std::size_t>& pool,
                       double test_fraction, double val_fraction, std::mt19937_64& rng) {
  std::vector<std::size_t> food;
  std::vector<std::size_t> nonfood;
  for (auto idx : pool) (entries[idx].label == Label::kFood ? food : nonfood).push_back(idx);
  seeded_shuffle(std::span<std::size_t>(food), rng);
  seeded_shuffle(std::span<std::size_t>(nonfood), rng);

  std::vector<std::size_t> sizes{food.size(), nonfood.size()};
  const auto test = apportion(rounded_share(pool.size(), test_fraction), sizes);
  std::vector<std::size_t> rest{sizes[0] - test[0], sizes[1] - test[1]};
  const auto val = apportion(rounded_share(rest[0] + rest[1], val_fraction), rest);

  const std::vector<std::size_t>* classes[2] = {&food, &nonfood};
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t r = 0; r < classes[c]->size(); ++r) {
      auto& e = entries[(*classes[c])[r]];
      if (r < test[c]) {
        e.split = Split::kTest;
      } else if (r < test[c] + val[c]) {
        e.split = Split::kVal;
      } else {
        e.split = Split::kTrain;
      }
    }
  }
}

}  // namespace

DatasetManifest split_manifest(const DatasetManifest& in, const SplitOptions& options, bool force) {
  if (!force) {
    for (const auto& e : in.entries) {
      if (e.split) {
        throw ValidationError("manifest already has split assignments (entry '" + e.id +
                              "'); pass --force to reassign");
      }
    }
  }
  check_fraction(options.val_fraction, "validation fraction");
  DatasetManifest out = in;
  for (auto& e : out.entries) e.split.reset();
  std::mt19937_64 rng(options.seed);

  if (options.protocol != SplitProtocol::kRagusa) {
    check_fraction(options.test_fraction, "test fraction");
    const double test = options.protocol == SplitProtocol::kFcd ? 0.2 : options.test_fraction;
    const double val = options.protocol == SplitProtocol::kFcd ? 0.2 : options.val_fraction;
    std::vector<std::size_t> all(out.entries.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    stratified_assign(out.entries, all, test, val, rng);
    return out;
  }

  std::vector<std::size_t> unict;
  std::vector<std::size_t> flickr_nonfood;
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    auto& e = out.entries[i];
    const auto where = "entry '" + e.id + "': ";
    if (e.group == kGroupUnict || e.group == kGroupFlickrFood) {
      if (e.label != Label::kFood) throw ValidationError(where + "group " + e.group + " must be food");
      if (e.group == kGroupUnict) {
        unict.push_back(i);
      } else {
        e.split = Split::kTest;
      }
    } else if (e.group == kGroupFlickrNonFood) {
      if (e.label != Label::kNonFood) {
        throw ValidationError(where + "group flickr_nonfood must be nonfood");
      }
      flickr_nonfood.push_back(i);
    } else if (e.group.empty()) {
      throw ValidationError(where + "ragusa protocol needs a group column");
    } else {
      throw ValidationError(where + "unknown ragusa group '" + e.group + "'");
    }
  }
  if (unict.empty()) throw ValidationError("ragusa protocol: no unict entries");
  if (flickr_nonfood.empty()) throw ValidationError("ragusa protocol: no flickr_nonfood entries");

  const std::size_t leading = std::min(unict.size(), flickr_nonfood.size());
  std::vector<std::size_t> pool = unict;
  pool.insert(pool.end(), flickr_nonfood.begin(),
              flickr_nonfood.begin() + static_cast<std::ptrdiff_t>(leading));
  for (std::size_t r = leading; r < flickr_nonfood.size(); ++r) {
    out.entries[flickr_nonfood[r]].split = Split::kTest;
  }
  // No test share inside the pool: everything goes to train or val.
  std::vector<std::size_t> food;
  std::vector<std::size_t> nonfood;
  for (auto idx : pool) (out.entries[idx].label == Label::kFood ? food : nonfood).push_back(idx);
  seeded_shuffle(std::span<std::size_t>(food), rng);
  seeded_shuffle(std::span<std::size_t>(nonfood), rng);
  const auto val = apportion(rounded_share(pool.size(), options.val_fraction),
                             {food.size(), nonfood.size()});
  for (std::size_t r = 0; r < food.size(); ++r) {
    out.entries[food[r]].split = r < val[0] ? Split::kVal : Split::kTrain;
  }
  for (std::size_t r = 0; r < nonfood.size(); ++r) {
    out.entries[nonfood[r]].split = r < val[1] ? Split::kVal : Split::kTrain;
  }
  return out;
}

void cmd_split(const fs::path& in, const fs::path& out, const SplitOptions& options, bool force) {
  write_manifest(split_manifest(read_manifest(in), options, force), out);
}

namespace {

fs::path resolve(const fs::path& base_dir, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

}  // namespace

FeatureMatrix extract_features(const DatasetManifest& manifest, const fs::path& base_dir,
                               int bins) {
  if (manifest.entries.empty()) throw ValidationError("manifest has no entries");
  const std::size_t d = static_cast<std::size_t>(bins) * bins * bins;
  Matrix values(manifest.entries.size(), d);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    const auto row = histogram_features(load_image(resolve(base_dir, e.path)), bins);
    std::copy(row.begin(), row.end(), values.row(i).begin());
    ids.push_back(e.id);
  }
  return FeatureMatrix(std::move(values), std::move(ids));
}

void cmd_extract(const fs::path& manifest, const fs::path& out, int bins) {
  write_feature_file(extract_features(read_manifest(manifest), manifest.parent_path(), bins), out);
}

DatasetManifest curate_manifest(const DatasetManifest& manifest, const fs::path& base_dir,
                                std::size_t keep, int bins) {
  std::map<std::string, std::vector<std::pair<std::string, ColorHistogram>>> categories;
  for (const auto& e : manifest.entries) {
    if (e.label != Label::kFood) continue;
    if (e.group.empty()) throw ValidationError("food entry '" + e.id + "' has no category group");
    categories[e.group].emplace_back(e.id, color_histogram(load_image(resolve(base_dir, e.path)), bins));
  }
  std::vector<std::string> kept;
  for (const auto& [name, members] : categories) {
    auto ids = select_by_variance(members, keep);
    kept.insert(kept.end(), ids.begin(), ids.end());
  }
  std::sort(kept.begin(), kept.end());
  DatasetManifest out;
  for (const auto& e : manifest.entries) {
    if (e.label != Label::kFood || std::binary_search(kept.begin(), kept.end(), e.id)) {
      out.entries.push_back(e);
    }
  }
  return out;
}

void cmd_curate(const fs::path& manifest, const fs::path& out, std::size_t keep, int bins) {
  write_manifest(curate_manifest(read_manifest(manifest), manifest.parent_path(), keep, bins), out);
}

FitOutcome cmd_fit(const FitPaths& paths, const FitConfig& config) {
  const auto features = read_feature_file(paths.features);
  const auto manifest = read_manifest(paths.manifest);
  if (manifest.count(Split::kTrain) == 0) throw ValidationError("manifest has no train rows");
  const auto train = align(features, manifest, Split::kTrain);
  auto outcome = fit_pipeline(train, config, training_digest(manifest));
  save_model(outcome.model, paths.model_out);
  if (!paths.search_csv_out.empty()) {
    write_text_file(paths.search_csv_out, format_search_csv(outcome.search));
  }
  return outcome;
}

namespace {

void check_compatible(const PipelineModel& model, const FeatureMatrix& features) {
  if (features.d() != model.input_dim()) {
    throw ValidationError("model expects " + std::to_string(model.input_dim()) +
                          "-d features, file has " + std::to_string(features.d()));
  }
}

std::string id_lines(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += id + '\n';
  return out;
}

}  // namespace

EvalReport cmd_evaluate(const fs::path& model_path, const fs::path& features_path,
                        const fs::path& manifest_path, Split split, const fs::path& out_prefix) {
  const auto model = load_model(model_path);
  const auto features = read_feature_file(features_path);
  check_compatible(model, features);
  const auto set = align(features, read_manifest(manifest_path), split);
  const auto pred = model.predict(set.features);
  auto report = confusion(pred, set.labels, set.features.ids());

  const auto stem = out_prefix.string();
  write_text_file(stem + ".csv", format_report_csv(report));
  write_text_file(stem + "_fp_ids.txt", id_lines(report.fp_ids));
  write_text_file(stem + "_fn_ids.txt", id_lines(report.fn_ids));
  return report;
}

std::string format_predictions(const PipelineModel& model, const FeatureMatrix& features) {
  check_compatible(model, features);
  const auto values = model.decision_values(features);
  std::string out = "id,label,decision_value\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += features.ids()[i];
    out += values[i] >= 0.0 ? ",food," : ",nonfood,";
    out += format_double(values[i]);
    out += '\n';
  }
  return out;
}

void cmd_predict(const fs::path& model, const fs::path& features, const fs::path& out_csv) {
  write_text_file(out_csv, format_predictions(load_model(model), read_feature_file(features)));
}

std::string cmd_report(const std::optional<fs::path>& search_csv,
                       const std::vector<fs::path>& eval_csvs) {
  std::ostringstream out;
  if (search_csv) {
    const auto rows = parse_search_csv(read_text_file(*search_csv));
    // Mean accuracy per (C, gamma) in file order.
    std::vector<std::pair<std::pair<double, double>, std::pair<double, int>>> cells;
    const SearchCsvRow* best = nullptr;
    for (const auto& row : rows) {
      if (row.fold == "best") {
        best = &row;
        continue;
      }
      if (cells.empty() || cells.back().first != std::pair{row.c, row.gamma}) {
        cells.push_back({{row.c, row.gamma}, {0.0, 0}});
      }
      cells.back().second.first += row.accuracy;
      cells.back().second.second += 1;
    }
    out << "grid search: " << cells.size() << " cells\n";
    if (best) {
      out << "best C=" << format_double(best->c) << " gamma=" << format_double(best->gamma)
          << " mean CV accuracy=" << format_percent(best->accuracy) << '\n';
    }
    std::vector<std::pair<double, std::pair<double, double>>> ranked;
    for (const auto& [key, acc] : cells) ranked.push_back({acc.first / acc.second, key});
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    out << "top cells:\n";
    for (std::size_t i = 0; i < ranked.size() && i < 5; ++i) {
      out << "  C=" << format_double(ranked[i].second.first)
          << " gamma=" << format_double(ranked[i].second.second) << "  "
          << format_percent(ranked[i].first) << '\n';
    }
  }
  if (!eval_csvs.empty()) {
    std::vector<EvalReport> reports;
    out << "evaluation      ACC       TPr       TNr       n\n";
    auto line = [&](const std::string& name, const EvalReport& r) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%-14s %-9s %-9s %-9s %zu\n", name.c_str(),
                    format_percent(r.acc).c_str(), format_percent(r.tpr).c_str(),
                    format_percent(r.tnr).c_str(), r.confusion.total());
      out << buf;
    };
    for (const auto& p : eval_csvs) {
      reports.push_back(parse_report_csv(read_text_file(p)));
      line(p.stem().string(), reports.back());
    }
    if (reports.size() > 1) line("joint", weighted_merge(reports));
  }
  return out.str();
}

}  // namespace fooddet
