#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fooddet/commands.hpp"
#include "fooddet/histfeat.hpp"
#include "support/synthetic.hpp"
#include "support/tempdir.hpp"

using namespace fooddet;
using fooddet::testing::TempDir;

namespace {

FitConfig small_config() {
  FitConfig c;
  c.grid_c = {0.01, 10.0, 4};
  c.grid_gamma = {1e-3, 1e-1, 3};
  return c;
}

DatasetManifest unassigned(std::size_t food, std::size_t nonfood) {
  DatasetManifest m;
  for (std::size_t i = 0; i < food + nonfood; ++i) {
    m.entries.push_back({"e" + std::to_string(i), "p", i < food ? Label::kFood : Label::kNonFood,
                         std::nullopt, ""});
  }
  return m;
}

}  // namespace

TEST_CASE("fcd split of 100 samples is 64/16/20") {
  for (auto [food, nonfood] : {std::pair{50, 50}, std::pair{37, 63}, std::pair{1, 99}}) {
    const auto out = split_manifest(unassigned(food, nonfood), {});
    CHECK(out.count(Split::kTrain) == 64);
    CHECK(out.count(Split::kVal) == 16);
    CHECK(out.count(Split::kTest) == 20);
  }
}

TEST_CASE("split is stratified and seeded") {
  const auto in = unassigned(50, 50);
  const auto a = split_manifest(in, {});
  CHECK(format_manifest(a) == format_manifest(split_manifest(in, {})));
  std::size_t test_food = 0;
  for (const auto& e : a.entries) test_food += e.split == Split::kTest && e.label == Label::kFood;
  CHECK(test_food == 10);
  SplitOptions other;
  other.seed = 7;
  CHECK(format_manifest(a) != format_manifest(split_manifest(in, other)));
}

TEST_CASE("fractional protocol and existing splits") {
  SplitOptions options{SplitProtocol::kFractional, 0.3, 0.5, 1};
  const auto out = split_manifest(unassigned(60, 40), options);
  CHECK(out.count(Split::kTest) == 30);
  CHECK(out.count(Split::kVal) == 35);
  CHECK(out.count(Split::kTrain) == 35);
  CHECK_THROWS_AS(split_manifest(out, options), ValidationError);
  CHECK_NOTHROW(split_manifest(out, options, true));
  SplitOptions bad{SplitProtocol::kFractional, 1.5, 0.2, 1};
  CHECK_THROWS_AS(split_manifest(unassigned(5, 5), bad), ValidationError);
}

TEST_CASE("ragusa protocol counts with the published group sizes") {
  const auto in = fooddet::testing::grouped_manifest(3583, 4805, 3583 + 4422);
  const auto out = split_manifest(in, {SplitProtocol::kRagusa, 0.2, 0.2, 42});
  std::size_t trainval_food = 0, trainval_nonfood = 0, test_food = 0, test_nonfood = 0;
  for (const auto& e : out.entries) {
    const bool test = e.split == Split::kTest;
    if (e.label == Label::kFood) (test ? test_food : trainval_food)++;
    else (test ? test_nonfood : trainval_nonfood)++;
    if (e.group == "flickr_food") CHECK(test);
  }
  CHECK(trainval_food == 3583);
  CHECK(test_food == 4805);
  CHECK(test_nonfood == 4422);
  CHECK(trainval_nonfood == 3583);
  // train/val is 80/20 over the pooled unict + leading nonfood rows
  CHECK(out.count(Split::kVal) == 1433);
  // nonfood in train/val are the first rows in file order
  for (const auto& e : out.entries) {
    if (e.group != "flickr_nonfood") continue;
    const auto idx = std::stoul(e.id.substr(e.id.rfind('_') + 1));
    CHECK((idx < 3583) == (e.split != Split::kTest));
  }
}

TEST_CASE("ragusa protocol needs groups") {
  CHECK_THROWS_AS(split_manifest(unassigned(5, 5), {SplitProtocol::kRagusa, 0.2, 0.2, 1}),
                  ValidationError);
  auto m = fooddet::testing::grouped_manifest(3, 3, 6);
  m.entries[0].label = Label::kNonFood;
  CHECK_THROWS_AS(split_manifest(m, {SplitProtocol::kRagusa, 0.2, 0.2, 1}), ValidationError);
}

TEST_CASE("fit, round trip and determinism") {
  const auto set = fooddet::testing::synthetic_set(120, 90, 6, 0.8, 3);
  const auto train = align(set.features, set.manifest, Split::kTrain);
  const auto a = fit_pipeline(train, small_config(), training_digest(set.manifest));
  const auto b = fit_pipeline(train, small_config(), training_digest(set.manifest));
  const auto text = serialize_model(a.model);
  CHECK(text == serialize_model(b.model));
  CHECK(format_search_csv(a.search) == format_search_csv(b.search));

  const auto back = deserialize_model(text);
  CHECK(back == a.model);
  CHECK(serialize_model(back) == text);
  CHECK(back.predict(set.features) == a.model.predict(set.features));
  CHECK(back.decision_values(set.features) == a.model.decision_values(set.features));
  CHECK(a.model.provenance.train_rows == 90);
  CHECK(a.model.provenance.best_c == a.search.best_c());
}

TEST_CASE("tampering, truncation and unknown versions") {
  const auto set = fooddet::testing::synthetic_set(60, 60, 3, 1.0, 4);
  const auto model = fit_pipeline(align(set.features, set.manifest, Split::kTrain), small_config()).model;
  const auto text = serialize_model(model);

  for (std::size_t pos : {std::size_t{3}, text.size() / 2, text.size() - 20}) {
    auto bad = text;
    bad[pos] = bad[pos] == '1' ? '2' : '1';
    CHECK_THROWS_AS(deserialize_model(bad), CorruptionError);
  }
  CHECK_THROWS_AS(deserialize_model(text.substr(0, text.size() / 2)), CorruptionError);
  CHECK_THROWS_AS(deserialize_model(""), CorruptionError);

  // A correctly checksummed file from a future version.
  auto body = text.substr(0, text.rfind("crc32 "));
  body.replace(body.find("fooddet-pipeline 1"), 18, "fooddet-pipeline 2");
  char crc[16];
  std::snprintf(crc, sizeof crc, "%08x", crc32_of(body));
  CHECK_THROWS_AS(deserialize_model(body + "crc32 " + crc + "\n"), VersionError);
}

TEST_CASE("a model with a single principal component round-trips") {
  // One shared latent factor: the correlation matrix has one eigenvalue near d.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t n = 80;
  Matrix x(n, 4);
  std::vector<std::string> ids;
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i % 2 ? 1 : -1;
    const double f = y[i] * 1.5 + g(rng);
    for (std::size_t j = 0; j < 4; ++j) x(i, j) = f + 0.01 * g(rng);
    ids.push_back("r" + std::to_string(i));
  }
  const auto out = fit_pipeline({FeatureMatrix(x, ids), y}, small_config());
  REQUIRE(out.model.pca.has_value());
  CHECK(out.model.pca->k() == 1);
  const auto back = deserialize_model(serialize_model(out.model));
  CHECK(back.pca->k() == 1);
  CHECK(back.svm.dim == 1);
  CHECK(back.input_dim() == 4);
  CHECK(back.predict(FeatureMatrix(x, ids)) == out.model.predict(FeatureMatrix(x, ids)));
}

TEST_CASE("no-PCA variant and broken dimension chains") {
  const auto set = fooddet::testing::synthetic_set(60, 60, 3, 1.0, 6);
  auto config = small_config();
  config.use_pca = false;
  const auto model = fit_pipeline(align(set.features, set.manifest, Split::kTrain), config).model;
  CHECK_FALSE(model.pca.has_value());
  CHECK(model.svm.dim == 3);
  CHECK(deserialize_model(serialize_model(model)) == model);

  auto broken = model;
  broken.svm.dim = 2;
  CHECK_THROWS_AS(broken.validate(), ValidationError);
  CHECK_THROWS_AS(serialize_model(broken), ValidationError);
}

TEST_CASE("command layer: fit, evaluate, predict, report") {
  TempDir dir;
  const auto set = fooddet::testing::synthetic_set(150, 100, 5, 1.5, 8);
  write_feature_file(set.features, dir / "f.fvb");
  write_manifest(set.manifest, dir / "m.csv");

  const FitPaths paths{dir / "f.fvb", dir / "m.csv", dir / "model.txt", dir / "search.csv"};
  const auto outcome = cmd_fit(paths, small_config());
  CHECK(fs::exists(dir / "search.csv"));

  const auto train = cmd_evaluate(dir / "model.txt", dir / "f.fvb", dir / "m.csv", Split::kTrain,
                                  dir / "train");
  CHECK(*train.acc >= 0.95);
  const auto test = cmd_evaluate(dir / "model.txt", dir / "f.fvb", dir / "m.csv", Split::kTest,
                                 dir / "test");
  CHECK(test.confusion.total() == 50);
  CHECK(parse_report_csv(read_text_file(dir / "test.csv")).confusion == test.confusion);
  CHECK(fs::exists(dir / "test_fp_ids.txt"));
  CHECK(fs::exists(dir / "test_fn_ids.txt"));

  const auto empty = cmd_evaluate(dir / "model.txt", dir / "f.fvb", dir / "m.csv", Split::kVal,
                                  dir / "val");
  CHECK_FALSE(empty.acc.has_value());
  CHECK(read_text_file(dir / "val.csv").find(kUndefinedMarker) != std::string::npos);

  cmd_predict(dir / "model.txt", dir / "f.fvb", dir / "p1.csv");
  cmd_predict(dir / "model.txt", dir / "f.fvb", dir / "p2.csv");
  const auto p1 = read_text_file(dir / "p1.csv");
  CHECK(p1 == read_text_file(dir / "p2.csv"));
  CHECK(p1.substr(0, p1.find('\n')) == "id,label,decision_value");
  CHECK(p1.find("\ns0,") < p1.find("\ns1,"));

  const auto one = FeatureMatrix(Matrix(1, 5, 0.0), {"only"});
  const auto rows = format_predictions(outcome.model, one);
  CHECK(std::count(rows.begin(), rows.end(), '\n') == 2);

  const auto summary = cmd_report(dir / "search.csv", {dir / "train.csv", dir / "test.csv"});
  CHECK(summary.find("ACC") != std::string::npos);

  // rerun: byte-identical outputs
  const FitPaths again{dir / "f.fvb", dir / "m.csv", dir / "model2.txt", dir / "search2.csv"};
  cmd_fit(again, small_config());
  CHECK(read_text_file(dir / "model.txt") == read_text_file(dir / "model2.txt"));
  CHECK(read_text_file(dir / "search.csv") == read_text_file(dir / "search2.csv"));

  // wrong feature dimension
  write_feature_file(FeatureMatrix(Matrix(1, 4, 0.0), {"s0"}), dir / "narrow.fvb");
  CHECK_THROWS_AS(cmd_predict(dir / "model.txt", dir / "narrow.fvb", dir / "x.csv"), ValidationError);

  // no train rows
  auto no_train = set.manifest;
  for (auto& e : no_train.entries) e.split = Split::kTest;
  write_manifest(no_train, dir / "nt.csv");
  CHECK_THROWS_AS(cmd_fit({dir / "f.fvb", dir / "nt.csv", dir / "m3.txt", {}}, small_config()),
                  ValidationError);
}

TEST_CASE("extract and curate read PPM images relative to the manifest") {
  TempDir dir;
  fs::create_directories(dir / "img");
  DatasetManifest m;
  const std::uint8_t shades[] = {0, 40, 80, 200, 255};
  for (int i = 0; i < 5; ++i) {
    const std::string id = "f" + std::to_string(i);
    save_image(RgbImage::filled(4, 4, shades[i], 10, 10), dir / ("img/" + id + ".ppm"));
    m.entries.push_back({id, "img/" + id + ".ppm", Label::kFood, std::nullopt, "pizza"});
  }
  save_image(RgbImage::filled(4, 4, 0, 0, 255), dir / "img/n0.ppm");
  m.entries.push_back({"n0", "img/n0.ppm", Label::kNonFood, std::nullopt, ""});
  write_manifest(m, dir / "m.csv");

  cmd_extract(dir / "m.csv", dir / "f.fvb", 8);
  const auto f = read_feature_file(dir / "f.fvb");
  CHECK(f.n() == 6);
  CHECK(f.d() == 512);
  CHECK(f.ids()[5] == "n0");

  cmd_curate(dir / "m.csv", dir / "c.csv", 2, 8);
  const auto curated = read_manifest(dir / "c.csv");
  CHECK(curated.entries.size() == 3);
  CHECK(curated.entries.back().id == "n0");
}
