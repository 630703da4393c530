#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <random>

#include "fooddet/tensorio.hpp"
#include "support/tempdir.hpp"

using namespace fooddet;
using fooddet::testing::TempDir;

namespace {

FeatureMatrix two_by_three() {
  return FeatureMatrix(Matrix(2, 3, {1, 2, 3, 4, 5, 6}), {"a", "b"});
}

}  // namespace

TEST_CASE("feature file round trip keeps ids, shape and values") {
  TempDir dir;
  const auto m = two_by_three();
  write_feature_file(m, dir / "m.fvb");
  const auto back = read_feature_file(dir / "m.fvb");
  CHECK(back == m);
}

TEST_CASE("value 1.0 is stored as little-endian f32 0x3F800000") {
  const auto bytes = encode_features(FeatureMatrix(Matrix(1, 1, {1.0}), {"x"}));
  // magic(4) version(4) n(8) d(4) idlen(2) id(1) value(4)
  REQUIRE(bytes.size() == 27);
  CHECK(bytes[0] == 'F');
  CHECK(bytes[3] == '1');
  CHECK(bytes[4] == 1);
  CHECK(bytes[23] == 0x00);
  CHECK(bytes[24] == 0x00);
  CHECK(bytes[25] == 0x80);
  CHECK(bytes[26] == 0x3F);
}

TEST_CASE("writing the same matrix twice gives identical bytes") {
  TempDir dir;
  const auto m = two_by_three();
  write_feature_file(m, dir / "a.fvb");
  write_feature_file(m, dir / "b.fvb");
  CHECK(read_text_file(dir / "a.fvb") == read_text_file(dir / "b.fvb"));
}

TEST_CASE("round trip property over random matrices, compared after f32 quantization") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 100.0);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 1 + rng() % 7;
    const std::size_t d = 1 + rng() % 9;
    Matrix v(n, d);
    for (auto& x : v.data()) x = g(rng);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("img_" + std::to_string(trial) + "_" + std::to_string(i) + "\xc3\xa9");
    const FeatureMatrix m(v, ids);
    const auto back = decode_features(encode_features(m));
    REQUIRE(back.n() == n);
    REQUIRE(back.d() == d);
    CHECK(back.ids() == ids);
    for (std::size_t i = 0; i < v.data().size(); ++i) {
      CHECK(back.values().data()[i] == static_cast<double>(static_cast<float>(v.data()[i])));
    }
  }
}

TEST_CASE("bad magic is a format error") {
  auto bytes = encode_features(two_by_three());
  bytes[0] = 'X';
  bytes[1] = 'X';
  bytes[2] = 'X';
  bytes[3] = 'X';
  CHECK_THROWS_AS(decode_features(bytes), FormatError);
}

TEST_CASE("declaring more rows than present is a corruption error") {
  Matrix v(10, 2);
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) ids.push_back(std::to_string(i));
  auto bytes = encode_features(FeatureMatrix(v, ids));
  bytes.resize(bytes.size() - 8);  // drop the last row's values
  CHECK_THROWS_AS(decode_features(bytes), CorruptionError);

  auto header_only = encode_features(FeatureMatrix(v, ids));
  header_only.resize(20);
  CHECK_THROWS_AS(decode_features(header_only), CorruptionError);
}

TEST_CASE("duplicate ids and non-finite values are validation errors") {
  CHECK_THROWS_AS(FeatureMatrix(Matrix(2, 1, {1, 2}), {"a", "a"}), ValidationError);
  CHECK_THROWS_AS(FeatureMatrix(Matrix(1, 1, {std::nan("")}), {"a"}), ValidationError);

  // Patch the id of row 2 to equal row 1 in an encoded file.
  auto bytes = encode_features(FeatureMatrix(Matrix(2, 1, {1, 2}), {"a", "b"}));
  bytes[20 + 3 + 2] = 'a';
  CHECK_THROWS_AS(decode_features(bytes), ValidationError);

  auto nan_bytes = encode_features(FeatureMatrix(Matrix(1, 1, {1.0}), {"a"}));
  const auto nan_bits = std::bit_cast<std::uint32_t>(std::numeric_limits<float>::quiet_NaN());
  for (int i = 0; i < 4; ++i) nan_bytes[23 + i] = static_cast<std::uint8_t>(nan_bits >> (8 * i));
  CHECK_THROWS_AS(decode_features(nan_bytes), ValidationError);
}

TEST_CASE("unwritable path is an I/O error") {
  CHECK_THROWS_AS(write_feature_file(two_by_three(), "/nonexistent-dir/x/y.fvb"), IoError);
  CHECK_THROWS_AS(read_feature_file("/nonexistent-dir/y.fvb"), IoError);
}

TEST_CASE("manifest parsing") {
  SUBCASE("three entries") {
    const auto m = parse_manifest(
        "id,path,label,split\n"
        "a,img/a.ppm,food,train\n"
        "b,img/b.ppm,nonfood,test\n"
        "c,img/c.ppm,food,val\n");
    REQUIRE(m.entries.size() == 3);
    CHECK(m.entries[0].label == Label::kFood);
    CHECK(m.entries[1].label == Label::kNonFood);
    CHECK(m.entries[2].label == Label::kFood);
    CHECK(m.entries[2].split == Split::kVal);
    CHECK(m.count(Split::kTrain) == 1);
  }
  SUBCASE("unknown label names its line") {
    try {
      parse_manifest("id,path,label,split\na,a.ppm,drink,train\n");
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("unknown split token") {
    CHECK_THROWS_AS(parse_manifest("id,path,label,split\na,a.ppm,food,holdout\n"), ValidationError);
  }
  SUBCASE("tokens are case sensitive") {
    CHECK_THROWS_AS(parse_manifest("id,path,label,split\na,a.ppm,Food,train\n"), ValidationError);
  }
  SUBCASE("duplicate id") {
    CHECK_THROWS_AS(parse_manifest("id,path,label,split\n"
                                   "img7,a.ppm,food,train\n"
                                   "img7,b.ppm,food,train\n"),
                    ValidationError);
  }
  SUBCASE("bad header") {
    CHECK_THROWS_AS(parse_manifest("name,path,label,split\n"), ValidationError);
  }
  SUBCASE("empty split means unassigned, group column optional") {
    const auto m = parse_manifest("id,path,label,split,group\na,\"dir,x/a.ppm\",food,,unict\n");
    REQUIRE(m.entries.size() == 1);
    CHECK_FALSE(m.entries[0].split.has_value());
    CHECK(m.entries[0].group == "unict");
    CHECK(m.entries[0].path == "dir,x/a.ppm");
    CHECK(parse_manifest(format_manifest(m)) == m);
  }
}

TEST_CASE("align selects a split in manifest order") {
  const FeatureMatrix m(Matrix(3, 2, {1, 1, 2, 2, 3, 3}), {"x", "y", "z"});
  const auto man = parse_manifest(
      "id,path,label,split\n"
      "z,z,food,train\n"
      "y,y,nonfood,test\n"
      "x,x,nonfood,train\n");
  SUBCASE("train rows") {
    const auto s = align(m, man, Split::kTrain);
    REQUIRE(s.features.n() == 2);
    CHECK(s.features.ids() == std::vector<std::string>{"z", "x"});
    CHECK(s.features.row(0)[0] == 3);
    CHECK(s.features.row(1)[0] == 1);
    CHECK(s.labels == std::vector<int>{1, -1});
  }
  SUBCASE("empty split") {
    const auto s = align(m, man, Split::kVal);
    CHECK(s.features.n() == 0);
    CHECK(s.features.d() == 2);
    CHECK(s.labels.empty());
  }
  SUBCASE("missing id") {
    const auto bad = parse_manifest("id,path,label,split\nq,q,food,train\n");
    try {
      align(m, bad, Split::kTrain);
      FAIL("expected alignment error");
    } catch (const AlignmentError& e) {
      CHECK(std::string(e.what()).find("q") != std::string::npos);
    }
  }
}

TEST_CASE("align never duplicates or drops rows") {
  std::mt19937_64 rng(5);
  const std::size_t n = 40;
  Matrix v(n, 1);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    v(i, 0) = static_cast<double>(i);
    ids.push_back("s" + std::to_string(i));
  }
  const FeatureMatrix m(v, ids);
  DatasetManifest man;
  for (std::size_t i = 0; i < n; ++i) {
    man.entries.push_back({ids[n - 1 - i], "p", (rng() % 2) ? Label::kFood : Label::kNonFood,
                           static_cast<Split>(rng() % 3), ""});
  }
  for (auto s : {Split::kTrain, Split::kVal, Split::kTest}) {
    const auto a = align(m, man, s);
    CHECK(a.features.n() == man.count(s));
    std::size_t r = 0;
    for (const auto& e : man.entries) {
      if (e.split != s) continue;
      CHECK(a.features.ids()[r] == e.id);
      ++r;
    }
  }
}
