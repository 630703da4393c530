#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "fooddet/error.hpp"
#include "fooddet/metrics.hpp"

using namespace fooddet;

namespace {

struct Labelled {
  std::vector<int> pred;
  std::vector<int> truth;
  std::vector<std::string> ids;
};

Labelled from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  Labelled l;
  auto add = [&](int p, int t, std::size_t n, const char* tag) {
    for (std::size_t i = 0; i < n; ++i) {
      l.pred.push_back(p);
      l.truth.push_back(t);
      l.ids.push_back(std::string(tag) + std::to_string(i));
    }
  };
  add(1, 1, tp, "tp");
  add(1, -1, fp, "fp");
  add(-1, -1, tn, "tn");
  add(-1, 1, fn, "fn");
  return l;
}

}  // namespace

TEST_CASE("hand-computed rates") {
  const auto l = from_counts(3, 1, 5, 1);
  const auto r = confusion(l.pred, l.truth, l.ids);
  CHECK(r.confusion == Confusion{3, 1, 5, 1});
  CHECK(*r.acc == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(*r.tpr == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(*r.tnr == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(r.fp_ids == std::vector<std::string>{"fp0"});
  CHECK(r.fn_ids == std::vector<std::string>{"fn0"});
}

TEST_CASE("all correct and single-class truth") {
  const auto ok = from_counts(4, 0, 3, 0);
  const auto r = confusion(ok.pred, ok.truth, ok.ids);
  CHECK(*r.acc == 1.0);
  CHECK(r.fp_ids.empty());
  CHECK(r.fn_ids.empty());

  const auto pos = from_counts(2, 0, 0, 1);
  const auto s = confusion(pos.pred, pos.truth, pos.ids);
  CHECK_FALSE(s.tnr.has_value());
  CHECK(s.tpr.has_value());

  const auto none = report_from_counts({});
  CHECK_FALSE(none.acc.has_value());
  CHECK(format_report_csv(none).find(kUndefinedMarker) != std::string::npos);
}

TEST_CASE("length mismatch") {
  const std::vector<int> p{1, -1};
  const std::vector<int> t{1};
  const std::vector<std::string> ids{"a", "b"};
  CHECK_THROWS_AS(confusion(p, t, ids), ShapeError);
}

TEST_CASE("merge identities") {
  const auto a = report_from_counts({3, 1, 5, 1});
  const std::vector<EvalReport> twice{a, a};
  const auto m = weighted_merge(twice);
  CHECK(m.acc == a.acc);
  CHECK(m.tpr == a.tpr);
  CHECK(m.tnr == a.tnr);

  const std::vector<EvalReport> pair{report_from_counts({1, 0, 0, 0}), report_from_counts({0, 0, 1, 0})};
  CHECK(*weighted_merge(pair).acc == 1.0);

  CHECK_THROWS_AS(weighted_merge(std::span<const EvalReport>{}), ValidationError);

  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    Confusion c1{1 + rng() % 50, rng() % 50, 1 + rng() % 50, rng() % 50};
    Confusion c2{1 + rng() % 50, rng() % 50, 1 + rng() % 50, rng() % 50};
    const auto r1 = report_from_counts(c1);
    const auto r2 = report_from_counts(c2);
    const std::vector<EvalReport> both{r1, r2};
    const auto j = weighted_merge(both);
    const double p1 = static_cast<double>(c1.positives());
    const double n1 = static_cast<double>(c1.negatives());
    const double p2 = static_cast<double>(c2.positives());
    const double n2 = static_cast<double>(c2.negatives());
    const double expect = (*r1.tpr * p1 + *r1.tnr * n1 + *r2.tpr * p2 + *r2.tnr * n2) / (p1 + n1 + p2 + n2);
    CHECK(std::abs(*j.acc - expect) < 1e-12);
    // brute-force recount
    const auto l1 = from_counts(c1.tp, c1.fp, c1.tn, c1.fn);
    const auto l2 = from_counts(c2.tp, c2.fp, c2.tn, c2.fn);
    std::size_t right = 0;
    for (std::size_t i = 0; i < l1.pred.size(); ++i) right += l1.pred[i] == l1.truth[i];
    for (std::size_t i = 0; i < l2.pred.size(); ++i) right += l2.pred[i] == l2.truth[i];
    CHECK(*j.acc == static_cast<double>(right) / static_cast<double>(l1.pred.size() + l2.pred.size()));
  }
}

TEST_CASE("accuracy is the class-weighted mean of the rates, and polarity swaps them") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto l = from_counts(1 + rng() % 30, rng() % 30, 1 + rng() % 30, rng() % 30);
    const auto r = confusion(l.pred, l.truth, l.ids);
    const double p = static_cast<double>(r.confusion.positives());
    const double n = static_cast<double>(r.confusion.negatives());
    CHECK(std::abs(*r.acc - (*r.tpr * p + *r.tnr * n) / (p + n)) < 1e-12);

    auto neg = l;
    for (auto& v : neg.pred) v = -v;
    for (auto& v : neg.truth) v = -v;
    const auto s = confusion(neg.pred, neg.truth, neg.ids);
    CHECK(s.tpr == r.tnr);
    CHECK(s.tnr == r.tpr);
    CHECK(s.confusion.fp == r.confusion.fn);
    CHECK(s.confusion.fn == r.confusion.fp);
    CHECK(s.fp_ids == r.fn_ids);
  }
}

TEST_CASE("permutation invariance") {
  std::mt19937_64 rng(6);
  auto l = from_counts(7, 3, 9, 4);
  const auto base = confusion(l.pred, l.truth, l.ids);
  std::vector<std::size_t> order(l.pred.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  Labelled shuffled;
  for (auto i : order) {
    shuffled.pred.push_back(l.pred[i]);
    shuffled.truth.push_back(l.truth[i]);
    shuffled.ids.push_back(l.ids[i]);
  }
  const auto r = confusion(shuffled.pred, shuffled.truth, shuffled.ids);
  CHECK(r.confusion == base.confusion);
  CHECK(r.acc == base.acc);
  auto a = r.fp_ids;
  auto b = base.fp_ids;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
}

TEST_CASE("report CSV round trip and percentage text") {
  const auto r = report_from_counts({3, 1, 5, 1});
  const auto back = parse_report_csv(format_report_csv(r));
  CHECK(back.confusion == r.confusion);
  CHECK(back.acc == r.acc);
  CHECK(back.tnr == r.tnr);
  CHECK(format_percent(0.9901) == "99.01%");
  CHECK(format_percent(std::nullopt) == kUndefinedMarker);
  CHECK_THROWS_AS(parse_report_csv("metric,value\ntp,x\n"), FormatError);
}
