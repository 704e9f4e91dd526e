#include <algorithm>
#include <random>

#include "doctest.h"

#include "fallcascade/error.hpp"
#include "fallcascade/metrics/classification_report.hpp"

using namespace fallcascade;
using namespace fallcascade::metrics;

TEST_CASE("confusion tallies pairs") {
  SUBCASE("truth equals prediction gives a diagonal matrix") {
    const std::vector<int> y{0, 1, 2, 2, 1};
    const auto m = confusion(y, y, 3);
    CHECK(m.at(0, 0) == 1);
    CHECK(m.at(1, 1) == 2);
    CHECK(m.at(2, 2) == 2);
    CHECK(m.total() == 5);
  }
  SUBCASE("single off-diagonal pair") {
    const auto m = confusion(std::vector<int>{1}, std::vector<int>{3}, 5);
    CHECK(m.at(1, 3) == 1);
    CHECK(m.total() == 1);
  }
  SUBCASE("random pairs match a brute-force count") {
    std::mt19937 rng(4);
    std::vector<int> t(100), p(100);
    for (auto& v : t) v = static_cast<int>(rng() % 4);
    for (auto& v : p) v = static_cast<int>(rng() % 4);
    const auto m = confusion(t, p, 4);
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        int count = 0;
        for (std::size_t i = 0; i < t.size(); ++i) count += t[i] == a && p[i] == b;
        CHECK(m.at(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) == count);
      }
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(confusion(std::vector<int>{0, 1}, std::vector<int>{0}, 2), DataError);
    CHECK_THROWS_AS(confusion(std::vector<int>{2}, std::vector<int>{0}, 2), DataError);
  }
}

TEST_CASE("binary recall from printed fall counts") {
  ConfusionMatrix m(2);
  m.at(0, 0) = 10;
  m.at(0, 1) = 0;
  m.at(1, 0) = 1803 - 1788;
  m.at(1, 1) = 1788;
  const auto r = report(m, {"no_fall", "fall"});
  CHECK(r["fall"].recall == doctest::Approx(1788.0 / 1803.0).epsilon(1e-15));
  CHECK(r["fall"].recall == doctest::Approx(0.9917).epsilon(1e-4));
  CHECK(r["fall"].support == 1803);
}

TEST_CASE("perfect five-class matrix") {
  ConfusionMatrix m(5);
  for (std::size_t c = 0; c < 5; ++c) m.at(c, c) = 3 + static_cast<std::int64_t>(c);
  const auto r = report(m, {"HF", "KF", "BF", "SF", "SDF"});
  for (const auto& c : r.classes) CHECK(c.f1 == 1.0);
  CHECK(r.macro_f1 == 1.0);
}

TEST_CASE("hand-computed three-class report") {
  ConfusionMatrix m(3);
  const int counts[3][3] = {{5, 1, 0}, {2, 3, 1}, {0, 0, 4}};
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t p = 0; p < 3; ++p) m.at(t, p) = counts[t][p];
  }
  const auto r = report(m, {"a", "b", "c"});
  CHECK(r.classes[0].precision == doctest::Approx(5.0 / 7.0));
  CHECK(r.classes[0].recall == doctest::Approx(5.0 / 6.0));
  CHECK(r.classes[0].f1 == doctest::Approx(10.0 / 13.0));
  CHECK(r.classes[1].f1 == doctest::Approx(3.0 / 5.0));
  CHECK(r.classes[2].precision == doctest::Approx(4.0 / 5.0));
  CHECK(r.classes[2].f1 == doctest::Approx(8.0 / 9.0));
  CHECK(r.macro_f1 == doctest::Approx((10.0 / 13.0 + 0.6 + 8.0 / 9.0) / 3.0));
  CHECK(r.accuracy == doctest::Approx(12.0 / 16.0));
}

TEST_CASE("empty denominators report zero with a flag") {
  ConfusionMatrix m(3);
  m.at(0, 0) = 4;
  m.at(0, 2) = 1;
  m.at(1, 0) = 2;
  const auto r = report(m, {"a", "b", "c"});
  CHECK(r["c"].support == 0);
  CHECK(r["c"].recall_undefined);
  CHECK(r["c"].f1 == 0.0);
  CHECK(r["b"].precision_undefined);
  CHECK(r["b"].f1 == 0.0);
  // Zero-support classes do not enter the macro average.
  CHECK(r.macro_f1 == doctest::Approx((r["a"].f1 + r["b"].f1) / 2.0));
  const auto summary = report_summary(r);
  CHECK(summary["flags"].size() == 2);
}

TEST_CASE("report properties") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t classes = 2 + rng() % 5;
    std::vector<int> t(60), p(60);
    for (auto& v : t) v = static_cast<int>(rng() % classes);
    for (auto& v : p) v = static_cast<int>(rng() % classes);
    std::vector<std::string> labels;
    for (std::size_t c = 0; c < classes; ++c) labels.push_back("c" + std::to_string(c));
    const auto base = report(confusion(t, p, classes), labels);

    std::vector<std::size_t> order(t.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> t2, p2;
    for (auto i : order) {
      t2.push_back(t[i]);
      p2.push_back(p[i]);
    }
    const auto permuted = report(confusion(t2, p2, classes), labels);
    CHECK(permuted.matrix == base.matrix);
    CHECK(permuted.macro_f1 == base.macro_f1);

    auto merged = confusion(std::span(t).first(25), std::span(p).first(25), classes);
    merged += confusion(std::span(t).subspan(25), std::span(p).subspan(25), classes);
    CHECK(merged == base.matrix);

    for (const auto& c : base.classes) {
      CHECK(c.precision >= 0.0);
      CHECK(c.precision <= 1.0);
      CHECK(c.recall >= 0.0);
      CHECK(c.recall <= 1.0);
      CHECK(c.f1 >= 0.0);
      CHECK(c.f1 <= 1.0);
    }
  }
}

TEST_CASE("report output formats") {
  ConfusionMatrix m(2);
  m.at(0, 0) = 3;
  m.at(1, 1) = 1;
  m.at(1, 0) = 2;
  const auto r = report(m, {"no_fall", "fall"});
  const std::string csv = report_csv(r);
  CHECK(csv.rfind("class,support,precision,recall,f1\n", 0) == 0);
  CHECK(csv.find("fall,3,1,0.3333333333333333,0.5\n") != std::string::npos);
  CHECK(format_report(r).find("0.33") != std::string::npos);
  CHECK_THROWS_AS(report(m, {"only"}), DataError);
}
