#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pdvoice/error.hpp"
#include "pdvoice/metrics.hpp"

using namespace pdvoice;

TEST_CASE("confusion counts") {
  auto cm = confusion({1, 1, 0, 0}, {1, 0, 1, 0});
  CHECK(cm == ConfusionMatrix{1, 1, 1, 1});
  auto same = confusion({1, 0, 1, 1, 0}, {1, 0, 1, 1, 0});
  CHECK(same.fp == 0);
  CHECK(same.fn == 0);
  CHECK(same.tp == 3);
  CHECK_THROWS_AS(confusion({1, 0, 1}, {1, 0, 1, 0}), Error);
  try {
    confusion({}, {});
    FAIL("expected EmptyInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyInput);
  }
}

TEST_CASE("metric values") {
  auto m = metrics({2, 1, 1, 1});
  CHECK(m.accuracy == doctest::Approx(0.6));
  CHECK(m.precision == doctest::Approx(2.0 / 3.0));
  CHECK(m.recall == doctest::Approx(2.0 / 3.0));
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0));

  auto perfect = metrics({5, 0, 0, 5});
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  auto none = metrics({0, 0, 3, 7});
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(none.accuracy == doctest::Approx(0.7));

  CHECK_THROWS_AS(metrics({0, 0, 0, 0}), Error);
}
