#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rgnet/errors.hpp"
#include "rgnet/temporal.hpp"

using namespace rgnet;

TEST_CASE("moment_to_interval converts center and width") {
  const auto a = moment_to_interval(Moment(5.0, 2.0));
  CHECK(a.start() == 4.0);
  CHECK(a.end() == 6.0);
  const auto b = moment_to_interval(Moment(0.5, 1.0));
  CHECK(b.start() == 0.0);
  CHECK(b.end() == 1.0);
}

TEST_CASE("interval and moment round trip") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  for (int i = 0; i < 100; ++i) {
    const double s = u(rng);
    const double e = s + 1e-3 + u(rng);
    const auto back = moment_to_interval(interval_to_moment(TimeInterval(s, e)));
    CHECK(std::abs(back.start() - s) <= 1e-9);
    CHECK(std::abs(back.end() - e) <= 1e-9);
  }
}

TEST_CASE("constructors reject invalid values") {
  CHECK_THROWS_AS(TimeInterval(2.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(TimeInterval(0.0, std::nan("")), InvalidArgument);
  CHECK_THROWS_AS(Moment(1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(Moment(1.0, -1.0), InvalidArgument);
  CHECK_THROWS_AS(Moment(INFINITY, 1.0), InvalidArgument);
  CHECK_THROWS_AS(interval_to_moment(TimeInterval(3.0, 3.0)), InvalidArgument);
}

TEST_CASE("interval_iou examples") {
  CHECK(interval_iou({2, 6}, {2, 6}) == 1.0);
  CHECK(interval_iou({2, 6}, {4, 8}) == doctest::Approx(1.0 / 3.0));
  CHECK(interval_iou({0, 1}, {3, 4}) == 0.0);
  CHECK(interval_iou({3, 3}, {3, 3}) == 0.0);
}

TEST_CASE("interval_giou examples") {
  CHECK(interval_giou({2, 6}, {2, 6}) == 1.0);
  CHECK(interval_giou({0, 1}, {3, 4}) == doctest::Approx(-0.5));
  CHECK(interval_giou({2, 6}, {4, 8}) == doctest::Approx(1.0 / 3.0));
  CHECK(interval_giou({5, 5}, {5, 5}) == 1.0);
}

TEST_CASE("iou and giou properties on random pairs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    double s1 = u(rng), e1 = u(rng), s2 = u(rng), e2 = u(rng);
    if (s1 > e1) std::swap(s1, e1);
    if (s2 > e2) std::swap(s2, e2);
    const TimeInterval a(s1, e1), b(s2, e2);
    const double iou = interval_iou(a, b);
    const double giou = interval_giou(a, b);
    CHECK(iou == interval_iou(b, a));
    CHECK(iou == doctest::Approx(oracle::iou(s1, e1, s2, e2)));
    CHECK(giou <= iou);
    CHECK(giou >= -1.0);
    CHECK(giou <= 1.0);
    if (a.length() > 0) CHECK(interval_giou(a, a) == 1.0);
  }
}

TEST_CASE("coverage_fraction examples") {
  CHECK(coverage_fraction({10, 20}, {0, 48}) == 1.0);
  CHECK(coverage_fraction({10, 20}, {15, 63}) == doctest::Approx(0.5));
  CHECK(coverage_fraction({10, 20}, {30, 78}) == 0.0);
  try {
    coverage_fraction({4, 4}, {0, 10});
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.kind() == DataErrorKind::DegenerateAnnotation);
  }
}
