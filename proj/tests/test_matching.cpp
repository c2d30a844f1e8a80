#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "rgnet/errors.hpp"
#include "rgnet/matching.hpp"

using namespace rgnet;

TEST_CASE("hungarian 2x2 example") {
  const auto a = hungarian_match({2, 2, {1, 2, 3, 0}});
  CHECK(a.total_cost == 1.0);
  REQUIRE(a.pairs.size() == 2);
  CHECK(a.pairs[0] == std::pair<std::int64_t, std::int64_t>{0, 0});
  CHECK(a.pairs[1] == std::pair<std::int64_t, std::int64_t>{1, 1});
  CHECK(a.unmatched_predictions.empty());
}

TEST_CASE("hungarian picks the zero diagonal") {
  CostMatrix c{4, 4, std::vector<double>(16, 5.0)};
  for (int i = 0; i < 4; ++i) c.values[static_cast<std::size_t>(i * 4 + i)] = 0.0;
  const auto a = hungarian_match(c);
  CHECK(a.total_cost == 0.0);
  for (const auto& [p, t] : a.pairs) CHECK(p == t);
}

TEST_CASE("hungarian matches brute force on random matrices") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_int_distribution<int> size(1, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = size(rng);
    const int cols = std::uniform_int_distribution<int>(1, rows)(rng);
    CostMatrix c{rows, cols, {}};
    for (int i = 0; i < rows * cols; ++i) c.values.push_back(u(rng));
    const auto a = hungarian_match(c);
    CHECK(a.total_cost == doctest::Approx(oracle::min_injective_cost(c.values, rows, cols)).epsilon(1e-12));

    REQUIRE(a.pairs.size() == static_cast<std::size_t>(cols));
    std::set<std::int64_t> preds;
    double sum = 0;
    for (std::size_t k = 0; k < a.pairs.size(); ++k) {
      CHECK(a.pairs[k].second == static_cast<std::int64_t>(k));
      preds.insert(a.pairs[k].first);
      sum += c(a.pairs[k].first, a.pairs[k].second);
    }
    CHECK(preds.size() == a.pairs.size());
    CHECK(sum == doctest::Approx(a.total_cost));
    CHECK(a.unmatched_predictions.size() == static_cast<std::size_t>(rows - cols));
    for (auto p : a.unmatched_predictions) CHECK_FALSE(preds.contains(p));
  }
}

TEST_CASE("hungarian 5x3 rectangular") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CostMatrix c{5, 3, {}};
  for (int i = 0; i < 15; ++i) c.values.push_back(u(rng));
  CHECK(hungarian_match(c).total_cost == doctest::Approx(oracle::min_injective_cost(c.values, 5, 3)));
}

TEST_CASE("hungarian errors") {
  CHECK_THROWS_AS(hungarian_match({2, 2, {1, NAN, 0, 0}}), NumericError);
  CHECK_THROWS_AS(hungarian_match({2, 2, {1, INFINITY, 0, 0}}), NumericError);
  CHECK_THROWS_AS(hungarian_match({1, 2, {1, 2}}), InvalidArgument);
}
