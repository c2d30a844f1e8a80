#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "rgnet/errors.hpp"
#include "rgnet/ranking.hpp"

using namespace rgnet;

namespace {

std::vector<std::size_t> topk(std::vector<double> s, std::size_t k) { return topk_proposals(s, k); }

}  // namespace

TEST_CASE("topk examples") {
  CHECK(topk({0.1, 0.9, 0.5}, 2) == std::vector<std::size_t>{1, 2});
  CHECK(topk({0.4, 0.4, 0.4}, 2) == std::vector<std::size_t>{0, 1});
  CHECK(topk({0.1, 0.9, 0.5}, 10) == std::vector<std::size_t>{1, 2, 0});
  CHECK_THROWS_AS(topk({}, 1), DataError);
  CHECK_THROWS_AS(topk({0.3}, 0), InvalidArgument);
}

TEST_CASE("topk properties") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(1 + trial % 17);
    for (auto& x : s) x = std::round(u(rng) * 8.0) / 8.0;  // frequent ties

    auto all = topk(s, s.size());
    std::vector<std::size_t> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> iota(s.size());
    std::iota(iota.begin(), iota.end(), 0);
    CHECK(sorted == iota);
    for (std::size_t i = 1; i < all.size(); ++i) {
      CHECK(s[all[i - 1]] >= s[all[i]]);
      if (s[all[i - 1]] == s[all[i]]) CHECK(all[i - 1] < all[i]);
    }

    const std::size_t k = 1 + static_cast<std::size_t>(trial) % s.size();
    const auto picked = topk(s, k);
    for (auto idx : picked) {
      auto boosted = s;
      boosted[idx] += 0.5;
      const auto again = topk(boosted, k);
      CHECK(std::find(again.begin(), again.end(), idx) != again.end());
    }
  }
}

TEST_CASE("to_absolute affine map") {
  ProposalPredictions p{{Moment(0.5, 0.25)}, {0.7}};
  const auto out = to_absolute(p, TimeInterval(48, 96));
  REQUIRE(out.size() == 1);
  CHECK(out[0].moment.center() == doctest::Approx(72.0));
  CHECK(out[0].moment.width() == doctest::Approx(12.0));
  CHECK(out[0].score == 0.7);

  ProposalPredictions edge{{Moment(0.0, 0.2)}, {0.5}};
  const auto e = to_absolute(edge, TimeInterval(10, 20));
  CHECK(e[0].moment.center() == doctest::Approx(10.0));
  const auto clipped = to_absolute(edge, TimeInterval(0, 10), 30.0);
  CHECK(moment_to_interval(clipped[0].moment).start() == 0.0);
}

TEST_CASE("normalize and denormalize round trip") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  const TimeInterval window(37.5, 101.5);
  for (int i = 0; i < 100; ++i) {
    const Moment m(u(rng), u(rng));
    const auto back = to_normalized(to_absolute({{m}, {0.5}}, window)[0].moment, window);
    CHECK(std::abs(back.center() - m.center()) <= 1e-9);
    CHECK(std::abs(back.width() - m.width()) <= 1e-9);
  }
}

TEST_CASE("merge single proposal sorts by product score") {
  DecodedProposal p{{{Moment(0.1, 0.1), Moment(0.3, 0.1), Moment(0.5, 0.1), Moment(0.7, 0.1), Moment(0.9, 0.1)},
                     {0.2, 0.9, 0.4, 0.6, 0.1}},
                    TimeInterval(0, 100),
                    0.5};
  const auto out = merge_predictions(std::span(&p, 1), 5, {.nms = false});
  REQUIRE(out.size() == 5);
  const std::vector<double> centers{30, 70, 50, 10, 90};
  for (std::size_t i = 0; i < 5; ++i) CHECK(out[i].moment.center() == doctest::Approx(centers[i]));
  CHECK(out[0].score == doctest::Approx(0.45));
}

TEST_CASE("merge ranks the higher retrieval score first") {
  std::vector<DecodedProposal> ps{
      {{{Moment(0.5, 0.2), Moment(0.2, 0.2)}, {0.8, 0.8}}, TimeInterval(100, 140), 0.1},
      {{{Moment(0.5, 0.2), Moment(0.2, 0.2)}, {0.8, 0.8}}, TimeInterval(0, 40), 0.9},
  };
  const auto out = merge_predictions(ps, 4, {.nms = false});
  REQUIRE(out.size() == 4);
  CHECK(out[0].moment.center() < 40.0);
  CHECK(out[1].moment.center() < 40.0);
  CHECK(out[0].moment.center() < out[1].moment.center());  // equal score, earlier center first
  CHECK(out[2].moment.center() > 100.0);
}

TEST_CASE("nms removes the lower scored overlapping moment") {
  // [0,10] vs [2,10]: IoU 0.8
  std::vector<ScoredMoment> ranked{{interval_to_moment({0, 10}), 0.9}, {interval_to_moment({2, 10}), 0.8},
                                   {interval_to_moment({20, 30}), 0.7}};
  const auto kept = nms_1d(ranked, 0.5);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].score == 0.9);
  CHECK(kept[1].score == 0.7);
  CHECK(nms_1d(ranked, 0.85).size() == 3);
}

TEST_CASE("merge without nms is a stable sort of products") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::vector<DecodedProposal> ps;
  for (int i = 0; i < 3; ++i) {
    ProposalPredictions pred;
    for (int q = 0; q < 4; ++q) {
      pred.moments.emplace_back(u(rng), u(rng) * 0.5);
      pred.fg_prob.push_back(u(rng));
    }
    ps.push_back({pred, TimeInterval(16.0 * i, 16.0 * i + 32.0), u(rng)});
  }
  const auto out = merge_predictions(ps, 100, {.nms = false});
  CHECK(out.size() == 12);
  for (std::size_t i = 1; i < out.size(); ++i) CHECK(out[i - 1].score >= out[i].score);
  CHECK(merge_predictions(ps, 3, {.nms = false}).size() == 3);
}
