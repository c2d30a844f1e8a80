#undef CHECK  // torch logging macro, replaced by the doctest one
#include <doctest.h>

#include <cmath>

#include "model_fixtures.hpp"
#include "rgnet/errors.hpp"
#include "rgnet/losses.hpp"

using namespace rgnet;
using fixture::randn;

namespace {

torch::Tensor t64(std::vector<double> v) { return torch::tensor(v, torch::kFloat64); }

void set_identity(torch::nn::Linear& l) {
  torch::NoGradGuard g;
  l->weight.copy_(torch::eye(l->weight.size(0), torch::kFloat64));
  l->bias.zero_();
}

}  // namespace

TEST_CASE("sampling score examples") {
  SamplingHead head(3);
  head->to(torch::kFloat64);
  set_identity(head->f_r);
  set_identity(head->f_c);
  const auto r = t64({1, 0, 0}).view({1, 3});
  const auto p = t64({1, 0, 0, 0, 1, 0}).view({1, 2, 3});
  const auto s = sampling_score(*head, r, p);
  CHECK(s[0][0].item<double>() == 1.0);
  CHECK(s[0][1].item<double>() == 0.0);
  CHECK(sampling_score(*head, torch::zeros({1, 3}, torch::kFloat64), p).eq(0).all().item<bool>());

  SamplingHead rnd(4);
  rnd->to(torch::kFloat64);
  const auto rr = randn({1, 4}, 1);
  const auto pp = randn({1, 5, 4}, 2);
  const auto got = sampling_score(*rnd, rr, pp);
  const auto fr = fixture::to_vec(rnd->f_r(rr));
  for (int j = 0; j < 5; ++j) {
    const auto fc = fixture::to_vec(rnd->f_c(pp[0][j]));
    double dot = 0;
    for (int c = 0; c < 4; ++c) dot += fr[c] * fc[c];
    CHECK(std::abs(got[0][j].item<double>() - dot) < 1e-9);
  }
}

TEST_CASE("hinge sampling loss examples") {
  const std::vector<std::int64_t> in{0}, out{1}, none{};
  CHECK(sampling_loss(t64({0.6, 0.3}), in, out, 0.2, 0).value.item<double>() == 0.0);
  CHECK(sampling_loss(t64({0.4, 0.5}), in, out, 0.2, 0).value.item<double>() == doctest::Approx(0.3));
  const auto skipped = sampling_loss(t64({0.4, 0.5}), in, none, 0.2, 0);
  CHECK(skipped.skipped);
  CHECK(skipped.value.item<double>() == 0.0);

  const std::vector<std::int64_t> many_in{0, 1, 2}, many_out{3, 4, 5};
  const auto a = sampling_loss(randn({6}, 3), many_in, many_out, 0.2, 42);
  const auto b = sampling_loss(randn({6}, 3), many_in, many_out, 0.2, 42);
  CHECK(a.in_index == b.in_index);
  CHECK(a.out_index == b.out_index);
  CHECK(a.in_index <= 2);
  CHECK(a.out_index >= 3);
}

TEST_CASE("contrastive loss examples") {
  CHECK(contrastive_loss_from_logits(t64({3.7}).view({1, 1})).item<double>() == 0.0);
  auto logits = t64({2, 0, 0, 0, 0, 0, 0, 0, 0}).view({3, 3});
  const double row0 = -std::log(std::exp(2.0) / (std::exp(2.0) + 2.0));
  CHECK(row0 == doctest::Approx(0.2395).epsilon(1e-3));
  CHECK(contrastive_loss_from_logits(logits).item<double>() == doctest::Approx(row0 + 2 * std::log(3.0)));

  const auto l = randn({4, 4}, 4);
  auto shifted = l.clone();
  shifted[2] += 5.0;
  CHECK(contrastive_loss_from_logits(shifted).item<double>() ==
        doctest::Approx(contrastive_loss_from_logits(l).item<double>()));
  CHECK_THROWS_AS(contrastive_loss_from_logits(randn({3, 2}, 5)), InvalidArgument);

  ScoreHead head(4);
  head->to(torch::kFloat64);
  const auto ctx = randn({3, 3, 4}, 6);
  CHECK(contrastive_loss(*head, ctx).item<double>() ==
        doctest::Approx(contrastive_loss_from_logits(head->forward(ctx)).item<double>()));
}

TEST_CASE("giou_1d agrees with the interval version") {
  const auto a = t64({5, 2, 0.5, 1}).view({2, 2});
  const auto b = t64({6, 2, 3.5, 1}).view({2, 2});
  const auto g = giou_1d(a, b);
  CHECK(g[0].item<double>() == doctest::Approx(interval_giou({4, 6}, {5, 7})));
  CHECK(g[1].item<double>() == doctest::Approx(-0.5));
}

TEST_CASE("grounding loss at a perfect match") {
  const Moment target(0.5, 0.2);
  const auto moments = t64({0.5, 0.2, 0.1, 0.1}).view({2, 2});
  const auto logits = t64({30.0, -30.0});
  LossWeights w;
  const auto g = grounding_loss(moments, logits, std::span(&target, 1), w);
  CHECK(g.l1.item<double>() == 0.0);
  CHECK(g.giou.item<double>() == doctest::Approx(0.0));
  CHECK(g.ce.item<double>() < 1e-9);
  CHECK(g.assignment.pairs[0].first == 0);
}

TEST_CASE("grounding matching prefers the confident query") {
  const Moment target(0.3, 0.2);
  const auto moments = t64({0.5, 0.3, 0.5, 0.3}).view({2, 2});
  const auto logits = torch::logit(t64({0.1, 0.9}));
  const auto g = grounding_loss(moments, logits, std::span(&target, 1), LossWeights{});
  CHECK(g.assignment.pairs[0].first == 1);
  CHECK(g.assignment.unmatched_predictions == std::vector<std::int64_t>{0});
}

TEST_CASE("grounding loss is linear in the L1 weight") {
  const std::vector<Moment> targets{Moment(0.3, 0.2), Moment(0.7, 0.1)};
  // predictions 0 and 2 sit next to the targets, so the matching cannot change with the weight
  const auto moments = t64({0.32, 0.18, 0.9, 0.05, 0.69, 0.12, 0.1, 0.3}).view({4, 2});
  const auto logits = randn({4}, 8);
  LossWeights w;
  w.l1 = 2.0;
  const auto a = grounding_loss(moments, logits, targets, w);
  w.l1 = 4.0;
  const auto b = grounding_loss(moments, logits, targets, w);
  REQUIRE(a.assignment.pairs == b.assignment.pairs);
  CHECK(a.assignment.pairs[0].first == 0);
  CHECK(a.assignment.pairs[1].first == 2);
  CHECK(b.l1.item<double>() == doctest::Approx(2.0 * a.l1.item<double>()));
  CHECK(b.giou.item<double>() == doctest::Approx(a.giou.item<double>()));
  CHECK((a.total - a.l1 - a.giou - a.ce).abs().item<double>() < 1e-12);
}

TEST_CASE("grounding loss errors") {
  const auto moments = t64({0.5, 0.2}).view({1, 2});
  const auto logits = t64({0.0});
  CHECK_THROWS_AS(grounding_loss(moments, logits, {}, LossWeights{}), InvalidArgument);
  const Moment outside(1.5, 0.2);
  CHECK_THROWS_AS(grounding_loss(moments, logits, std::span(&outside, 1), LossWeights{}), InvalidArgument);
}

TEST_CASE("background loss pushes every query down") {
  LossWeights w;
  const auto low = background_loss(t64({-10, -10}), w).item<double>();
  const auto high = background_loss(t64({3, 3}), w).item<double>();
  CHECK(low < high);
  CHECK(low > 0.0);
}

TEST_CASE("total loss combination") {
  LossWeights w;
  const auto zero = torch::zeros({}, torch::kFloat64);
  const auto one = torch::ones({}, torch::kFloat64);
  CHECK(total_loss(zero, zero, zero, w).total.item<double>() == 0.0);
  CHECK(total_loss(one, one, one, w).total.item<double>() == 12.0);
  const auto samp = t64({0.37}).squeeze(), cont = t64({1.9}).squeeze(), ground = t64({4.2}).squeeze();
  const auto b = total_loss(samp, cont, ground, w);
  CHECK(std::abs(b.total.item<double>() - (w.samp * b.samp + w.cont * b.cont + b.ground).item<double>()) < 1e-9);
}
