#undef CHECK  // torch logging macro, replaced by the doctest one
#include <doctest.h>

#include "model_fixtures.hpp"
#include "rgnet/errors.hpp"
#include "rgnet/losses.hpp"
#include "rgnet/model.hpp"

using namespace rgnet;
using fixture::randn;

namespace {

void check_ranges(const DecoderOutput& out, std::int64_t n, std::int64_t nq) {
  CHECK(out.moments.sizes() == torch::IntArrayRef({n, nq, 2}));
  CHECK(out.fg_logits.sizes() == torch::IntArrayRef({n, nq}));
  CHECK(torch::isfinite(out.moments).all().item<bool>());
  CHECK(torch::isfinite(out.fg_logits).all().item<bool>());
  CHECK(out.moments.min().item<double>() >= 0.0);
  CHECK(out.moments.max().item<double>() <= 1.0);
}

}  // namespace

TEST_CASE("decoder output shape and range") {
  auto m = fixture::literal_model();
  const auto out = decode_moments(*m->decoder, randn({2, 6, 8}, 1), torch::ones({2, 6}, torch::kBool));
  check_ranges(out, 2, 3);
  const auto pred = to_predictions(out, 1);
  CHECK(pred.moments.size() == 3);
  for (double p : pred.fg_prob) CHECK((p > 0.0 && p < 1.0));
}

TEST_CASE("decoder stays in range for arbitrary parameters") {
  auto m = fixture::literal_model();
  {
    torch::NoGradGuard g;
    std::uint64_t s = 40;
    for (auto& p : m->decoder->parameters()) p.copy_(randn(p.sizes().vec(), s++) * 5.0);
  }
  check_ranges(decode_moments(*m->decoder, randn({3, 6, 8}, 2) * 10.0, torch::ones({3, 6}, torch::kBool)), 3, 3);
}

TEST_CASE("duplicated proposals decode identically") {
  auto m = fixture::literal_model();
  const auto p = randn({1, 6, 8}, 3);
  const auto out = decode_moments(*m->decoder, torch::cat({p, p}, 0), torch::ones({2, 6}, torch::kBool));
  CHECK(torch::equal(out.moments[0], out.moments[1]));
  CHECK(torch::equal(out.fg_logits[0], out.fg_logits[1]));
  const auto alone = decode_moments(*m->decoder, p, torch::ones({1, 6}, torch::kBool));
  CHECK((alone.moments[0] - out.moments[0]).abs().max().item<double>() < 1e-12);
}

TEST_CASE("decoder ignores the values of padded frames") {
  auto m = fixture::literal_model();
  auto valid = torch::ones({1, 6}, torch::kBool);
  valid[0][4] = false;
  valid[0][5] = false;
  const auto p = randn({1, 6, 8}, 4);
  auto q = p.clone();
  q[0][4] = randn({8}, 5) * 100.0;
  q[0][5] = randn({8}, 6) * 100.0;
  const auto a = decode_moments(*m->decoder, p, valid);
  const auto b = decode_moments(*m->decoder, q, valid);
  CHECK((a.moments - b.moments).abs().max().item<double>() < 1e-12);
  CHECK((a.fg_logits - b.fg_logits).abs().max().item<double>() < 1e-12);
}

TEST_CASE("decoder rejects an all-padding proposal") {
  auto m = fixture::literal_model();
  try {
    decode_moments(*m->decoder, randn({1, 4, 8}, 7), torch::zeros({1, 4}, torch::kBool));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.kind() == DataErrorKind::DegenerateProposal);
  }
}

TEST_CASE("decoder overfits one proposal") {
  auto cfg = fixture::literal_config(16);
  auto m = fixture::literal_model(3, cfg);
  const auto p = randn({1, 16, 16}, 8);
  const auto valid = torch::ones({1, 16}, torch::kBool);
  const Moment target(0.4, 0.25);
  torch::optim::AdamW opt(m->decoder->parameters(), torch::optim::AdamWOptions(1e-2));
  for (int step = 0; step < 200; ++step) {
    opt.zero_grad();
    const auto out = decode_moments(*m->decoder, p, valid);
    grounding_loss(out.moments[0], out.fg_logits[0], std::span(&target, 1), LossWeights{}).total.backward();
    opt.step();
  }
  torch::NoGradGuard g;
  const auto pred = to_predictions(decode_moments(*m->decoder, p, valid), 0);
  const auto best = std::max_element(pred.fg_prob.begin(), pred.fg_prob.end()) - pred.fg_prob.begin();
  CHECK(interval_iou(moment_to_interval(pred.moments[static_cast<std::size_t>(best)]), moment_to_interval(target)) >
        0.7);
}
