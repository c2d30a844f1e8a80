#include "rgnet/ranking.hpp"

#include <algorithm>
#include <numeric>

#include "rgnet/errors.hpp"

namespace rgnet {

std::vector<std::size_t> topk_proposals(std::span<const double> scores, std::size_t k) {
  if (scores.empty()) throw DataError(DataErrorKind::EmptyInput, "cannot rank an empty score list");
  if (k < 1) throw InvalidArgument("top-k requires k >= 1");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(k, order.size()));
  return order;
}

std::vector<ScoredMoment> to_absolute(const ProposalPredictions& pred, const TimeInterval& window,
                                      std::optional<double> video_duration_s) {
  if (pred.moments.size() != pred.fg_prob.size()) {
    throw InvalidArgument("prediction moments and probabilities differ in length");
  }
  const double span = window.length();
  std::vector<ScoredMoment> out;
  out.reserve(pred.moments.size());
  for (std::size_t q = 0; q < pred.moments.size(); ++q) {
    const auto& m = pred.moments[q];
    const Moment absolute(window.start() + m.center() * span, m.width() * span);
    auto iv = moment_to_interval(absolute);
    if (video_duration_s) {
      const double lo = std::clamp(iv.start(), 0.0, *video_duration_s);
      const double hi = std::clamp(iv.end(), 0.0, *video_duration_s);
      iv = TimeInterval(lo, hi);
    }
    if (iv.length() > 0.0) {
      out.push_back({interval_to_moment(iv), pred.fg_prob[q]});
    } else {
      // Entirely outside the video after clipping; keep a vanishing moment at
      // the boundary so ranks stay aligned with queries.
      out.push_back({Moment(iv.start(), 1e-9), pred.fg_prob[q]});
    }
  }
  return out;
}

Moment to_normalized(const Moment& absolute, const TimeInterval& window) {
  const double span = window.length();
  if (span <= 0.0) throw InvalidArgument("cannot normalize against a zero-length window");
  return {(absolute.center() - window.start()) / span, absolute.width() / span};
}

std::vector<ScoredMoment> nms_1d(const std::vector<ScoredMoment>& ranked, double iou_threshold) {
  std::vector<ScoredMoment> kept;
  for (const auto& cand : ranked) {
    const auto iv = moment_to_interval(cand.moment);
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const ScoredMoment& k) {
      return interval_iou(moment_to_interval(k.moment), iv) >= iou_threshold;
    });
    if (!suppressed) kept.push_back(cand);
  }
  return kept;
}

std::vector<ScoredMoment> merge_predictions(std::span<const DecodedProposal> proposals, std::size_t k_out,
                                            const MergeOptions& options) {
  std::vector<ScoredMoment> all;
  for (const auto& p : proposals) {
    for (auto sm : to_absolute(p.predictions, p.window, options.video_duration_s)) {
      sm.score *= p.retrieval_score;
      all.push_back(sm);
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const ScoredMoment& a, const ScoredMoment& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.moment.center() < b.moment.center();
  });
  if (options.nms) all = nms_1d(all, options.nms_iou);
  if (all.size() > k_out) all.erase(all.begin() + static_cast<std::ptrdiff_t>(k_out), all.end());
  return all;
}

}  // namespace rgnet
