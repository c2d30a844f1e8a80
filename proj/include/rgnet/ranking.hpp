#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "rgnet/temporal.hpp"

namespace rgnet {

// Indices of the min(k, n) highest scores, descending; equal scores keep the
// earlier index first. Throws DataError on empty input and InvalidArgument for
// k < 1.
std::vector<std::size_t> topk_proposals(std::span<const double> scores, std::size_t k);

// Decoder output for one proposal, in proposal-normalized coordinates.
struct ProposalPredictions {
  std::vector<Moment> moments;  // centers in [0, 1], widths in (0, 1]
  std::vector<double> fg_prob;  // same length as moments
};

// Maps normalized predictions into video seconds. The absolute interval is
// clipped to [0, video_duration_s] when a duration is given; the score of each
// moment is its foreground probability.
std::vector<ScoredMoment> to_absolute(const ProposalPredictions& pred, const TimeInterval& window,
                                      std::optional<double> video_duration_s = std::nullopt);

// Inverse of to_absolute without clipping.
Moment to_normalized(const Moment& absolute, const TimeInterval& window);

struct MergeOptions {
  bool nms = true;
  double nms_iou = 0.5;
  std::optional<double> video_duration_s;
};

struct DecodedProposal {
  ProposalPredictions predictions;
  TimeInterval window;
  double retrieval_score;  // S_r
};

// Greedy 1-D suppression over an already ranked list: drops any moment whose
// IoU with a kept, higher-ranked moment is >= iou_threshold.
std::vector<ScoredMoment> nms_1d(const std::vector<ScoredMoment>& ranked, double iou_threshold);

// Global score S_r * fg_prob, sorted descending (stable; ties by earlier
// center), optionally suppressed, truncated to k_out.
std::vector<ScoredMoment> merge_predictions(std::span<const DecodedProposal> proposals, std::size_t k_out,
                                            const MergeOptions& options = {});

}  // namespace rgnet
