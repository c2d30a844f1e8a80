#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rgnet/dataio.hpp"
#include "rgnet/temporal.hpp"

namespace rgnet {

struct RecallResult {
  double percentage = 0.0;
  std::int64_t hits = 0;
  std::int64_t total = 0;
  std::int64_t empty_queries = 0;  // queries with no predictions, counted as misses
};

// Percentage of queries whose top-k predictions contain one with IoU > theta
// (strict) against the ground truth. `predictions[q]` must be ranked.
RecallResult recall_at_k_iou_detail(std::span<const std::vector<ScoredMoment>> predictions,
                                    std::span<const Moment> ground_truth, std::size_t k, double theta);
double recall_at_k_iou(std::span<const std::vector<ScoredMoment>> predictions, std::span<const Moment> ground_truth,
                       std::size_t k, double theta);

// A ground truth counts as retrieved when one of the top-k windows covers at
// least this fraction of it.
inline constexpr double kRetrievalCoverage = 0.5;

// Percentage of queries with a top-k window covering >= 50% of the ground truth.
double retrieval_recall_at_k(std::span<const std::vector<TimeInterval>> ranked_windows,
                             std::span<const Moment> ground_truth, std::size_t k);

using GroundingKey = std::pair<std::int64_t, double>;  // (k, theta)

struct MetricsReport {
  std::map<GroundingKey, double> grounding;         // end-to-end R_k@theta
  std::map<std::int64_t, double> retrieval;         // R@k
  std::map<GroundingKey, double> oracle_grounding;  // decoded on the best-covering window only
  std::int64_t num_queries = 0;
  std::int64_t num_empty_predictions = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

nlohmann::json report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);
// Aligned plain-text table: one row per section, one column per metric.
std::string report_to_text(const MetricsReport& report);
// "R1@0.5" style label.
std::string grounding_label(const GroundingKey& key);

// Grounding model seen by the oracle protocol: decode one proposal and return
// ranked moments in absolute video seconds.
class ProposalDecoder {
 public:
  virtual ~ProposalDecoder() = default;
  virtual std::vector<ScoredMoment> decode(const QueryFeatures& query, const FrameFeatureSequence& video,
                                           const ProposalCandidate& proposal) const = 0;
};

// For every annotation, decode only the window with maximal ground-truth
// coverage (ties to the earlier window) and score R_k@theta on the result.
std::map<GroundingKey, double> oracle_grounding_eval(const ProposalDecoder& decoder, const Dataset& dataset,
                                                     std::int64_t proposal_frames, std::span<const std::int64_t> ks,
                                                     std::span<const double> thetas);

}  // namespace rgnet
