#include "rgnet/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "rgnet/errors.hpp"

namespace rgnet {

using nlohmann::json;

RecallResult recall_at_k_iou_detail(std::span<const std::vector<ScoredMoment>> predictions,
                                    std::span<const Moment> ground_truth, std::size_t k, double theta) {
  if (predictions.size() != ground_truth.size()) {
    throw InvalidArgument("predictions and ground truth differ in query count");
  }
  if (k < 1) throw InvalidArgument("recall requires k >= 1");
  RecallResult r;
  r.total = static_cast<std::int64_t>(ground_truth.size());
  for (std::size_t q = 0; q < ground_truth.size(); ++q) {
    const auto& ranked = predictions[q];
    if (ranked.empty()) {
      ++r.empty_queries;
      continue;
    }
    const auto gt = moment_to_interval(ground_truth[q]);
    const std::size_t limit = std::min(k, ranked.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (interval_iou(moment_to_interval(ranked[i].moment), gt) > theta) {
        ++r.hits;
        break;
      }
    }
  }
  r.percentage = r.total == 0 ? 0.0 : 100.0 * static_cast<double>(r.hits) / static_cast<double>(r.total);
  return r;
}

double recall_at_k_iou(std::span<const std::vector<ScoredMoment>> predictions, std::span<const Moment> ground_truth,
                       std::size_t k, double theta) {
  return recall_at_k_iou_detail(predictions, ground_truth, k, theta).percentage;
}

double retrieval_recall_at_k(std::span<const std::vector<TimeInterval>> ranked_windows,
                             std::span<const Moment> ground_truth, std::size_t k) {
  if (ranked_windows.size() != ground_truth.size()) {
    throw InvalidArgument("ranked windows and ground truth differ in query count");
  }
  if (ground_truth.empty()) return 0.0;
  std::int64_t hits = 0;
  for (std::size_t q = 0; q < ground_truth.size(); ++q) {
    const auto gt = moment_to_interval(ground_truth[q]);
    const auto& windows = ranked_windows[q];
    const std::size_t limit = std::min(k, windows.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (coverage_fraction(gt, windows[i]) >= kRetrievalCoverage) {
        ++hits;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(ground_truth.size());
}

std::string grounding_label(const GroundingKey& key) {
  std::ostringstream os;
  os << 'R' << key.first << '@' << key.second;
  return os.str();
}

namespace {

json grounding_to_json(const std::map<GroundingKey, double>& table) {
  json arr = json::array();
  for (const auto& [key, value] : table) {
    arr.push_back({{"k", key.first}, {"theta", key.second}, {"label", grounding_label(key)}, {"value", value}});
  }
  return arr;
}

std::map<GroundingKey, double> grounding_from_json(const json& arr) {
  std::map<GroundingKey, double> table;
  for (const auto& e : arr) {
    table[{e.at("k").get<std::int64_t>(), e.at("theta").get<double>()}] = e.at("value").get<double>();
  }
  return table;
}

}  // namespace

json report_to_json(const MetricsReport& report) {
  json retrieval = json::array();
  for (const auto& [k, value] : report.retrieval) {
    retrieval.push_back({{"k", k}, {"label", "R@" + std::to_string(k)}, {"value", value}});
  }
  return {{"grounding", grounding_to_json(report.grounding)},
          {"retrieval", retrieval},
          {"oracle_grounding", grounding_to_json(report.oracle_grounding)},
          {"counts", {{"num_queries", report.num_queries}, {"num_empty_predictions", report.num_empty_predictions}}}};
}

MetricsReport report_from_json(const json& j) {
  MetricsReport r;
  r.grounding = grounding_from_json(j.at("grounding"));
  r.oracle_grounding = grounding_from_json(j.at("oracle_grounding"));
  for (const auto& e : j.at("retrieval")) r.retrieval[e.at("k").get<std::int64_t>()] = e.at("value").get<double>();
  r.num_queries = j.at("counts").at("num_queries").get<std::int64_t>();
  r.num_empty_predictions = j.at("counts").at("num_empty_predictions").get<std::int64_t>();
  return r;
}

std::string report_to_text(const MetricsReport& report) {
  std::ostringstream os;
  auto row = [&](const std::string& name, const std::vector<std::pair<std::string, double>>& cells) {
    os << std::left << std::setw(20) << name;
    for (const auto& [label, value] : cells) {
      os << std::right << std::setw(10) << label;
    }
    os << '\n' << std::setw(20) << "";
    for (const auto& [label, value] : cells) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", value);
      os << std::right << std::setw(10) << buf;
    }
    os << '\n';
  };
  auto cells_of = [](const std::map<GroundingKey, double>& table) {
    std::vector<std::pair<std::string, double>> cells;
    for (const auto& [key, value] : table) cells.emplace_back(grounding_label(key), value);
    return cells;
  };
  row("Grounding", cells_of(report.grounding));
  std::vector<std::pair<std::string, double>> retrieval;
  for (const auto& [k, value] : report.retrieval) retrieval.emplace_back("R@" + std::to_string(k), value);
  row("Proposal Retrieval", retrieval);
  row("Oracle Grounding", cells_of(report.oracle_grounding));
  os << "queries: " << report.num_queries << "  empty predictions: " << report.num_empty_predictions << '\n';
  return os.str();
}

std::map<GroundingKey, double> oracle_grounding_eval(const ProposalDecoder& decoder, const Dataset& dataset,
                                                     std::int64_t proposal_frames, std::span<const std::int64_t> ks,
                                                     std::span<const double> thetas) {
  std::vector<std::vector<ScoredMoment>> predictions;
  std::vector<Moment> gts;
  predictions.reserve(dataset.annotations.size());
  for (const auto& ann : dataset.annotations) {
    const auto& video = dataset.video_of(ann);
    const auto proposals = slice_proposals(video, proposal_frames);
    std::vector<TimeInterval> windows;
    windows.reserve(proposals.size());
    for (const auto& p : proposals) windows.push_back(p.window(video.fps));
    const auto best = best_covering_proposal(windows, ann.interval());
    predictions.push_back(decoder.decode(dataset.query_of(ann), video, proposals[best]));
    gts.push_back(ann.moment);
  }
  std::map<GroundingKey, double> table;
  for (auto k : ks) {
    for (double theta : thetas) {
      table[{k, theta}] = recall_at_k_iou(predictions, gts, static_cast<std::size_t>(k), theta);
    }
  }
  return table;
}

}  // namespace rgnet
