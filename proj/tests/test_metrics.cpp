#include <doctest.h>

#include <map>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rgnet/errors.hpp"
#include "rgnet/metrics.hpp"

using namespace rgnet;

TEST_CASE("recall example") {
  std::vector<std::vector<ScoredMoment>> preds{{{interval_to_moment({12, 22}), 0.9}}};
  std::vector<Moment> gts{interval_to_moment({10, 20})};
  CHECK(recall_at_k_iou(preds, gts, 1, 0.5) == 100.0);
  CHECK(recall_at_k_iou(preds, gts, 1, 0.7) == 0.0);
}

TEST_CASE("identical prediction hits below one") {
  std::vector<std::vector<ScoredMoment>> preds{{{Moment(15, 10), 0.9}}};
  std::vector<Moment> gts{Moment(15, 10)};
  for (double theta : {0.1, 0.5, 0.9, 0.999}) CHECK(recall_at_k_iou(preds, gts, 1, theta) == 100.0);
}

TEST_CASE("recall counts empty prediction lists as misses") {
  std::vector<std::vector<ScoredMoment>> preds{{}, {{Moment(5, 2), 1.0}}};
  std::vector<Moment> gts{Moment(5, 2), Moment(5, 2)};
  const auto r = recall_at_k_iou_detail(preds, gts, 1, 0.5);
  CHECK(r.percentage == 50.0);
  CHECK(r.empty_queries == 1);
  CHECK_THROWS_AS(recall_at_k_iou(preds, gts, 0, 0.5), InvalidArgument);
}

TEST_CASE("retrieval examples") {
  std::vector<Moment> gts{interval_to_moment({10, 20})};
  std::vector<std::vector<TimeInterval>> inside{{{0, 32}, {100, 132}}};
  std::vector<std::vector<TimeInterval>> disjoint{{{50, 82}, {100, 132}}};
  CHECK(retrieval_recall_at_k(inside, gts, 1) == 100.0);
  CHECK(retrieval_recall_at_k(disjoint, gts, 2) == 0.0);
}

TEST_CASE("half-stride windows always cover half of a short moment") {
  std::mt19937_64 rng(17);
  const double lc = 32.0, T = 512.0;
  std::uniform_real_distribution<double> width(0.5, lc);
  for (int i = 0; i < 500; ++i) {
    const double w = width(rng);
    const double s = std::uniform_real_distribution<double>(0.0, T - w)(rng);
    std::vector<std::vector<TimeInterval>> windows(1);
    for (double st = 0; st < T; st += lc / 2) windows[0].emplace_back(st, st + lc);
    std::vector<Moment> gt{Moment(s + w / 2, w)};
    CHECK(retrieval_recall_at_k(windows, gt, windows[0].size()) == 100.0);
  }
}

TEST_CASE("recall and retrieval match enumeration oracles") {
  std::mt19937_64 rng(99);
  for (int set = 0; set < 100; ++set) {
    const auto s = fixture::random_eval_set(rng);
    std::map<std::pair<int, double>, double> table;
    for (int k : {1, 3, 5, 10}) {
      for (double theta : {0.1, 0.3, 0.5, 0.7}) {
        const double got = recall_at_k_iou(s.preds, s.gts, static_cast<std::size_t>(k), theta);
        CHECK(got == doctest::Approx(oracle::recall_enumerate(s.pred_spans, s.gt_spans, k, theta)));
        table[{k, theta}] = got;
      }
      CHECK(retrieval_recall_at_k(s.windows, s.gts, static_cast<std::size_t>(k)) ==
            doctest::Approx(oracle::retrieval_enumerate(s.window_spans, s.gt_spans, k)));
    }
    for (const auto& [key, v] : table) {
      CHECK(v >= 0.0);
      CHECK(v <= 100.0);
      auto next_k = table.upper_bound({key.first, 1.0});
      if (next_k != table.end()) CHECK(table.at({next_k->first.first, key.second}) >= v);
      auto next_t = table.find(key);
      ++next_t;
      if (next_t != table.end() && next_t->first.first == key.first) CHECK(next_t->second <= v);
    }
  }
}

TEST_CASE("report json round trip and text sections") {
  MetricsReport r;
  r.grounding[{1, 0.3}] = 12.5;
  r.grounding[{5, 0.5}] = 1.0 / 3.0;
  r.retrieval[1] = 40.0;
  r.retrieval[30] = 99.99;
  r.oracle_grounding[{1, 0.5}] = 77.125;
  r.num_queries = 8;
  r.num_empty_predictions = 1;
  CHECK(report_from_json(nlohmann::json::parse(report_to_json(r).dump())) == r);

  const auto text = report_to_text(r);
  CHECK(text.find("Grounding") != std::string::npos);
  CHECK(text.find("Proposal Retrieval") != std::string::npos);
  CHECK(text.find("Oracle Grounding") != std::string::npos);
  CHECK(text.find("R1@0.3") != std::string::npos);
  CHECK(text.find("R@30") != std::string::npos);
  CHECK(grounding_label({5, 0.5}) == "R5@0.5");
}

namespace {

Dataset tiny_dataset() {
  Dataset d;
  for (int v = 0; v < 2; ++v) {
    FrameFeatureSequence seq;
    seq.video_id = "v" + std::to_string(v);
    seq.features = FeatureMatrix(64, 2);
    d.videos.push_back(seq);
  }
  const std::vector<std::pair<double, double>> spans{{3, 9}, {20, 26}, {30, 33}, {50, 61}, {10, 14}};
  for (std::size_t i = 0; i < spans.size(); ++i) {
    d.queries.push_back({"q" + std::to_string(i), FeatureMatrix(2, 2)});
    d.annotations.push_back({"q" + std::to_string(i), "v" + std::to_string(i % 2),
                             interval_to_moment({spans[i].first, spans[i].second})});
  }
  d.reindex();
  return d;
}

class EchoDecoder : public ProposalDecoder {
 public:
  explicit EchoDecoder(const Dataset& d) : d_(d) {}
  std::vector<ScoredMoment> decode(const QueryFeatures& q, const FrameFeatureSequence&,
                                   const ProposalCandidate&) const override {
    for (const auto& a : d_.annotations)
      if (a.query_id == q.query_id) return {{a.moment, 1.0}};
    return {};
  }

 private:
  const Dataset& d_;
};

class RandomDecoder : public ProposalDecoder {
 public:
  mutable std::mt19937_64 rng{5};
  mutable std::vector<std::vector<ScoredMoment>> emitted;
  std::vector<ScoredMoment> decode(const QueryFeatures&, const FrameFeatureSequence&,
                                   const ProposalCandidate& p) const override {
    const TimeInterval w = p.window(1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ScoredMoment> out;
    for (int i = 0; i < 3; ++i) {
      const double a = w.start() + u(rng) * w.length(), b = w.start() + u(rng) * w.length();
      out.push_back({interval_to_moment({std::min(a, b), std::max(a, b) + 0.1}), 1.0 - 0.1 * i});
    }
    emitted.push_back(out);
    return out;
  }
};

}  // namespace

TEST_CASE("oracle grounding with an echo decoder is perfect") {
  const auto d = tiny_dataset();
  EchoDecoder echo(d);
  const std::vector<std::int64_t> ks{1, 5};
  const std::vector<double> thetas{0.1, 0.5, 0.9};
  for (const auto& [key, v] : oracle_grounding_eval(echo, d, 16, ks, thetas)) CHECK(v == 100.0);
}

TEST_CASE("oracle grounding with a random decoder matches enumeration") {
  const auto d = tiny_dataset();
  RandomDecoder dec;
  const std::vector<std::int64_t> ks{1, 3};
  const std::vector<double> thetas{0.5};
  const auto table = oracle_grounding_eval(dec, d, 16, ks, thetas);
  REQUIRE(dec.emitted.size() == d.annotations.size());
  std::vector<std::vector<oracle::Span>> spans;
  std::vector<oracle::Span> gts;
  for (std::size_t q = 0; q < d.annotations.size(); ++q) {
    std::vector<oracle::Span> row;
    for (const auto& sm : dec.emitted[q]) {
      const auto iv = moment_to_interval(sm.moment);
      row.push_back({iv.start(), iv.end()});
    }
    spans.push_back(row);
    const auto gt = d.annotations[q].interval();
    gts.push_back({gt.start(), gt.end()});
  }
  CHECK(table.at({1, 0.5}) == doctest::Approx(oracle::recall_enumerate(spans, gts, 1, 0.5)));
  CHECK(table.at({3, 0.5}) == doctest::Approx(oracle::recall_enumerate(spans, gts, 3, 0.5)));
}
