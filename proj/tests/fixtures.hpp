#pragma once

#include <random>
#include <vector>

#include "oracles.hpp"
#include "rgnet/metrics.hpp"

namespace fixture {

// Random evaluation set: per query a ground truth, a ranked prediction list
// (possibly empty) and a ranked window list, in both library and oracle form.
struct EvalSet {
  std::vector<std::vector<rgnet::ScoredMoment>> preds;
  std::vector<std::vector<rgnet::TimeInterval>> windows;
  std::vector<rgnet::Moment> gts;
  std::vector<std::vector<oracle::Span>> pred_spans;
  std::vector<std::vector<oracle::Span>> window_spans;
  std::vector<oracle::Span> gt_spans;
};

inline EvalSet random_eval_set(std::mt19937_64& rng, int num_queries = 20) {
  std::uniform_real_distribution<double> pos(0.0, 200.0);
  std::uniform_real_distribution<double> width(1.0, 30.0);
  std::uniform_real_distribution<double> jitter(-6.0, 6.0);
  std::uniform_int_distribution<int> count(0, 8);
  EvalSet s;
  for (int q = 0; q < num_queries; ++q) {
    const double gs = pos(rng), gw = width(rng);
    s.gts.emplace_back(gs + gw / 2, gw);
    s.gt_spans.push_back({gs, gs + gw});

    std::vector<rgnet::ScoredMoment> p;
    std::vector<oracle::Span> ps;
    const int n = count(rng);
    double score = 1.0;
    for (int i = 0; i < n; ++i) {
      // half near the truth so hits at several thresholds are common
      const double st = (i % 2 == 0) ? gs + jitter(rng) : pos(rng);
      const double w = (i % 2 == 0) ? gw + jitter(rng) * 0.5 : width(rng);
      const double ww = std::max(w, 0.5);
      score *= 0.9;
      p.push_back({rgnet::Moment(st + ww / 2, ww), score});
      ps.push_back({st, st + ww});
    }
    s.preds.push_back(p);
    s.pred_spans.push_back(ps);

    std::vector<rgnet::TimeInterval> w;
    std::vector<oracle::Span> ws;
    for (int i = 0; i < 6; ++i) {
      const double st = (i == 2) ? gs - 10.0 : pos(rng);
      w.emplace_back(st, st + 32.0);
      ws.push_back({st, st + 32.0});
    }
    s.windows.push_back(w);
    s.window_spans.push_back(ws);
  }
  return s;
}

}  // namespace fixture
