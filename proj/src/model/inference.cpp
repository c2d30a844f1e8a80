#include <algorithm>

#include "rgnet/errors.hpp"
#include "rgnet/trainer.hpp"

namespace rgnet {

namespace {

MergeOptions merge_options(const EvalConfig& eval, double duration_s) {
  return {eval.nms, eval.nms_iou, duration_s};
}

}  // namespace

std::vector<QueryPrediction> predict(RGNetModel& model, const PreparedData& data, const RunConfig& cfg,
                                     std::size_t k_out) {
  torch::NoGradGuard no_grad;
  model->eval();
  const auto& ds = data.dataset();
  const auto top_k = static_cast<std::size_t>(cfg.train.top_k);
  std::vector<QueryPrediction> out;
  for (const auto& ex : data.examples()) {
    const auto& vp = data.video(ex.video);
    std::vector<const ProposalCandidate*> proposals;
    std::vector<const QueryFeatures*> queries;
    for (const auto& p : vp.proposals) {
      proposals.push_back(&p);
      queries.push_back(&ds.queries[ex.query]);
    }
    const auto batch = make_batch(proposals, queries, model->dtype());
    const auto enc = encode_proposals(*model->encoder, batch, SamplerMode::Infer, cfg.train.temperature, 0);
    const auto s = context_score(*model->score_head, enc.context).to(torch::kFloat64).contiguous();

    QueryPrediction pred;
    pred.annotation = ex.annotation;
    pred.retrieval_scores.assign(s.data_ptr<double>(), s.data_ptr<double>() + s.numel());
    pred.window_ranking = topk_proposals(pred.retrieval_scores, pred.retrieval_scores.size());

    const auto n_dec = std::min(top_k, pred.window_ranking.size());
    std::vector<std::int64_t> picked(pred.window_ranking.begin(), pred.window_ranking.begin() + n_dec);
    const auto idx = torch::tensor(picked, torch::kLong);
    const auto dec = decode_moments(*model->decoder, enc.fused.index_select(0, idx), batch.valid.index_select(0, idx));
    std::vector<DecodedProposal> decoded;
    for (std::size_t r = 0; r < n_dec; ++r) {
      const auto w = pred.window_ranking[r];
      decoded.push_back({to_predictions(dec, static_cast<std::int64_t>(r)), vp.windows[w], pred.retrieval_scores[w]});
    }
    pred.moments = merge_predictions(decoded, k_out, merge_options(cfg.eval, vp.duration_s));
    out.push_back(std::move(pred));
  }
  return out;
}

ModelProposalDecoder::ModelProposalDecoder(RGNetModel& model, const EvalConfig& eval) : model_(&model), eval_(eval) {}

std::vector<ScoredMoment> ModelProposalDecoder::decode(const QueryFeatures& query, const FrameFeatureSequence& video,
                                                       const ProposalCandidate& proposal) const {
  torch::NoGradGuard no_grad;
  auto& model = *model_;
  const ProposalCandidate* p[] = {&proposal};
  const QueryFeatures* q[] = {&query};
  const auto batch = make_batch(p, q, model->dtype());
  const auto enc = encode_proposals(*model->encoder, batch, SamplerMode::Infer, 1.0, 0);
  const auto dec = decode_moments(*model->decoder, enc.fused, batch.valid);
  const DecodedProposal decoded[] = {{to_predictions(dec, 0), proposal.window(video.fps), 1.0}};
  return merge_predictions(decoded, static_cast<std::size_t>(model->cfg.num_queries),
                           merge_options(eval_, video.duration_s()));
}

MetricsReport evaluate(RGNetModel& model, const Dataset& dataset, const RunConfig& cfg) {
  cfg.validate();
  const PreparedData data(dataset, cfg.train.proposal_length_s);
  const auto& ks = cfg.eval.grounding_ks;
  const auto k_out = static_cast<std::size_t>(*std::max_element(ks.begin(), ks.end()));
  const auto preds = predict(model, data, cfg, k_out);

  std::vector<std::vector<ScoredMoment>> moments;
  std::vector<std::vector<TimeInterval>> windows;
  std::vector<Moment> gts;
  MetricsReport report;
  for (const auto& p : preds) {
    const auto& ex = data.examples()[p.annotation];
    moments.push_back(p.moments);
    if (p.moments.empty()) ++report.num_empty_predictions;
    std::vector<TimeInterval> ranked;
    for (auto w : p.window_ranking) ranked.push_back(data.video(ex.video).windows[w]);
    windows.push_back(std::move(ranked));
    gts.push_back(dataset.annotations[p.annotation].moment);
  }
  report.num_queries = static_cast<std::int64_t>(preds.size());
  for (auto k : ks) {
    for (auto theta : cfg.eval.iou_thresholds) {
      report.grounding[{k, theta}] = recall_at_k_iou(moments, gts, static_cast<std::size_t>(k), theta);
    }
  }
  for (auto k : cfg.eval.retrieval_ks) {
    report.retrieval[k] = retrieval_recall_at_k(windows, gts, static_cast<std::size_t>(k));
  }
  const ModelProposalDecoder decoder(model, cfg.eval);
  const auto frames = proposal_frames_for_seconds(cfg.train.proposal_length_s, dataset.videos.front().fps);
  report.oracle_grounding = oracle_grounding_eval(decoder, dataset, frames, ks, cfg.eval.iou_thresholds);
  return report;
}

}  // namespace rgnet
