#include "rgnet/losses.hpp"

#include <random>

#include "rgnet/errors.hpp"

namespace rgnet {

torch::Tensor sampling_score(SamplingHeadImpl& head, const torch::Tensor& context, const torch::Tensor& fused) {
  return (head.f_r(context).unsqueeze(1) * head.f_c(fused)).sum(-1);
}

SamplingLoss sampling_loss(const torch::Tensor& scores, std::span<const std::int64_t> in_indices,
                           std::span<const std::int64_t> out_indices, double margin, std::uint64_t pair_seed) {
  SamplingLoss out;
  if (in_indices.empty() || out_indices.empty()) {
    out.value = torch::zeros({}, scores.options());
    out.skipped = true;
    return out;
  }
  std::mt19937_64 rng(pair_seed);
  out.in_index = in_indices[std::uniform_int_distribution<std::size_t>(0, in_indices.size() - 1)(rng)];
  out.out_index = out_indices[std::uniform_int_distribution<std::size_t>(0, out_indices.size() - 1)(rng)];
  out.value = torch::relu(margin + scores[out.out_index] - scores[out.in_index]);
  return out;
}

torch::Tensor contrastive_loss_from_logits(const torch::Tensor& logits) {
  const auto b = logits.size(0);
  if (logits.dim() != 2 || logits.size(1) < b) throw InvalidArgument("contrastive logits must be [B, >=B]");
  const auto log_prob = torch::log_softmax(logits, 1);
  return -log_prob.slice(1, 0, b).diagonal().sum();
}

torch::Tensor contrastive_loss(ScoreHeadImpl& head, const torch::Tensor& contexts) {
  return contrastive_loss_from_logits(head.forward(contexts));
}

torch::Tensor giou_1d(const torch::Tensor& a, const torch::Tensor& b) {
  const auto a_lo = a.select(-1, 0) - 0.5 * a.select(-1, 1);
  const auto a_hi = a.select(-1, 0) + 0.5 * a.select(-1, 1);
  const auto b_lo = b.select(-1, 0) - 0.5 * b.select(-1, 1);
  const auto b_hi = b.select(-1, 0) + 0.5 * b.select(-1, 1);
  const auto inter = (torch::minimum(a_hi, b_hi) - torch::maximum(a_lo, b_lo)).clamp_min(0);
  const auto uni = (a_hi - a_lo) + (b_hi - b_lo) - inter;
  const auto hull = torch::maximum(a_hi, b_hi) - torch::minimum(a_lo, b_lo);
  return inter / uni - (hull - uni).clamp_min(0) / hull;
}

GroundingLoss grounding_loss(const torch::Tensor& moments, const torch::Tensor& fg_logits,
                             std::span<const Moment> targets, const LossWeights& weights) {
  if (targets.empty()) throw InvalidArgument("grounding loss needs at least one target");
  const auto nq = moments.size(0);
  const auto nt = static_cast<std::int64_t>(targets.size());
  std::vector<double> flat;
  for (const auto& t : targets) {
    if (t.center() < 0.0 || t.center() > 1.0 || t.width() > 1.0) {
      throw InvalidArgument("grounding target outside the normalized [0, 1] range");
    }
    flat.push_back(t.center());
    flat.push_back(t.width());
  }
  const auto target = torch::tensor(flat, torch::kFloat64).view({nt, 2}).to(moments.scalar_type());

  // Matching cost, evaluated outside the graph.
  CostMatrix cost{nq, nt, {}};
  {
    torch::NoGradGuard no_grad;
    const auto m = moments.detach().unsqueeze(1).expand({nq, nt, 2});
    const auto t = target.unsqueeze(0).expand({nq, nt, 2});
    const auto l1 = (m - t).abs().sum(-1);
    const auto g = giou_1d(m, t);
    const auto prob = torch::sigmoid(fg_logits.detach()).unsqueeze(1).expand({nq, nt});
    const auto c = (weights.l1 * l1 + weights.giou * (1.0 - g) - weights.ce * prob).to(torch::kFloat64).contiguous();
    cost.values.assign(c.data_ptr<double>(), c.data_ptr<double>() + c.numel());
  }
  GroundingLoss out;
  out.assignment = hungarian_match(cost);

  std::vector<std::int64_t> pred_idx, tgt_idx;
  for (const auto& [p, t] : out.assignment.pairs) {
    pred_idx.push_back(p);
    tgt_idx.push_back(t);
  }
  const auto pi = torch::tensor(pred_idx, torch::kLong);
  const auto ti = torch::tensor(tgt_idx, torch::kLong);
  const auto matched = moments.index_select(0, pi);
  const auto matched_t = target.index_select(0, ti);
  out.l1 = weights.l1 * (matched - matched_t).abs().sum() / static_cast<double>(nt);
  out.giou = weights.giou * (1.0 - giou_1d(matched, matched_t)).sum() / static_cast<double>(nt);

  auto labels = torch::zeros({nq}, fg_logits.options());
  auto sample_weight = torch::full({nq}, weights.background_weight, fg_logits.options());
  for (auto p : pred_idx) {
    labels[p] = 1.0;
    sample_weight[p] = 1.0;
  }
  out.ce = weights.ce * torch::binary_cross_entropy_with_logits(fg_logits, labels, sample_weight);
  out.total = out.l1 + out.giou + out.ce;
  return out;
}

torch::Tensor background_loss(const torch::Tensor& fg_logits, const LossWeights& weights) {
  return weights.ce * weights.background_weight *
         torch::binary_cross_entropy_with_logits(fg_logits, torch::zeros_like(fg_logits));
}

LossBreakdown total_loss(const torch::Tensor& samp, const torch::Tensor& cont, const torch::Tensor& ground,
                         const LossWeights& weights) {
  return {weights.samp * samp + weights.cont * cont + ground, samp, cont, ground};
}

}  // namespace rgnet
