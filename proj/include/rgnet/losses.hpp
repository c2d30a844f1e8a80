#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <span>
#include <vector>

#include "rgnet/config.hpp"
#include "rgnet/matching.hpp"
#include "rgnet/model.hpp"
#include "rgnet/temporal.hpp"

namespace rgnet {

// S_c(i, j) = f_r(R_i) . f_c(P_ij). context [n, D], fused [n, L, D] -> [n, L].
torch::Tensor sampling_score(SamplingHeadImpl& head, const torch::Tensor& context, const torch::Tensor& fused);

struct SamplingLoss {
  torch::Tensor value;  // scalar >= 0
  bool skipped = false;
  std::int64_t in_index = -1;
  std::int64_t out_index = -1;
};

// max(0, margin + S_c[j_out] - S_c[j_in]) for one in-moment and one
// out-of-moment frame drawn uniformly with `pair_seed`. Zero and skipped when
// either index set is empty.
SamplingLoss sampling_loss(const torch::Tensor& scores, std::span<const std::int64_t> in_indices,
                           std::span<const std::int64_t> out_indices, double margin, std::uint64_t pair_seed);

// -sum_i log softmax_j(logits[i, j]) at j = i. Extra columns beyond the square
// part act as additional negatives.
torch::Tensor contrastive_loss_from_logits(const torch::Tensor& logits);
// contexts [B, B, D] with contexts[i][j] = proposal i encoded with query j.
torch::Tensor contrastive_loss(ScoreHeadImpl& head, const torch::Tensor& contexts);

// 1-D generalized IoU of (center, width) tensors [..., 2] -> [...].
torch::Tensor giou_1d(const torch::Tensor& a, const torch::Tensor& b);

struct GroundingLoss {
  torch::Tensor total;  // l1 + giou + ce, each already weighted
  torch::Tensor l1;
  torch::Tensor giou;
  torch::Tensor ce;
  Assignment assignment;
};

// Matching cost per (prediction, target): l1 * |dc| + |dw| weighted,
// giou * (1 - gIoU), minus ce * fg_prob. Loss: matched L1 and (1 - gIoU)
// averaged over targets, binary cross-entropy over every query (matched =
// foreground) averaged over queries. moments [n_q, 2], fg_logits [n_q];
// targets are proposal-normalized. Throws InvalidArgument on empty targets or
// targets outside [0, 1].
GroundingLoss grounding_loss(const torch::Tensor& moments, const torch::Tensor& fg_logits,
                             std::span<const Moment> targets, const LossWeights& weights);

// Classification-only term for a proposal without targets: every query is
// background.
torch::Tensor background_loss(const torch::Tensor& fg_logits, const LossWeights& weights);

struct LossBreakdown {
  torch::Tensor total;
  torch::Tensor samp;    // unweighted L_samp
  torch::Tensor cont;    // unweighted L_cont
  torch::Tensor ground;  // L_g (already internally weighted)
};

// lambda_samp * L_samp + lambda_cont * L_cont + L_g.
LossBreakdown total_loss(const torch::Tensor& samp, const torch::Tensor& cont, const torch::Tensor& ground,
                         const LossWeights& weights);

}  // namespace rgnet
