#include <limits>

#include "rgnet/errors.hpp"
#include "rgnet/model.hpp"

namespace rgnet {

namespace {

// Normalized [0, 1] positions are stretched before the sinusoidal encoding so
// the low frequencies still separate neighbouring frames.
constexpr double kPositionScale = 100.0;

}  // namespace

DecoderOutput decode_moments(GroundingDecoderImpl& params, const torch::Tensor& fused, const torch::Tensor& valid) {
  const auto n = fused.size(0);
  const auto len = fused.size(1);
  const auto d = fused.size(2);
  const auto nq = params.cfg.num_queries;
  const auto valid_b = valid.to(torch::kBool);
  if (!valid_b.any(1).all().item<bool>()) {
    throw DataError(DataErrorKind::DegenerateProposal, "degenerate proposal: every frame is padding");
  }

  const auto opts = fused.options();
  const auto frame_pos = (torch::arange(len, opts) + 0.5) / static_cast<double>(len) * kPositionScale;
  const auto keys = fused + sinusoidal_encoding(frame_pos, d);
  const auto key_mask = torch::zeros({n, 1, len}, opts).masked_fill(~valid_b.unsqueeze(1),
                                                                    -std::numeric_limits<double>::infinity());
  // Padded frames carry no information; zero them so values never leak.
  const auto values = fused * valid_b.unsqueeze(-1).to(fused.scalar_type());

  auto anchors = params.anchor_logits.unsqueeze(0).expand({n, nq, 2});
  auto content = params.query_content.unsqueeze(0).expand({n, nq, d});
  for (const auto& module : *params.layers) {
    auto& layer = *module->as<DecoderLayerImpl>();
    const auto a = torch::sigmoid(anchors) * kPositionScale;
    const auto pos = torch::cat({sinusoidal_encoding(a.select(-1, 0), d / 2), sinusoidal_encoding(a.select(-1, 1), d / 2)},
                                -1);
    const auto query = content + params.anchor_pos->forward(pos);
    const auto attn = attend(layer.q(query), layer.k(keys), layer.v(values), key_mask, params.cfg.num_heads,
                             params.cfg.scale_logits);
    content = layer.ffn(layer.attn_norm(content + attn));
    anchors = anchors + layer.box->forward(content);
  }
  return {torch::sigmoid(anchors), params.classifier(content).squeeze(-1)};
}

ProposalPredictions to_predictions(const DecoderOutput& out, std::int64_t index) {
  const auto moments = out.moments[index].detach().to(torch::kFloat64).contiguous();
  const auto probs = torch::sigmoid(out.fg_logits[index].detach().to(torch::kFloat64)).contiguous();
  const auto m = moments.accessor<double, 2>();
  const auto p = probs.accessor<double, 1>();
  ProposalPredictions pred;
  for (std::int64_t q = 0; q < moments.size(0); ++q) {
    // sigmoid can round to exactly 0 in float32; keep widths strictly positive.
    pred.moments.emplace_back(m[q][0], std::max(m[q][1], 1e-9));
    pred.fg_prob.push_back(p[q]);
  }
  return pred;
}

}  // namespace rgnet
