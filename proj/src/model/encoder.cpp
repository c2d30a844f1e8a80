#include <cmath>
#include <limits>

#include "rgnet/errors.hpp"
#include "rgnet/model.hpp"

namespace rgnet {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_finite(const torch::Tensor& t, const char* what) {
  if (!torch::isfinite(t).all().item<bool>()) throw NumericError(std::string("non-finite values in ") + what);
}

}  // namespace

torch::Tensor sinusoidal_encoding(const torch::Tensor& positions, std::int64_t dim) {
  const auto opts = positions.options();
  const auto half = dim / 2;
  const auto i = torch::arange(half, opts);
  const auto freq = torch::exp(i * (-2.0 * std::log(10000.0) / static_cast<double>(dim)));
  const auto angles = positions.unsqueeze(-1) * freq;
  return torch::cat({torch::sin(angles), torch::cos(angles)}, -1);
}

torch::Tensor attend(const torch::Tensor& q, const torch::Tensor& k, const torch::Tensor& v,
                     const std::optional<torch::Tensor>& mask, std::int64_t heads, bool scale) {
  const auto n = q.size(0);
  const auto lq = q.size(1);
  const auto lk = k.size(1);
  const auto d = q.size(2);
  const auto hd = d / heads;
  auto split = [&](const torch::Tensor& x, std::int64_t len) {
    return x.reshape({n, len, heads, hd}).transpose(1, 2);  // [n, h, len, hd]
  };
  auto logits = torch::matmul(split(q, lq), split(k, lk).transpose(-2, -1));
  if (scale) logits = logits / std::sqrt(static_cast<double>(hd));
  if (mask) logits = logits + mask->unsqueeze(1);
  const auto weights = torch::softmax(logits, -1);
  return torch::matmul(weights, split(v, lk)).transpose(1, 2).reshape({n, lq, d});
}

torch::Tensor cross_attention(RGEncoderImpl& params, const torch::Tensor& frames, const torch::Tensor& tokens,
                              const std::optional<torch::Tensor>& token_valid) {
  require_finite(frames, "frame features");
  require_finite(tokens, "query tokens");
  std::optional<torch::Tensor> mask;
  if (token_valid) {
    if (!token_valid->any(1).all().item<bool>()) throw InvalidArgument("query without any valid token");
    mask = torch::zeros(token_valid->sizes(), frames.options()).masked_fill(~*token_valid, kNegInf).unsqueeze(1);
  }
  auto input = frames;
  if (params.cfg.position_encoding) {
    const auto pos = torch::arange(frames.size(1), frames.options());
    input = frames + sinusoidal_encoding(pos, frames.size(2));
  }
  const auto q = params.f_q(input);
  auto out = attend(q, params.f_k(tokens), params.f_v(tokens), mask, params.cfg.num_heads, params.cfg.scale_logits) + q;
  if (params.cfg.encoder_mode == EncoderMode::Standard) out = params.cross_ffn(params.cross_norm(out));
  return out;
}

Relevance relevance_from_logits(const torch::Tensor& logits, double temperature, SamplerMode mode,
                                std::uint64_t noise_seed) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive", "temperature");
  if (mode == SamplerMode::Infer) {
    const auto prob = torch::sigmoid(logits);
    return {(prob > 0.5).to(logits.scalar_type()), prob, logits};
  }
  auto gen = at::make_generator<at::CPUGeneratorImpl>(noise_seed);
  const auto opts = logits.options().requires_grad(false);
  auto gumbel = [&] {
    const auto u = torch::rand(logits.sizes(), gen, opts).clamp(1e-12, 1.0 - 1e-12);
    return -torch::log(-torch::log(u));
  };
  const auto g0 = gumbel();
  const auto g1 = gumbel();
  // log(pi_1) - log(pi_0) = p for pi_1 = sigmoid(p).
  const auto perturbed = logits + g1 - g0;
  const auto soft = torch::sigmoid(perturbed / temperature);
  if (mode == SamplerMode::Soft) return {soft, soft, logits};
  const auto hard = (perturbed > 0).to(logits.scalar_type());
  // Forward value is exactly hard; the gradient is that of soft.
  return {hard + (soft - soft.detach()), soft, logits};
}

Relevance sample_relevance(RGEncoderImpl& params, const torch::Tensor& features, double temperature,
                           SamplerMode mode, std::uint64_t noise_seed) {
  return relevance_from_logits(params.sampler(features).squeeze(-1), temperature, mode, noise_seed);
}

torch::Tensor build_attention_mask(const torch::Tensor& relevance, const torch::Tensor& valid) {
  const auto n = relevance.size(0);
  const auto len = relevance.size(1);
  const auto dtype = relevance.is_floating_point() ? relevance.scalar_type() : torch::kFloat32;
  const auto opts = torch::TensorOptions().dtype(dtype);
  const auto ones = torch::ones({n, 1}, torch::kBool);
  const auto open_rows = torch::cat({ones, relevance.detach() > 0.5}, 1);
  const auto open_cols = torch::cat({ones, valid.to(torch::kBool)}, 1);
  auto allowed = open_rows.unsqueeze(2) & open_cols.unsqueeze(1);
  allowed = allowed | torch::eye(len + 1, torch::kBool).unsqueeze(0);
  return torch::zeros({n, len + 1, len + 1}, opts).masked_fill(~allowed, kNegInf);
}

RetrievalOutput retrieval_attention(RGEncoderImpl& params, const torch::Tensor& features, const torch::Tensor& mask) {
  const auto n = features.size(0);
  const auto d = features.size(2);
  const auto x = torch::cat({params.retrieval_token.view({1, 1, d}).expand({n, 1, d}), features}, 1);
  auto out = attend(params.r_q(x), params.r_k(x), params.r_v(x), mask, params.cfg.num_heads, params.cfg.scale_logits) + x;
  if (params.cfg.encoder_mode == EncoderMode::Standard) out = params.retrieval_ffn(params.retrieval_norm(out));
  return {out.select(1, 0), out.slice(1, 1)};
}

torch::Tensor fuse(const torch::Tensor& content, const torch::Tensor& context, const torch::Tensor& relevance) {
  return content + relevance.unsqueeze(-1) * context.unsqueeze(1);
}

ProposalBatch make_batch(std::span<const ProposalCandidate* const> proposals,
                         std::span<const QueryFeatures* const> queries, torch::Dtype dtype) {
  if (proposals.empty()) throw DataError(DataErrorKind::EmptyInput, "no proposals to encode");
  if (proposals.size() != queries.size()) throw InvalidArgument("one query per proposal is required");
  const auto n = static_cast<std::int64_t>(proposals.size());
  const auto len = proposals.front()->length();
  const auto df = proposals.front()->frames.cols();
  std::int64_t max_tokens = 0;
  for (const auto* q : queries) max_tokens = std::max(max_tokens, q->tokens.rows());
  const auto dw = queries.front()->tokens.cols();

  auto frames = torch::zeros({n, len, df}, torch::kFloat32);
  auto valid = torch::zeros({n, len}, torch::kBool);
  auto tokens = torch::zeros({n, max_tokens, dw}, torch::kFloat32);
  auto token_valid = torch::zeros({n, max_tokens}, torch::kBool);
  auto fa = frames.accessor<float, 3>();
  auto va = valid.accessor<bool, 2>();
  auto ta = tokens.accessor<float, 3>();
  auto tva = token_valid.accessor<bool, 2>();
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& p = *proposals[static_cast<std::size_t>(i)];
    if (p.length() != len || p.frames.cols() != df) throw InvalidArgument("proposals differ in shape");
    for (std::int64_t j = 0; j < len; ++j) {
      va[i][j] = p.valid[static_cast<std::size_t>(j)];
      for (std::int64_t c = 0; c < df; ++c) fa[i][j][c] = p.frames(j, c);
    }
    const auto& q = queries[static_cast<std::size_t>(i)]->tokens;
    if (q.cols() != dw) throw InvalidArgument("queries differ in token dimension");
    for (std::int64_t t = 0; t < q.rows(); ++t) {
      tva[i][t] = true;
      for (std::int64_t c = 0; c < dw; ++c) ta[i][t][c] = q(t, c);
    }
  }
  return {frames.to(dtype), valid, tokens.to(dtype), token_valid};
}

EncodedProposals encode_proposals(RGEncoderImpl& params, const ProposalBatch& batch, SamplerMode mode,
                                  double temperature, std::uint64_t noise_seed) {
  EncodedProposals out;
  out.features = cross_attention(params, batch.frames, batch.tokens, batch.token_valid);
  const auto& sampler_input = params.cfg.sampler_on_raw_features ? batch.frames : out.features;
  auto rel = sample_relevance(params, sampler_input, temperature, mode, noise_seed);
  const auto valid = batch.valid.to(rel.relevance.scalar_type());
  out.relevance = rel.relevance * valid;
  out.soft_relevance = rel.soft * valid;
  const auto mask = build_attention_mask(out.relevance, batch.valid);
  auto retrieval = retrieval_attention(params, out.features, mask);
  out.context = retrieval.context;
  out.content = retrieval.content;
  out.fused = fuse(out.content, out.context, out.relevance);
  return out;
}

torch::Tensor context_score(ScoreHeadImpl& head, const torch::Tensor& context) {
  return torch::sigmoid(head.forward(context));
}

}  // namespace rgnet
