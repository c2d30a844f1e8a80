#include <cmath>

#include "rgnet/errors.hpp"
#include "rgnet/model.hpp"

namespace rgnet {

namespace nn = torch::nn;

FeedForwardImpl::FeedForwardImpl(std::int64_t dim, std::int64_t hidden) {
  in = register_module("in", nn::Linear(dim, hidden));
  out = register_module("out", nn::Linear(hidden, dim));
  norm = register_module("norm", nn::LayerNorm(nn::LayerNormOptions({dim})));
}

torch::Tensor FeedForwardImpl::forward(const torch::Tensor& x) {
  return norm(x + out(torch::relu(in(x))));
}

RGEncoderImpl::RGEncoderImpl(const ModelConfig& config) : cfg(config) {
  const auto d = cfg.model_dim;
  f_q = register_module("f_q", nn::Linear(cfg.feature_dim, d));
  f_k = register_module("f_k", nn::Linear(cfg.text_dim, d));
  f_v = register_module("f_v", nn::Linear(cfg.text_dim, d));
  sampler = register_module("sampler", nn::Linear(cfg.sampler_on_raw_features ? cfg.feature_dim : d, 1));
  r_q = register_module("r_q", nn::Linear(d, d));
  r_k = register_module("r_k", nn::Linear(d, d));
  r_v = register_module("r_v", nn::Linear(d, d));
  retrieval_token = register_parameter("retrieval_token", torch::zeros({d}));
  if (cfg.encoder_mode == EncoderMode::Standard) {
    cross_norm = register_module("cross_norm", nn::LayerNorm(nn::LayerNormOptions({d})));
    retrieval_norm = register_module("retrieval_norm", nn::LayerNorm(nn::LayerNormOptions({d})));
    cross_ffn = register_module("cross_ffn", FeedForward(d, cfg.ffn_dim));
    retrieval_ffn = register_module("retrieval_ffn", FeedForward(d, cfg.ffn_dim));
  }
}

ScoreHeadImpl::ScoreHeadImpl(std::int64_t dim) { proj = register_module("proj", nn::Linear(dim, 1)); }

torch::Tensor ScoreHeadImpl::forward(const torch::Tensor& context) { return proj(context).squeeze(-1); }

SamplingHeadImpl::SamplingHeadImpl(std::int64_t dim) {
  f_r = register_module("f_r", nn::Linear(dim, dim));
  f_c = register_module("f_c", nn::Linear(dim, dim));
}

DecoderLayerImpl::DecoderLayerImpl(std::int64_t dim, std::int64_t hidden) {
  q = register_module("q", nn::Linear(dim, dim));
  k = register_module("k", nn::Linear(dim, dim));
  v = register_module("v", nn::Linear(dim, dim));
  attn_norm = register_module("attn_norm", nn::LayerNorm(nn::LayerNormOptions({dim})));
  ffn = register_module("ffn", FeedForward(dim, hidden));
  box = register_module("box", nn::Sequential(nn::Linear(dim, dim), nn::ReLU(), nn::Linear(dim, 2)));
}

GroundingDecoderImpl::GroundingDecoderImpl(const ModelConfig& config) : cfg(config) {
  const auto d = cfg.model_dim;
  anchor_logits = register_parameter("anchor_logits", torch::zeros({cfg.num_queries, 2}));
  query_content = register_parameter("query_content", torch::zeros({cfg.num_queries, d}));
  anchor_pos = register_module("anchor_pos", nn::Sequential(nn::Linear(d, d), nn::ReLU(), nn::Linear(d, d)));
  layers = register_module("layers", nn::ModuleList());
  for (std::int64_t i = 0; i < cfg.decoder_layers; ++i) layers->push_back(DecoderLayer(d, cfg.ffn_dim));
  classifier = register_module("classifier", nn::Linear(d, 1));
}

RGNetModelImpl::RGNetModelImpl(const ModelConfig& config) : cfg(config) {
  cfg.validate();
  encoder = register_module("encoder", RGEncoder(cfg));
  score_head = register_module("score_head", ScoreHead(cfg.model_dim));
  sampling_head = register_module("sampling_head", SamplingHead(cfg.model_dim));
  decoder = register_module("decoder", GroundingDecoder(cfg));
}

torch::Dtype RGNetModelImpl::dtype() const {
  return encoder->retrieval_token.scalar_type();
}

RGNetModel init_parameters(const ModelConfig& cfg, std::uint64_t seed) {
  torch::manual_seed(seed);
  RGNetModel model(cfg);
  torch::NoGradGuard no_grad;
  for (auto& module : model->modules(/*include_self=*/false)) {
    if (auto* linear = module->as<nn::Linear>()) {
      nn::init::xavier_uniform_(linear->weight);
      nn::init::zeros_(linear->bias);
    }
  }
  const double token_bound = 1.0 / std::sqrt(static_cast<double>(cfg.model_dim));
  model->encoder->retrieval_token.uniform_(-token_bound, token_bound);
  model->decoder->query_content.uniform_(-token_bound, token_bound);
  // Anchors spread over the proposal, away from the sigmoid saturation.
  model->decoder->anchor_logits.copy_(torch::logit(torch::rand({cfg.num_queries, 2}) * 0.8 + 0.1));
  return model;
}

}  // namespace rgnet
