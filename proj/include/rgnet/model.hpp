#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rgnet/config.hpp"
#include "rgnet/dataio.hpp"
#include "rgnet/ranking.hpp"

namespace rgnet {

// ---------------------------------------------------------------------------
// Parameter containers
// ---------------------------------------------------------------------------

// Position-wise feed-forward with its own layer norm (standard mode only).
struct FeedForwardImpl : torch::nn::Module {
  FeedForwardImpl(std::int64_t dim, std::int64_t hidden);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Linear in{nullptr}, out{nullptr};
  torch::nn::LayerNorm norm{nullptr};
};
TORCH_MODULE(FeedForward);

// Cross-attention projections, the frame sampler, retrieval attention and
// the learnable retrieval token.
struct RGEncoderImpl : torch::nn::Module {
  explicit RGEncoderImpl(const ModelConfig& cfg);

  ModelConfig cfg;
  torch::nn::Linear f_q{nullptr}, f_k{nullptr}, f_v{nullptr};
  torch::nn::Linear sampler{nullptr};
  torch::nn::Linear r_q{nullptr}, r_k{nullptr}, r_v{nullptr};
  torch::Tensor retrieval_token;  // [D]
  // Standard mode only.
  torch::nn::LayerNorm cross_norm{nullptr}, retrieval_norm{nullptr};
  FeedForward cross_ffn{nullptr}, retrieval_ffn{nullptr};
};
TORCH_MODULE(RGEncoder);

// Scalar projection of a context feature. Serves as f_s for retrieval scores
// and as f_cont for the contrastive logits.
struct ScoreHeadImpl : torch::nn::Module {
  explicit ScoreHeadImpl(std::int64_t dim);
  torch::Tensor forward(const torch::Tensor& context);  // [..., D] -> [...]

  torch::nn::Linear proj{nullptr};
};
TORCH_MODULE(ScoreHead);

// f_r and f_c of the frame-level sampling score.
struct SamplingHeadImpl : torch::nn::Module {
  explicit SamplingHeadImpl(std::int64_t dim);

  torch::nn::Linear f_r{nullptr}, f_c{nullptr};
};
TORCH_MODULE(SamplingHead);

struct DecoderLayerImpl : torch::nn::Module {
  DecoderLayerImpl(std::int64_t dim, std::int64_t hidden);

  torch::nn::Linear q{nullptr}, k{nullptr}, v{nullptr};
  torch::nn::LayerNorm attn_norm{nullptr};
  FeedForward ffn{nullptr};
  torch::nn::Sequential box{nullptr};  // D -> 2 anchor deltas
};
TORCH_MODULE(DecoderLayer);

// Anchor-query decoder: learnable (center, width) anchors refined per layer in
// inverse-sigmoid space.
struct GroundingDecoderImpl : torch::nn::Module {
  explicit GroundingDecoderImpl(const ModelConfig& cfg);

  ModelConfig cfg;
  torch::Tensor anchor_logits;   // [n_q, 2]
  torch::Tensor query_content;   // [n_q, D]
  torch::nn::Sequential anchor_pos{nullptr};
  torch::nn::ModuleList layers{nullptr};
  torch::nn::Linear classifier{nullptr};
};
TORCH_MODULE(GroundingDecoder);

struct RGNetModelImpl : torch::nn::Module {
  explicit RGNetModelImpl(const ModelConfig& cfg);

  torch::Dtype dtype() const;

  ModelConfig cfg;
  RGEncoder encoder{nullptr};
  ScoreHead score_head{nullptr};
  SamplingHead sampling_head{nullptr};
  GroundingDecoder decoder{nullptr};
};
TORCH_MODULE(RGNetModel);

// Xavier-uniform projection weights, zero biases, scaled-uniform retrieval
// token, anchors and query embeddings. Deterministic per seed.
RGNetModel init_parameters(const ModelConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Encoder operations. Leading dimension n batches independent proposals.
// ---------------------------------------------------------------------------

enum class SamplerMode {
  Train,  // hard Gumbel-Max forward, Gumbel-Softmax gradient (straight-through)
  Soft,   // Gumbel-Softmax relaxation in the forward pass as well
  Infer,  // G = 1 iff sigmoid(p) > 0.5, no noise
};

// Sinusoidal encoding of arbitrary real positions: [...] -> [..., dim].
torch::Tensor sinusoidal_encoding(const torch::Tensor& positions, std::int64_t dim);

// softmax(q k^T [* 1/sqrt(d)] + mask) v, split over `heads`. mask is additive
// and broadcastable to [n, Lq, Lk].
torch::Tensor attend(const torch::Tensor& q, const torch::Tensor& k, const torch::Tensor& v,
                     const std::optional<torch::Tensor>& mask, std::int64_t heads, bool scale);

// F = softmax(Q K^T) V + Q with Q = f_Q(frames), K = f_K(tokens), V = f_V(tokens).
// frames [n, L, D_f], tokens [n, N, D_w], token_valid [n, N] bool.
torch::Tensor cross_attention(RGEncoderImpl& params, const torch::Tensor& frames, const torch::Tensor& tokens,
                              const std::optional<torch::Tensor>& token_valid = std::nullopt);

struct Relevance {
  torch::Tensor relevance;  // G [n, L]: {0,1} in Train/Infer (carrying the soft gradient in Train), soft in Soft
  torch::Tensor soft;       // Gumbel-Softmax value (Train/Soft) or sigmoid(p) (Infer)
  torch::Tensor logits;     // p [n, L]
};

// Two-class Gumbel relaxation of sigmoid(logits). Throws ConfigError for
// temperature <= 0.
Relevance relevance_from_logits(const torch::Tensor& logits, double temperature, SamplerMode mode,
                                std::uint64_t noise_seed);
Relevance sample_relevance(RGEncoderImpl& params, const torch::Tensor& features, double temperature,
                           SamplerMode mode, std::uint64_t noise_seed);

// Additive [n, L+1, L+1] mask (0 / -inf). Row 0 is the retrieval token. Frame
// row j is open iff G_j > 0.5, the diagonal is always open, and key columns of
// invalid frames are closed for every other row.
torch::Tensor build_attention_mask(const torch::Tensor& relevance, const torch::Tensor& valid);

struct RetrievalOutput {
  torch::Tensor context;  // R_i [n, D]
  torch::Tensor content;  // F_c [n, L, D]
};

RetrievalOutput retrieval_attention(RGEncoderImpl& params, const torch::Tensor& features, const torch::Tensor& mask);

// P_j = F_c_j + G_j * R_i.
torch::Tensor fuse(const torch::Tensor& content, const torch::Tensor& context, const torch::Tensor& relevance);

struct EncodedProposals {
  torch::Tensor features;   // F [n, L, D]
  torch::Tensor relevance;  // G [n, L]
  torch::Tensor soft_relevance;
  torch::Tensor context;  // R [n, D]
  torch::Tensor content;  // F_c [n, L, D]
  torch::Tensor fused;    // P [n, L, D]
};

struct ProposalBatch {
  torch::Tensor frames;       // [n, L, D_f]
  torch::Tensor valid;        // [n, L] bool
  torch::Tensor tokens;       // [n, N, D_w]
  torch::Tensor token_valid;  // [n, N] bool
};

// Stacks (proposal, query) pairs, zero-padding queries to the longest one.
ProposalBatch make_batch(std::span<const ProposalCandidate* const> proposals,
                         std::span<const QueryFeatures* const> queries, torch::Dtype dtype);

EncodedProposals encode_proposals(RGEncoderImpl& params, const ProposalBatch& batch, SamplerMode mode,
                                  double temperature, std::uint64_t noise_seed);

// S_r = sigmoid(f_s(R)).
torch::Tensor context_score(ScoreHeadImpl& head, const torch::Tensor& context);

// ---------------------------------------------------------------------------
// Decoder
// ---------------------------------------------------------------------------

struct DecoderOutput {
  torch::Tensor moments;    // [n, n_q, 2] normalized (center, width)
  torch::Tensor fg_logits;  // [n, n_q]
};

// Throws DataError (DegenerateProposal) if a proposal has no valid frame.
DecoderOutput decode_moments(GroundingDecoderImpl& params, const torch::Tensor& fused, const torch::Tensor& valid);

ProposalPredictions to_predictions(const DecoderOutput& out, std::int64_t index);

}  // namespace rgnet
