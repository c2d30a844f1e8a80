#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgnet/dataio.hpp"

namespace rgnet {

enum class EncoderMode {
  Literal,   // residual connections only, as the attention equations are written
  Standard,  // adds layer normalization and a position-wise feed-forward after each attention
};

struct ModelConfig {
  std::int64_t feature_dim = 32;  // D_f
  std::int64_t text_dim = 32;     // D_w
  std::int64_t model_dim = 64;    // D
  std::int64_t num_heads = 1;
  std::int64_t ffn_dim = 128;
  std::int64_t decoder_layers = 2;
  std::int64_t num_queries = 5;
  EncoderMode encoder_mode = EncoderMode::Standard;
  bool scale_logits = true;  // 1/sqrt(d) attention scaling
  bool position_encoding = true;
  bool sampler_on_raw_features = false;

  void validate() const;
};

struct LossWeights {
  double l1 = 10.0;
  double giou = 1.0;
  double ce = 4.0;
  double samp = 1.0;
  double cont = 10.0;
  double margin = 0.2;
  double background_weight = 1.0;  // BCE weight of unmatched queries

  void validate() const;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  double weight_decay = 1e-4;
  std::int64_t epochs = 200;
  std::int64_t decay_epoch = 120;  // lr *= 0.1 once, from this epoch on
  std::int64_t max_steps = 0;      // 0 = no cap
  std::int64_t batch_size = 8;     // (video, query) pairs
  double proposal_length_s = 32.0;
  std::int64_t top_k = 5;
  double temperature = 0.3;
  std::uint64_t seed = 0;
  std::int64_t num_negatives = 1;  // sampled negative proposals per pair in the decoder path
  bool same_video_negatives = false;
  double grad_clip = 1.0;
  bool deterministic = true;
  LossWeights weights;
  ModelConfig model;

  void validate() const;
};

struct EvalConfig {
  std::vector<std::int64_t> grounding_ks{1, 5};
  std::vector<double> iou_thresholds{0.1, 0.3, 0.5};
  std::vector<std::int64_t> retrieval_ks{1, 3, 5, 10, 30};
  bool nms = true;
  double nms_iou = 0.5;

  void validate() const;
};

// Everything a run needs, addressable through flat keys.
struct RunConfig {
  TrainConfig train;
  EvalConfig eval;
  SyntheticConfig synth;

  void validate() const;
};

// Sets one flat key from its textual value (lists are comma-separated).
// Throws ConfigError naming the key when it is unknown or the value is invalid.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
void set_config_value(RunConfig& cfg, const std::string& key, const nlohmann::json& value);

std::vector<std::string> config_keys();

nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

// Flat JSON object file; missing keys keep their defaults.
RunConfig load_config(const std::filesystem::path& path);

// Desk-scale configuration used by the overfit and trend checks.
RunConfig desk_scale_config();

}  // namespace rgnet
