#include "rgnet/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "rgnet/errors.hpp"

namespace rgnet {

using nlohmann::json;

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(std::string(key) + ": " + what, key);
  };
  require(feature_dim >= 2 && feature_dim % 2 == 0, "feature_dim", "must be an even number >= 2");
  require(text_dim >= 1, "text_dim", "must be >= 1");
  require(model_dim >= 4 && model_dim % 4 == 0, "model_dim", "must be a multiple of 4");
  require(num_heads >= 1 && model_dim % num_heads == 0, "num_heads", "must divide model_dim");
  require(ffn_dim >= 1, "ffn_dim", "must be >= 1");
  require(decoder_layers >= 1, "decoder_layers", "must be >= 1");
  require(num_queries >= 1, "n_queries", "must be >= 1");
}

void LossWeights::validate() const {
  const std::pair<const char*, double> all[] = {{"lambda_l1", l1},     {"lambda_giou", giou}, {"lambda_ce", ce},
                                                {"lambda_samp", samp}, {"lambda_cont", cont}, {"margin", margin},
                                                {"background_weight", background_weight}};
  for (const auto& [key, value] : all) {
    if (!(value >= 0.0)) throw ConfigError(std::string(key) + ": must be >= 0", key);
  }
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(std::string(key) + ": " + what, key);
  };
  require(learning_rate > 0.0, "learning_rate", "must be positive");
  require(weight_decay >= 0.0, "weight_decay", "must be >= 0");
  require(epochs >= 0, "epochs", "must be >= 0");
  require(decay_epoch >= 1, "decay_epoch", "must be >= 1");
  require(epochs == 0 || decay_epoch < epochs, "decay_epoch", "must be smaller than epochs");
  require(max_steps >= 0, "max_steps", "must be >= 0");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(proposal_length_s > 0.0, "proposal_length_s", "must be positive");
  require(top_k >= 1, "top_k", "must be >= 1");
  require(temperature > 0.0, "temperature", "must be positive");
  require(num_negatives >= 0, "num_negatives", "must be >= 0");
  require(grad_clip >= 0.0, "grad_clip", "must be >= 0");
  weights.validate();
  model.validate();
}

void EvalConfig::validate() const {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(std::string(key) + ": " + what, key);
  };
  require(!grounding_ks.empty() && std::all_of(grounding_ks.begin(), grounding_ks.end(), [](auto k) { return k >= 1; }),
          "grounding_ks", "must be a non-empty list of k >= 1");
  require(!iou_thresholds.empty() &&
              std::all_of(iou_thresholds.begin(), iou_thresholds.end(), [](double t) { return t > 0.0 && t < 1.0; }),
          "iou_thresholds", "must be a non-empty list in (0, 1)");
  require(!retrieval_ks.empty() && std::all_of(retrieval_ks.begin(), retrieval_ks.end(), [](auto k) { return k >= 1; }),
          "retrieval_ks", "must be a non-empty list of k >= 1");
  require(nms_iou > 0.0 && nms_iou <= 1.0, "nms_iou", "must be in (0, 1]");
}

void RunConfig::validate() const {
  train.validate();
  eval.validate();
  synth.validate();
  if (synth.feature_dim != train.model.feature_dim || synth.text_dim != train.model.text_dim) {
    throw ConfigError("feature_dim/text_dim disagree between data and model", "feature_dim");
  }
}

namespace {

enum class Kind { Int, UInt, Real, Bool, IntList, RealList, Mode };

struct Entry {
  Kind kind;
  std::function<void(RunConfig&, const json&)> set;
  std::function<json(const RunConfig&)> get;
};

template <typename T>
Entry field(Kind kind, T RunConfig::*section, auto member) {
  return Entry{kind, [section, member](RunConfig& c, const json& v) { (c.*section).*member = v.get<std::remove_reference_t<decltype((c.*section).*member)>>(); },
               [section, member](const RunConfig& c) { return json((c.*section).*member); }};
}

template <typename M>
Entry train_field(Kind kind, M TrainConfig::*member) {
  return field(kind, &RunConfig::train, member);
}
template <typename M>
Entry model_field(Kind kind, M ModelConfig::*member) {
  return Entry{kind, [member](RunConfig& c, const json& v) { c.train.model.*member = v.get<M>(); },
               [member](const RunConfig& c) { return json(c.train.model.*member); }};
}
template <typename M>
Entry weight_field(M LossWeights::*member) {
  return Entry{Kind::Real, [member](RunConfig& c, const json& v) { c.train.weights.*member = v.get<M>(); },
               [member](const RunConfig& c) { return json(c.train.weights.*member); }};
}
template <typename M>
Entry eval_field(Kind kind, M EvalConfig::*member) {
  return field(kind, &RunConfig::eval, member);
}
template <typename M>
Entry synth_field(Kind kind, M SyntheticConfig::*member) {
  return field(kind, &RunConfig::synth, member);
}

const std::vector<std::pair<std::string, Entry>>& registry() {
  static const std::vector<std::pair<std::string, Entry>> entries = [] {
    std::vector<std::pair<std::string, Entry>> e;
    e.emplace_back("learning_rate", train_field(Kind::Real, &TrainConfig::learning_rate));
    e.emplace_back("weight_decay", train_field(Kind::Real, &TrainConfig::weight_decay));
    e.emplace_back("epochs", train_field(Kind::Int, &TrainConfig::epochs));
    e.emplace_back("decay_epoch", train_field(Kind::Int, &TrainConfig::decay_epoch));
    e.emplace_back("max_steps", train_field(Kind::Int, &TrainConfig::max_steps));
    e.emplace_back("batch_size", train_field(Kind::Int, &TrainConfig::batch_size));
    e.emplace_back("proposal_length_s", train_field(Kind::Real, &TrainConfig::proposal_length_s));
    e.emplace_back("top_k", train_field(Kind::Int, &TrainConfig::top_k));
    e.emplace_back("temperature", train_field(Kind::Real, &TrainConfig::temperature));
    e.emplace_back("num_negatives", train_field(Kind::Int, &TrainConfig::num_negatives));
    e.emplace_back("same_video_negatives", train_field(Kind::Bool, &TrainConfig::same_video_negatives));
    e.emplace_back("grad_clip", train_field(Kind::Real, &TrainConfig::grad_clip));
    e.emplace_back("deterministic", train_field(Kind::Bool, &TrainConfig::deterministic));
    e.emplace_back("seed", Entry{Kind::UInt,
                                 [](RunConfig& c, const json& v) {
                                   c.train.seed = v.get<std::uint64_t>();
                                   c.synth.seed = c.train.seed;
                                 },
                                 [](const RunConfig& c) { return json(c.train.seed); }});
    e.emplace_back("lambda_l1", weight_field(&LossWeights::l1));
    e.emplace_back("lambda_giou", weight_field(&LossWeights::giou));
    e.emplace_back("lambda_ce", weight_field(&LossWeights::ce));
    e.emplace_back("lambda_samp", weight_field(&LossWeights::samp));
    e.emplace_back("lambda_cont", weight_field(&LossWeights::cont));
    e.emplace_back("margin", weight_field(&LossWeights::margin));
    e.emplace_back("background_weight", weight_field(&LossWeights::background_weight));
    e.emplace_back("feature_dim", Entry{Kind::Int,
                                        [](RunConfig& c, const json& v) {
                                          c.train.model.feature_dim = v.get<std::int64_t>();
                                          c.synth.feature_dim = c.train.model.feature_dim;
                                        },
                                        [](const RunConfig& c) { return json(c.train.model.feature_dim); }});
    e.emplace_back("text_dim", Entry{Kind::Int,
                                     [](RunConfig& c, const json& v) {
                                       c.train.model.text_dim = v.get<std::int64_t>();
                                       c.synth.text_dim = c.train.model.text_dim;
                                     },
                                     [](const RunConfig& c) { return json(c.train.model.text_dim); }});
    e.emplace_back("model_dim", model_field(Kind::Int, &ModelConfig::model_dim));
    e.emplace_back("num_heads", model_field(Kind::Int, &ModelConfig::num_heads));
    e.emplace_back("ffn_dim", model_field(Kind::Int, &ModelConfig::ffn_dim));
    e.emplace_back("decoder_layers", model_field(Kind::Int, &ModelConfig::decoder_layers));
    e.emplace_back("n_queries", model_field(Kind::Int, &ModelConfig::num_queries));
    e.emplace_back("encoder_mode",
                   Entry{Kind::Mode,
                         [](RunConfig& c, const json& v) {
                           const auto s = v.get<std::string>();
                           if (s == "literal") {
                             c.train.model.encoder_mode = EncoderMode::Literal;
                           } else if (s == "standard") {
                             c.train.model.encoder_mode = EncoderMode::Standard;
                           } else {
                             throw ConfigError("encoder_mode: expected 'literal' or 'standard', got '" + s + "'",
                                               "encoder_mode");
                           }
                         },
                         [](const RunConfig& c) {
                           return json(c.train.model.encoder_mode == EncoderMode::Literal ? "literal" : "standard");
                         }});
    e.emplace_back("scale_logits", model_field(Kind::Bool, &ModelConfig::scale_logits));
    e.emplace_back("position_encoding", model_field(Kind::Bool, &ModelConfig::position_encoding));
    e.emplace_back("sampler_on_raw_features", model_field(Kind::Bool, &ModelConfig::sampler_on_raw_features));
    e.emplace_back("grounding_ks", eval_field(Kind::IntList, &EvalConfig::grounding_ks));
    e.emplace_back("iou_thresholds", eval_field(Kind::RealList, &EvalConfig::iou_thresholds));
    e.emplace_back("retrieval_ks", eval_field(Kind::IntList, &EvalConfig::retrieval_ks));
    e.emplace_back("nms", eval_field(Kind::Bool, &EvalConfig::nms));
    e.emplace_back("nms_iou", eval_field(Kind::Real, &EvalConfig::nms_iou));
    e.emplace_back("num_videos", synth_field(Kind::Int, &SyntheticConfig::num_videos));
    e.emplace_back("frames_per_video", synth_field(Kind::Int, &SyntheticConfig::frames_per_video));
    e.emplace_back("fps", synth_field(Kind::Real, &SyntheticConfig::fps));
    e.emplace_back("num_tokens", synth_field(Kind::Int, &SyntheticConfig::num_tokens));
    e.emplace_back("min_moment_width_s", synth_field(Kind::Real, &SyntheticConfig::min_moment_width_s));
    e.emplace_back("max_moment_width_s", synth_field(Kind::Real, &SyntheticConfig::max_moment_width_s));
    e.emplace_back("signal_strength", synth_field(Kind::Real, &SyntheticConfig::signal_strength));
    e.emplace_back("noise_scale", synth_field(Kind::Real, &SyntheticConfig::noise_scale));
    e.emplace_back("token_noise_scale", synth_field(Kind::Real, &SyntheticConfig::token_noise_scale));
    return e;
  }();
  return entries;
}

const Entry& lookup(const std::string& key) {
  const auto& reg = registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& e) { return e.first == key; });
  if (it == reg.end()) throw ConfigError("unknown configuration key '" + key + "'", key);
  return it->second;
}

json parse_scalar(Kind kind, const std::string& key, const std::string& text) {
  auto fail = [&](const char* what) -> json {
    throw ConfigError(key + ": cannot parse '" + text + "' as " + what, key);
  };
  const char* first = text.data();
  const char* last = text.data() + text.size();
  switch (kind) {
    case Kind::Int: {
      std::int64_t v{};
      const auto [p, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || p != last) return fail("an integer");
      return v;
    }
    case Kind::UInt: {
      std::uint64_t v{};
      const auto [p, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || p != last) return fail("an unsigned integer");
      return v;
    }
    case Kind::Real: {
      double v{};
      const auto [p, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || p != last) return fail("a number");
      return v;
    }
    case Kind::Bool:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      return fail("a boolean");
    case Kind::Mode:
      return text;
    default:
      return fail("a scalar");
  }
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const json& value) {
  const auto& entry = lookup(key);
  try {
    entry.set(cfg, value);
  } catch (const json::exception& e) {
    throw ConfigError(key + ": wrong value type (" + e.what() + ")", key);
  }
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto& entry = lookup(key);
  json parsed;
  if (entry.kind == Kind::IntList || entry.kind == Kind::RealList) {
    parsed = json::array();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      parsed.push_back(parse_scalar(entry.kind == Kind::IntList ? Kind::Int : Kind::Real, key, item));
    }
  } else {
    parsed = parse_scalar(entry.kind, key, value);
  }
  set_config_value(cfg, key, parsed);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : registry()) keys.push_back(k);
  return keys;
}

json config_to_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [k, e] : registry()) j[k] = e.get(cfg);
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a flat JSON object");
  RunConfig cfg;
  for (const auto& [k, v] : j.items()) set_config_value(cfg, k, v);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string(), "config");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what(), "config");
  }
  return config_from_json(j);
}

RunConfig desk_scale_config() {
  RunConfig cfg;
  cfg.synth.num_videos = 16;
  cfg.synth.frames_per_video = 256;
  cfg.synth.fps = 1.0;
  cfg.synth.signal_strength = 5.0;
  cfg.train.model.feature_dim = cfg.synth.feature_dim = 32;
  cfg.train.model.text_dim = cfg.synth.text_dim = 32;
  cfg.train.model.model_dim = 64;
  cfg.train.proposal_length_s = 32.0;
  cfg.train.batch_size = 8;
  cfg.train.top_k = 3;
  cfg.train.learning_rate = 1e-3;
  cfg.train.epochs = 250;
  cfg.train.decay_epoch = 200;
  cfg.train.max_steps = 500;
  cfg.eval.retrieval_ks = {1, 3, 5, 10};
  return cfg;
}

}  // namespace rgnet
