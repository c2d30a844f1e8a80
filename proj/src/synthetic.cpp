#include <cmath>
#include <cstdio>
#include <random>

#include "rgnet/dataio.hpp"
#include "rgnet/errors.hpp"

namespace rgnet {

void SyntheticConfig::validate() const {
  auto require = [](bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(std::string(key) + ": " + what, key);
  };
  require(num_videos >= 1, "num_videos", "must be >= 1");
  require(frames_per_video >= 1, "frames_per_video", "must be >= 1");
  require(fps > 0.0, "fps", "must be positive");
  require(feature_dim >= 1, "feature_dim", "must be >= 1");
  require(text_dim >= 1, "text_dim", "must be >= 1");
  require(num_tokens >= 1, "num_tokens", "must be >= 1");
  require(min_moment_width_s > 0.0, "min_moment_width_s", "must be positive");
  require(max_moment_width_s >= min_moment_width_s, "max_moment_width_s", "must be >= min_moment_width_s");
  require(max_moment_width_s <= static_cast<double>(frames_per_video) / fps, "max_moment_width_s",
          "moment must fit inside the video");
  require(signal_strength >= 0.0, "signal_strength", "must be >= 0");
  require(noise_scale >= 0.0, "noise_scale", "must be >= 0");
  require(token_noise_scale >= 0.0, "token_noise_scale", "must be >= 0");
}

namespace {

std::string numbered(char prefix, std::int64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%04lld", prefix, static_cast<long long>(i));
  return buf;
}

}  // namespace

std::vector<double> synthetic_projection(const SyntheticConfig& cfg) {
  const auto dw = static_cast<std::size_t>(cfg.text_dim);
  const auto df = static_cast<std::size_t>(cfg.feature_dim);
  std::vector<double> projection(dw * df);
  std::seed_seq seq{cfg.seed, std::uint64_t{0x70726f6aULL}};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dw)));
  for (auto& p : projection) p = normal(rng);
  return projection;
}

Dataset generate_synthetic_dataset(const SyntheticConfig& cfg) {
  cfg.validate();
  const auto dw = static_cast<std::size_t>(cfg.text_dim);
  const auto df = static_cast<std::size_t>(cfg.feature_dim);

  const auto projection = synthetic_projection(cfg);

  Dataset ds;
  ds.videos.reserve(static_cast<std::size_t>(cfg.num_videos));
  for (std::int64_t v = 0; v < cfg.num_videos; ++v) {
    std::seed_seq seq{cfg.seed ^ static_cast<std::uint64_t>(v), std::uint64_t{1}};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> direction(dw);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& x : direction) {
        x = normal(rng);
        norm += x * x;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& x : direction) x /= norm;

    std::vector<double> planted(df, 0.0);
    double planted_norm = 0.0;
    for (std::size_t c = 0; c < df; ++c) {
      for (std::size_t r = 0; r < dw; ++r) planted[c] += direction[r] * projection[r * df + c];
      planted_norm += planted[c] * planted[c];
    }
    planted_norm = std::sqrt(planted_norm);
    if (planted_norm > 0.0) {
      for (auto& x : planted) x /= planted_norm;
    }

    const double duration = static_cast<double>(cfg.frames_per_video) / cfg.fps;
    const double width = cfg.min_moment_width_s + (cfg.max_moment_width_s - cfg.min_moment_width_s) * unit(rng);
    const double start = (duration - width) * unit(rng);
    const TimeInterval span(start, start + width);

    FrameFeatureSequence video{numbered('v', v), cfg.fps, FeatureMatrix(cfg.frames_per_video, cfg.feature_dim)};
    for (std::int64_t t = 0; t < cfg.frames_per_video; ++t) {
      const double mid = (static_cast<double>(t) + 0.5) / cfg.fps;
      const bool inside = mid >= span.start() && mid < span.end();
      auto row = video.features.row(t);
      for (std::size_t c = 0; c < df; ++c) {
        const double signal = inside ? cfg.signal_strength * planted[c] : 0.0;
        row[c] = static_cast<float>(signal + cfg.noise_scale * normal(rng));
      }
    }

    QueryFeatures query{numbered('q', v), FeatureMatrix(cfg.num_tokens, cfg.text_dim)};
    for (std::int64_t n = 0; n < cfg.num_tokens; ++n) {
      auto row = query.tokens.row(n);
      for (std::size_t c = 0; c < dw; ++c) {
        row[c] = static_cast<float>(direction[c] + cfg.token_noise_scale * normal(rng));
      }
    }

    ds.annotations.push_back(Annotation{query.query_id, video.video_id, interval_to_moment(span)});
    ds.videos.push_back(std::move(video));
    ds.queries.push_back(std::move(query));
  }
  ds.reindex();
  return ds;
}

}  // namespace rgnet
