#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rgnet/temporal.hpp"

namespace rgnet {

// Dense row-major float matrix used for frame and token features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::int64_t rows, std::int64_t cols);
  FeatureMatrix(std::int64_t rows, std::int64_t cols, std::vector<float> values);

  std::int64_t rows() const noexcept { return rows_; }
  std::int64_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<float> row(std::int64_t r);
  std::span<const float> row(std::int64_t r) const;
  float& operator()(std::int64_t r, std::int64_t c) { return values_[static_cast<std::size_t>(r * cols_ + c)]; }
  float operator()(std::int64_t r, std::int64_t c) const {
    return values_[static_cast<std::size_t>(r * cols_ + c)];
  }

  const std::vector<float>& values() const noexcept { return values_; }
  std::vector<float>& values() noexcept { return values_; }

  bool all_finite() const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;
  std::vector<float> values_;
};

struct FrameFeatureSequence {
  std::string video_id;
  double fps = 1.0;
  FeatureMatrix features;  // T x D_f

  std::int64_t num_frames() const noexcept { return features.rows(); }
  double duration_s() const noexcept { return static_cast<double>(features.rows()) / fps; }
};

struct QueryFeatures {
  std::string query_id;
  FeatureMatrix tokens;  // N x D_w
};

struct Annotation {
  std::string query_id;
  std::string video_id;
  Moment moment;  // absolute video seconds

  TimeInterval interval() const { return moment_to_interval(moment); }
};

// Sliding-window slice of a video. Frames past the end of the video are zero
// and flagged invalid.
struct ProposalCandidate {
  std::int64_t index = 0;
  std::int64_t start_frame = 0;
  FeatureMatrix frames;      // L_c x D_f
  std::vector<bool> valid;   // L_c

  std::int64_t length() const noexcept { return frames.rows(); }
  std::int64_t num_valid() const;
  // Window span in seconds, including padded frames.
  TimeInterval window(double fps) const;
};

// Windows of `length_frames` at stride length_frames / 2, starting at 0 while
// start < T. Throws ConfigError for odd or < 2 lengths and DataError for T = 0.
std::vector<ProposalCandidate> slice_proposals(const FrameFeatureSequence& video,
                                               std::int64_t length_frames);

// Window start frames only, matching slice_proposals.
std::vector<std::int64_t> proposal_starts(std::int64_t num_frames, std::int64_t length_frames);

// Proposal length in seconds -> even frame count (rounded to the nearest even).
std::int64_t proposal_frames_for_seconds(double seconds, double fps);

// Frame j spans [j/fps, (j+1)/fps); it is relevant iff its midpoint lies inside
// the annotated moment and the frame is valid.
std::vector<bool> frame_relevance_labels(const ProposalCandidate& proposal, const Annotation& gt, double fps);

// Index of the window with maximal coverage of `moment`; ties go to the earlier
// window.
std::size_t best_covering_proposal(std::span<const TimeInterval> windows, const TimeInterval& moment);

struct Dataset {
  std::vector<FrameFeatureSequence> videos;
  std::vector<QueryFeatures> queries;
  std::vector<Annotation> annotations;

  // Rebuilds the id maps and validates cross references. Throws DataError on a
  // dangling video/query id or a duplicated id.
  void reindex();

  std::size_t video_index(const std::string& video_id) const;
  std::size_t query_index(const std::string& query_id) const;
  const FrameFeatureSequence& video_of(const Annotation& a) const { return videos[video_index(a.video_id)]; }
  const QueryFeatures& query_of(const Annotation& a) const { return queries[query_index(a.query_id)]; }

 private:
  std::unordered_map<std::string, std::size_t> video_by_id_;
  std::unordered_map<std::string, std::size_t> query_by_id_;
};

struct SyntheticConfig {
  std::int64_t num_videos = 16;
  std::int64_t frames_per_video = 256;
  double fps = 1.0;
  std::int64_t feature_dim = 32;  // D_f
  std::int64_t text_dim = 32;     // D_w
  std::int64_t num_tokens = 8;    // N
  double min_moment_width_s = 4.0;
  double max_moment_width_s = 8.0;
  double signal_strength = 5.0;
  double noise_scale = 1.0;
  double token_noise_scale = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
};

// One planted moment per (video, query) pair. Deterministic given cfg.seed;
// video v draws from a generator seeded with seed ^ v.
Dataset generate_synthetic_dataset(const SyntheticConfig& cfg);

// Fixed text -> frame space map (D_w x D_f, row-major) shared by every pair
// of a synthetic dataset.
std::vector<double> synthetic_projection(const SyntheticConfig& cfg);

// Binary feature file: "RGFT", u32 version = 1, u32 T, u32 D, f32 fps, then
// T*D f32 row-major, all little-endian.
inline constexpr std::uint32_t kFeatureFileVersion = 1;
void write_feature_file(const FrameFeatureSequence& seq, const std::filesystem::path& path);
// The video id is not stored in the file; the caller provides it.
FrameFeatureSequence read_feature_file(const std::filesystem::path& path, std::string video_id = {});

// JSON-Lines manifest. Feature paths are resolved relative to the manifest's
// directory. Video feature files are read by up to `workers` threads.
Dataset load_manifest(const std::filesystem::path& path, std::size_t workers = 1);
// Writes features under dir/features and the manifest at dir/manifest.jsonl;
// queries are stored inline. Returns the manifest path.
std::filesystem::path write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace rgnet
