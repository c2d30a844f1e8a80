#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rgnet/config.hpp"
#include "rgnet/dataio.hpp"
#include "rgnet/losses.hpp"
#include "rgnet/metrics.hpp"
#include "rgnet/model.hpp"
#include "rgnet/ranking.hpp"

namespace rgnet {

// Sliding windows of one video at a fixed proposal length.
struct VideoProposals {
  std::vector<ProposalCandidate> proposals;
  std::vector<TimeInterval> windows;
  double duration_s = 0.0;
};

// Per-annotation training view: the positive window (maximal coverage), the
// windows usable as negatives (coverage below kRetrievalCoverage), the
// ground truth clipped to the positive window in normalized coordinates
// (absent when that window covers less than half of it), and the in/out frame
// indices of the positive window.
struct TrainingExample {
  std::size_t annotation = 0;
  std::size_t video = 0;
  std::size_t query = 0;
  std::size_t positive = 0;
  std::vector<std::size_t> negatives;
  std::optional<Moment> target;
  std::vector<std::int64_t> in_frames;
  std::vector<std::int64_t> out_frames;
};

class PreparedData {
 public:
  PreparedData(const Dataset& dataset, double proposal_length_s);

  const Dataset& dataset() const noexcept { return *dataset_; }
  const VideoProposals& video(std::size_t index) const { return videos_.at(index); }
  const std::vector<TrainingExample>& examples() const noexcept { return examples_; }

 private:
  const Dataset* dataset_;
  std::vector<VideoProposals> videos_;
  std::vector<TrainingExample> examples_;
};

struct BatchLoss {
  LossBreakdown loss;
  std::int64_t skipped_sampling = 0;  // pairs whose positive window lacks in- or out-of-moment frames
};

// Loss of one batch. The contrastive term scores every positive window with
// every query of the batch; the decoder sees the positive windows plus
// `num_negatives` sampled negatives per pair. `rng` draws the negatives and
// the hinge pairs; `noise_seed` drives the Gumbel noise.
BatchLoss compute_batch_loss(RGNetModel& model, const PreparedData& data, std::span<const std::size_t> example_ids,
                             const TrainConfig& cfg, SamplerMode mode, std::mt19937_64& rng,
                             std::uint64_t noise_seed);

struct StepRecord {
  std::int64_t step = 0;
  std::int64_t epoch = 0;
  double lr = 0.0;
  double loss_total = 0.0;
  double loss_samp = 0.0;
  double loss_cont = 0.0;
  double loss_g = 0.0;
};

nlohmann::json step_to_json(const StepRecord& record);

struct TrainOptions {
  std::optional<std::filesystem::path> log_path;  // JSON Lines, one record per step
  std::function<void(const StepRecord&)> on_step;
};

struct TrainResult {
  std::vector<StepRecord> log;
  std::int64_t epochs_completed = 0;
  std::int64_t steps = 0;
  std::string rng_state;
};

// Configures the process for reproducible runs: one intra-op thread and
// deterministic kernels.
void apply_determinism(bool deterministic);

// AdamW with global-norm clipping; lr drops by 10x from decay_epoch on.
// Throws DivergenceError when the loss becomes non-finite.
TrainResult train(RGNetModel& model, const Dataset& dataset, const TrainConfig& cfg, const TrainOptions& options = {});

// Ranked output for one annotation's query.
struct QueryPrediction {
  std::size_t annotation = 0;
  std::vector<std::size_t> window_ranking;  // all windows, by S_r descending
  std::vector<double> retrieval_scores;     // S_r per window, in window order
  std::vector<ScoredMoment> moments;        // merged, absolute seconds
};

// Full pipeline per annotation: encode every window, rank by S_r, decode the
// top_k windows and merge into k_out moments.
std::vector<QueryPrediction> predict(RGNetModel& model, const PreparedData& data, const RunConfig& cfg,
                                     std::size_t k_out);

// Decodes a single window and ranks its moments by foreground probability.
class ModelProposalDecoder : public ProposalDecoder {
 public:
  ModelProposalDecoder(RGNetModel& model, const EvalConfig& eval);
  std::vector<ScoredMoment> decode(const QueryFeatures& query, const FrameFeatureSequence& video,
                                   const ProposalCandidate& proposal) const override;

 private:
  RGNetModel* model_;
  EvalConfig eval_;
};

MetricsReport evaluate(RGNetModel& model, const Dataset& dataset, const RunConfig& cfg);

// Checkpoint archive: "RGCK", u32 version, u64 header size, JSON header
// (config, epoch, step, rng state, parameter manifest), then every parameter
// as f32 little-endian in manifest order.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointInfo {
  RunConfig config;
  std::int64_t epoch = 0;
  std::int64_t step = 0;
  std::string rng_state;
};

// Refuses to replace an existing file unless `overwrite` is set.
void save_checkpoint(const std::filesystem::path& path, RGNetModel& model, const CheckpointInfo& info,
                     bool overwrite = false);
CheckpointInfo read_checkpoint_info(const std::filesystem::path& path);
// Copies the stored parameters into `model`. Throws CheckpointError when a
// parameter is missing or has a different shape.
void load_parameters(RGNetModel& model, const std::filesystem::path& path);

struct LoadedCheckpoint {
  RGNetModel model;
  CheckpointInfo info;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

inline constexpr const char* kSweepAxes[] = {"top_k", "proposal_length_s", "temperature", "n_queries"};

struct SweepRow {
  std::string axis;
  double value = 0.0;
  RunConfig config;
  MetricsReport report;
};

// One train + evaluate cycle per value with the shared seed. top_k only
// affects inference, so that axis trains once and re-evaluates.
std::vector<SweepRow> sweep(const RunConfig& base, const Dataset& dataset, const std::string& axis,
                            std::span<const double> values,
                            const std::function<void(const SweepRow&)>& on_row = {});

// Header: axis,value,R@topk, then retrieval, grounding and oracle columns.
std::string sweep_to_csv(std::span<const SweepRow> rows);

}  // namespace rgnet
