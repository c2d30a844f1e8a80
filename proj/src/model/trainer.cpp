#include "rgnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rgnet/errors.hpp"

namespace rgnet {

PreparedData::PreparedData(const Dataset& dataset, double proposal_length_s) : dataset_(&dataset) {
  if (dataset.annotations.empty()) throw DataError(DataErrorKind::EmptyInput, "dataset has no annotations");
  videos_.reserve(dataset.videos.size());
  for (const auto& video : dataset.videos) {
    VideoProposals vp;
    vp.proposals = slice_proposals(video, proposal_frames_for_seconds(proposal_length_s, video.fps));
    for (const auto& p : vp.proposals) vp.windows.push_back(p.window(video.fps));
    vp.duration_s = video.duration_s();
    videos_.push_back(std::move(vp));
  }
  for (std::size_t a = 0; a < dataset.annotations.size(); ++a) {
    const auto& ann = dataset.annotations[a];
    TrainingExample ex;
    ex.annotation = a;
    ex.video = dataset.video_index(ann.video_id);
    ex.query = dataset.query_index(ann.query_id);
    const auto& vp = videos_[ex.video];
    const auto gt = ann.interval();
    ex.positive = best_covering_proposal(vp.windows, gt);
    for (std::size_t w = 0; w < vp.windows.size(); ++w) {
      if (w != ex.positive && coverage_fraction(gt, vp.windows[w]) < kRetrievalCoverage) ex.negatives.push_back(w);
    }
    const auto& window = vp.windows[ex.positive];
    if (coverage_fraction(gt, window) >= kRetrievalCoverage) {
      const double lo = std::max(gt.start(), window.start());
      const double hi = std::min(gt.end(), window.end());
      ex.target = to_normalized(interval_to_moment(TimeInterval(lo, hi)), window);
    }
    const auto labels = frame_relevance_labels(vp.proposals[ex.positive], ann, dataset.videos[ex.video].fps);
    const auto& valid = vp.proposals[ex.positive].valid;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (!valid[j]) continue;
      (labels[j] ? ex.in_frames : ex.out_frames).push_back(static_cast<std::int64_t>(j));
    }
    examples_.push_back(std::move(ex));
  }
}

BatchLoss compute_batch_loss(RGNetModel& model, const PreparedData& data, std::span<const std::size_t> example_ids,
                             const TrainConfig& cfg, SamplerMode mode, std::mt19937_64& rng,
                             std::uint64_t noise_seed) {
  if (example_ids.empty()) throw DataError(DataErrorKind::EmptyInput, "empty batch");
  const auto b = static_cast<std::int64_t>(example_ids.size());
  const auto& ds = data.dataset();
  std::vector<const TrainingExample*> ex;
  for (auto id : example_ids) ex.push_back(&data.examples().at(id));

  // Rows 0..B*B-1: positive window of pair i with the query of pair j.
  // Remaining rows: sampled negatives with their own query.
  std::vector<const ProposalCandidate*> proposals;
  std::vector<const QueryFeatures*> queries;
  for (std::int64_t i = 0; i < b; ++i) {
    const auto& pos = data.video(ex[i]->video).proposals[ex[i]->positive];
    for (std::int64_t j = 0; j < b; ++j) {
      proposals.push_back(&pos);
      queries.push_back(&ds.queries[ex[j]->query]);
    }
  }
  std::vector<std::int64_t> negative_owner;
  for (std::int64_t i = 0; i < b; ++i) {
    const auto& cands = ex[i]->negatives;
    if (cands.empty()) continue;
    for (std::int64_t n = 0; n < cfg.num_negatives; ++n) {
      const auto w = cands[std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng)];
      proposals.push_back(&data.video(ex[i]->video).proposals[w]);
      queries.push_back(&ds.queries[ex[i]->query]);
      negative_owner.push_back(i);
    }
  }
  const auto batch = make_batch(proposals, queries, model->dtype());
  const auto enc = encode_proposals(*model->encoder, batch, mode, cfg.temperature, noise_seed);
  const auto n_neg = static_cast<std::int64_t>(negative_owner.size());

  auto logits = model->score_head->forward(enc.context.slice(0, 0, b * b)).view({b, b});
  if (cfg.same_video_negatives) {
    // One extra column per row: the row's first sampled negative, or -inf.
    std::vector<torch::Tensor> extra(static_cast<std::size_t>(b));
    const auto neg_scores = model->score_head->forward(enc.context.slice(0, b * b));
    for (std::int64_t n = 0; n < n_neg; ++n) {
      auto& slot = extra[static_cast<std::size_t>(negative_owner[n])];
      if (!slot.defined()) slot = neg_scores[n];
    }
    for (auto& slot : extra) {
      if (!slot.defined()) slot = torch::full({}, -std::numeric_limits<double>::infinity(), logits.options());
    }
    logits = torch::cat({logits, torch::stack(extra).unsqueeze(1)}, 1);
  }
  const auto cont = contrastive_loss_from_logits(logits) / static_cast<double>(b);

  std::vector<std::int64_t> pos_rows;
  for (std::int64_t i = 0; i < b; ++i) pos_rows.push_back(i * b + i);
  const auto pos_idx = torch::tensor(pos_rows, torch::kLong);
  const auto pos_context = enc.context.index_select(0, pos_idx);
  const auto pos_fused = enc.fused.index_select(0, pos_idx);

  BatchLoss out;
  const auto scores = sampling_score(*model->sampling_head, pos_context, pos_fused);
  auto samp = torch::zeros({}, scores.options());
  for (std::int64_t i = 0; i < b; ++i) {
    const auto s = sampling_loss(scores[i], ex[i]->in_frames, ex[i]->out_frames, cfg.weights.margin, rng());
    if (s.skipped) ++out.skipped_sampling;
    samp = samp + s.value;
  }
  samp = samp / static_cast<double>(b);

  torch::Tensor dec_fused = pos_fused;
  torch::Tensor dec_valid = batch.valid.index_select(0, pos_idx);
  if (n_neg > 0) {
    dec_fused = torch::cat({pos_fused, enc.fused.slice(0, b * b)});
    dec_valid = torch::cat({dec_valid, batch.valid.slice(0, b * b)});
  }
  const auto dec = decode_moments(*model->decoder, dec_fused, dec_valid);
  auto ground = torch::zeros({}, scores.options());
  for (std::int64_t i = 0; i < b; ++i) {
    if (!ex[i]->target) continue;
    const Moment target[] = {*ex[i]->target};
    ground = ground + grounding_loss(dec.moments[i], dec.fg_logits[i], target, cfg.weights).total;
  }
  for (std::int64_t n = 0; n < n_neg; ++n) ground = ground + background_loss(dec.fg_logits[b + n], cfg.weights);
  ground = ground / static_cast<double>(b);

  if (cfg.deterministic) {
    out.loss = total_loss(samp.to(torch::kFloat64), cont.to(torch::kFloat64), ground.to(torch::kFloat64), cfg.weights);
  } else {
    out.loss = total_loss(samp, cont, ground, cfg.weights);
  }
  return out;
}

nlohmann::json step_to_json(const StepRecord& r) {
  return {{"step", r.step},           {"epoch", r.epoch},         {"lr", r.lr},         {"loss_total", r.loss_total},
          {"loss_samp", r.loss_samp}, {"loss_cont", r.loss_cont}, {"loss_g", r.loss_g}};
}

void apply_determinism(bool deterministic) {
  if (!deterministic) return;
  torch::set_num_threads(1);
  at::globalContext().setDeterministicAlgorithms(true, false);
}

TrainResult train(RGNetModel& model, const Dataset& dataset, const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  apply_determinism(cfg.deterministic);
  const PreparedData data(dataset, cfg.proposal_length_s);
  std::mt19937_64 rng(cfg.seed);

  std::ofstream log_file;
  if (options.log_path) {
    if (options.log_path->has_parent_path()) std::filesystem::create_directories(options.log_path->parent_path());
    log_file.open(*options.log_path);
    if (!log_file) throw FormatError(FormatErrorKind::Io, "cannot write log " + options.log_path->string());
  }

  torch::optim::AdamW optimizer(model->parameters(),
                                torch::optim::AdamWOptions(cfg.learning_rate).weight_decay(cfg.weight_decay));
  model->train();

  TrainResult result;
  std::vector<std::size_t> order(data.examples().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);

  for (std::int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.max_steps > 0 && result.steps >= cfg.max_steps) break;
    const double lr = epoch >= cfg.decay_epoch ? cfg.learning_rate * 0.1 : cfg.learning_rate;
    for (auto& group : optimizer.param_groups()) static_cast<torch::optim::AdamWOptions&>(group.options()).lr(lr);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
      if (cfg.max_steps > 0 && result.steps >= cfg.max_steps) break;
      const auto end = std::min(order.size(), begin + batch_size);
      const std::span<const std::size_t> ids(order.data() + begin, end - begin);
      const std::uint64_t noise_seed = cfg.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(result.steps);
      const auto loss = compute_batch_loss(model, data, ids, cfg, SamplerMode::Train, rng, noise_seed).loss;

      StepRecord rec;
      rec.step = result.steps;
      rec.epoch = epoch;
      rec.lr = lr;
      rec.loss_total = loss.total.item<double>();
      rec.loss_samp = loss.samp.item<double>();
      rec.loss_cont = loss.cont.item<double>();
      rec.loss_g = loss.ground.item<double>();
      if (!std::isfinite(rec.loss_total)) {
        std::ostringstream msg;
        msg << "training diverged at step " << rec.step << " (epoch " << epoch << "): loss_total=" << rec.loss_total
            << " loss_samp=" << rec.loss_samp << " loss_cont=" << rec.loss_cont << " loss_g=" << rec.loss_g;
        throw DivergenceError(msg.str());
      }

      optimizer.zero_grad();
      loss.total.backward();
      if (cfg.grad_clip > 0.0) torch::nn::utils::clip_grad_norm_(model->parameters(), cfg.grad_clip);
      optimizer.step();

      if (log_file) log_file << step_to_json(rec).dump() << '\n' << std::flush;
      if (options.on_step) options.on_step(rec);
      result.log.push_back(rec);
      ++result.steps;
    }
    result.epochs_completed = epoch + 1;
  }
  model->eval();
  std::ostringstream state;
  state << rng;
  result.rng_state = state.str();
  return result;
}

}  // namespace rgnet
