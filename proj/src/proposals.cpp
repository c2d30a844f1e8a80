#include <algorithm>
#include <cmath>

#include "rgnet/dataio.hpp"
#include "rgnet/errors.hpp"

namespace rgnet {

std::int64_t ProposalCandidate::num_valid() const {
  return std::count(valid.begin(), valid.end(), true);
}

TimeInterval ProposalCandidate::window(double fps) const {
  return {static_cast<double>(start_frame) / fps, static_cast<double>(start_frame + length()) / fps};
}

std::vector<std::int64_t> proposal_starts(std::int64_t num_frames, std::int64_t length_frames) {
  if (length_frames < 2 || length_frames % 2 != 0) {
    throw ConfigError("proposal length must be an even frame count >= 2, got " + std::to_string(length_frames),
                      "proposal_length_s");
  }
  if (num_frames <= 0) throw DataError(DataErrorKind::EmptyInput, "cannot slice an empty video");
  std::vector<std::int64_t> starts;
  const std::int64_t stride = length_frames / 2;
  for (std::int64_t s = 0; s < num_frames; s += stride) starts.push_back(s);
  return starts;
}

std::vector<ProposalCandidate> slice_proposals(const FrameFeatureSequence& video, std::int64_t length_frames) {
  const std::int64_t total = video.num_frames();
  const std::int64_t dim = video.features.cols();
  std::vector<ProposalCandidate> out;
  const auto starts = proposal_starts(total, length_frames);
  out.reserve(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    ProposalCandidate c;
    c.index = static_cast<std::int64_t>(i);
    c.start_frame = starts[i];
    c.frames = FeatureMatrix(length_frames, dim);
    c.valid.assign(static_cast<std::size_t>(length_frames), false);
    const std::int64_t available = std::min(length_frames, total - starts[i]);
    for (std::int64_t j = 0; j < available; ++j) {
      const auto src = video.features.row(starts[i] + j);
      std::copy(src.begin(), src.end(), c.frames.row(j).begin());
      c.valid[static_cast<std::size_t>(j)] = true;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::int64_t proposal_frames_for_seconds(double seconds, double fps) {
  if (!(seconds > 0.0) || !(fps > 0.0)) {
    throw ConfigError("proposal length and fps must be positive", "proposal_length_s");
  }
  const auto half = static_cast<std::int64_t>(std::llround(seconds * fps / 2.0));
  return std::max<std::int64_t>(2, 2 * half);
}

std::vector<bool> frame_relevance_labels(const ProposalCandidate& proposal, const Annotation& gt, double fps) {
  const TimeInterval span = gt.interval();
  std::vector<bool> labels(static_cast<std::size_t>(proposal.length()), false);
  for (std::int64_t j = 0; j < proposal.length(); ++j) {
    if (!proposal.valid[static_cast<std::size_t>(j)]) continue;
    const double mid = (static_cast<double>(proposal.start_frame + j) + 0.5) / fps;
    labels[static_cast<std::size_t>(j)] = mid >= span.start() && mid < span.end();
  }
  return labels;
}

std::size_t best_covering_proposal(std::span<const TimeInterval> windows, const TimeInterval& moment) {
  if (windows.empty()) throw DataError(DataErrorKind::EmptyInput, "no proposal windows");
  std::size_t best = 0;
  double best_cov = -1.0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const double cov = coverage_fraction(moment, windows[i]);
    if (cov > best_cov) {
      best_cov = cov;
      best = i;
    }
  }
  return best;
}

}  // namespace rgnet
