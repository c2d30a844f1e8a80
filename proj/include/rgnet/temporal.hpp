#pragma once

// Interval and moment arithmetic shared by slicing, losses and metrics.
// All quantities are seconds carried as double; frame indices only appear at
// the I/O boundary.

namespace rgnet {

class TimeInterval {
 public:
  // Throws InvalidArgument unless both ends are finite and start <= end.
  TimeInterval(double start_s, double end_s);

  double start() const noexcept { return start_s_; }
  double end() const noexcept { return end_s_; }
  double length() const noexcept { return end_s_ - start_s_; }
  double center() const noexcept { return 0.5 * (start_s_ + end_s_); }

  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;

 private:
  double start_s_;
  double end_s_;
};

// (center, width) parameterization. Also used for proposal-normalized moments
// where both coordinates live in [0, 1].
class Moment {
 public:
  // Throws InvalidArgument unless finite with width > 0.
  Moment(double center_s, double width_s);

  double center() const noexcept { return center_s_; }
  double width() const noexcept { return width_s_; }

  friend bool operator==(const Moment&, const Moment&) = default;

 private:
  double center_s_;
  double width_s_;
};

struct ScoredMoment {
  Moment moment;
  double score;  // [0, 1]
};

TimeInterval moment_to_interval(const Moment& m);

// Zero-length intervals have no moment representation; throws InvalidArgument.
Moment interval_to_moment(const TimeInterval& interval);

double intersection_length(const TimeInterval& a, const TimeInterval& b);

// |a ∩ b| / |a ∪ b|, 0 when the union has zero length.
double interval_iou(const TimeInterval& a, const TimeInterval& b);

// IoU - (hull - union) / hull. Two zero-length intervals at the same point
// give 1.
double interval_giou(const TimeInterval& a, const TimeInterval& b);

// Fraction of `moment` covered by `window`. Throws DataError
// (DegenerateAnnotation) for a zero-length moment.
double coverage_fraction(const TimeInterval& moment, const TimeInterval& window);

}  // namespace rgnet
