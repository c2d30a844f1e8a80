#include "rgnet/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rgnet/errors.hpp"

namespace rgnet {

TimeInterval::TimeInterval(double start_s, double end_s) : start_s_(start_s), end_s_(end_s) {
  if (!std::isfinite(start_s) || !std::isfinite(end_s)) {
    throw InvalidArgument("interval bounds must be finite");
  }
  if (start_s > end_s) {
    throw InvalidArgument("interval start " + std::to_string(start_s) + " exceeds end " +
                          std::to_string(end_s));
  }
}

Moment::Moment(double center_s, double width_s) : center_s_(center_s), width_s_(width_s) {
  if (!std::isfinite(center_s) || !std::isfinite(width_s)) {
    throw InvalidArgument("moment center/width must be finite");
  }
  if (!(width_s > 0.0)) {
    throw InvalidArgument("moment width must be positive, got " + std::to_string(width_s));
  }
}

TimeInterval moment_to_interval(const Moment& m) {
  const double half = 0.5 * m.width();
  return {m.center() - half, m.center() + half};
}

Moment interval_to_moment(const TimeInterval& interval) {
  return {interval.center(), interval.length()};
}

double intersection_length(const TimeInterval& a, const TimeInterval& b) {
  return std::max(0.0, std::min(a.end(), b.end()) - std::max(a.start(), b.start()));
}

double interval_iou(const TimeInterval& a, const TimeInterval& b) {
  const double inter = intersection_length(a, b);
  const double uni = a.length() + b.length() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

double interval_giou(const TimeInterval& a, const TimeInterval& b) {
  const double inter = intersection_length(a, b);
  const double uni = a.length() + b.length() - inter;
  const double hull = std::max(a.end(), b.end()) - std::min(a.start(), b.start());
  if (hull <= 0.0) return 1.0;
  // Two zero-length intervals at distinct points: IoU 0 and hull fully empty.
  const double iou = uni > 0.0 ? inter / uni : 0.0;
  // hull >= union; rounding can make the difference a negative ulp
  return iou - std::max(0.0, hull - uni) / hull;
}

double coverage_fraction(const TimeInterval& moment, const TimeInterval& window) {
  if (moment.length() <= 0.0) {
    throw DataError(DataErrorKind::DegenerateAnnotation,
                    "degenerate annotation: zero-length moment at " + std::to_string(moment.start()));
  }
  return intersection_length(moment, window) / moment.length();
}

}  // namespace rgnet
