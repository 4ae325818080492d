#pragma once

#include <cstddef>
#include <vector>

namespace mmviad {

inline constexpr double kClipDurationSec = 2.0;
inline constexpr int kClipFps = 30;
inline constexpr int kFramesPerClip = 60;

struct Interval {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted, pairwise-disjoint visible-time intervals inside one clip.
///
/// Construction normalizes the input: intervals are sorted by start and any
/// that overlap or touch are merged, so two sets covering the same time span
/// compare equal. Every interval satisfies 0 <= start < end <= duration.
class IntervalSet {
 public:
  IntervalSet() = default;

  /// Throws DataError when an interval is inverted, empty, non-finite, or
  /// leaves [0, duration].
  static IntervalSet normalized(std::vector<Interval> intervals,
                                double duration = kClipDurationSec);

  const std::vector<Interval>& intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }
  bool empty() const { return intervals_.empty(); }
  auto begin() const { return intervals_.begin(); }
  auto end() const { return intervals_.end(); }
  const Interval& operator[](std::size_t i) const { return intervals_[i]; }

  double total_length() const;

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  std::vector<Interval> intervals_;
};

double overlap_length(const Interval& a, const Interval& b);

// Single-interval IoU; 0 when the union is degenerate.
double interval_iou(const Interval& a, const Interval& b);

// Total length covered by both sets.
double intersection_length(const IntervalSet& a, const IntervalSet& b);

double union_length(const IntervalSet& a, const IntervalSet& b);

}  // namespace mmviad
