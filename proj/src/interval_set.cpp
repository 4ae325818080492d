#include "mmviad/interval_set.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmviad/error.hpp"

namespace mmviad {

IntervalSet IntervalSet::normalized(std::vector<Interval> intervals, double duration) {
  for (const auto& iv : intervals) {
    if (!std::isfinite(iv.start) || !std::isfinite(iv.end)) {
      throw DataError("interval bound is not a finite number");
    }
    if (iv.start >= iv.end) {
      std::ostringstream msg;
      msg << "interval [" << iv.start << ", " << iv.end << "] has start >= end";
      throw DataError(msg.str());
    }
    if (iv.start < 0.0 || iv.end > duration) {
      std::ostringstream msg;
      msg << "interval [" << iv.start << ", " << iv.end << "] lies outside [0, " << duration << "]";
      throw DataError(msg.str());
    }
  }
  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
    return a.start < b.start || (a.start == b.start && a.end < b.end);
  });

  IntervalSet out;
  for (const auto& iv : intervals) {
    if (!out.intervals_.empty() && iv.start <= out.intervals_.back().end) {
      out.intervals_.back().end = std::max(out.intervals_.back().end, iv.end);
    } else {
      out.intervals_.push_back(iv);
    }
  }
  return out;
}

double IntervalSet::total_length() const {
  double total = 0.0;
  for (const auto& iv : intervals_) total += iv.length();
  return total;
}

double overlap_length(const Interval& a, const Interval& b) {
  return std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
}

double interval_iou(const Interval& a, const Interval& b) {
  const double inter = overlap_length(a, b);
  const double uni = a.length() + b.length() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double intersection_length(const IntervalSet& a, const IntervalSet& b) {
  // Both sides are sorted and disjoint: a two-pointer sweep suffices.
  double total = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    total += overlap_length(a[i], b[j]);
    if (a[i].end < b[j].end) {
      ++i;
    } else {
      ++j;
    }
  }
  return total;
}

double union_length(const IntervalSet& a, const IntervalSet& b) {
  return a.total_length() + b.total_length() - intersection_length(a, b);
}

}  // namespace mmviad
