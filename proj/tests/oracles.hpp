#pragma once

// Independent reference computations used only by tests. They avoid the
// closed-form code paths of the library on purpose.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "mmviad/interval_set.hpp"

namespace oracle {

inline constexpr int kBinsPerSecond = 1000;

// Bin k covers [k, k+1) ms; it belongs to [s, e) when its midpoint does.
inline std::vector<bool> rasterize(const std::vector<mmviad::Interval>& ivs, double duration = 2.0) {
  const int n = static_cast<int>(std::lround(duration * kBinsPerSecond));
  std::vector<bool> bins(n, false);
  for (int k = 0; k < n; ++k) {
    const double mid = (k + 0.5) / kBinsPerSecond;
    for (const auto& iv : ivs) {
      if (mid >= iv.start && mid < iv.end) {
        bins[k] = true;
        break;
      }
    }
  }
  return bins;
}

inline double grid_iou(const std::vector<bool>& a, const std::vector<bool>& b) {
  long inter = 0;
  long uni = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    inter += a[k] && b[k];
    uni += a[k] || b[k];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double grid_iou_max(const mmviad::IntervalSet& pred, const mmviad::IntervalSet& gt) {
  double best = 0.0;
  for (const auto& p : pred) {
    const auto pb = rasterize({p});
    for (const auto& g : gt) best = std::max(best, grid_iou(pb, rasterize({g})));
  }
  return best;
}

inline double grid_set_iou(const mmviad::IntervalSet& pred, const mmviad::IntervalSet& gt) {
  if (pred.empty() && gt.empty()) return 1.0;
  return grid_iou(rasterize(pred.intervals()), rasterize(gt.intervals()));
}

// Gap filling by looking for the nearest flagged frame on each side of every
// unflagged one, then a plain run scan with the length filter.
inline std::vector<std::pair<int, int>> merged_runs(std::vector<bool> flags, int gap, int min_len) {
  const int n = static_cast<int>(flags.size());
  std::vector<bool> filled = flags;
  for (int i = 0; i < n; ++i) {
    if (flags[i]) continue;
    int left = -1;
    for (int l = i - 1; l >= 0; --l) {
      if (flags[l]) {
        left = l;
        break;
      }
    }
    int right = -1;
    for (int r = i + 1; r < n; ++r) {
      if (flags[r]) {
        right = r;
        break;
      }
    }
    if (left >= 0 && right >= 0 && right - left - 1 <= gap) filled[i] = true;
  }
  std::vector<std::pair<int, int>> runs;
  for (int i = 0; i < n;) {
    if (!filled[i]) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && filled[j + 1]) ++j;
    if (j - i + 1 >= min_len) runs.emplace_back(i, j);
    i = j + 1;
  }
  return runs;
}

inline std::vector<mmviad::Interval> runs_to_seconds(const std::vector<std::pair<int, int>>& runs, int fps) {
  std::vector<mmviad::Interval> out;
  for (const auto& [a, b] : runs) {
    out.push_back({static_cast<double>(a) / fps, static_cast<double>(b + 1) / fps});
  }
  return out;
}

// Two-pass population statistics.
inline std::pair<double, double> mean_and_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

}  // namespace oracle
