#include "mmviad/visibility.hpp"

#include <cstdio>

#include "mmviad/error.hpp"
#include "mmviad/json_io.hpp"

namespace mmviad {

using nlohmann::json;

void DiffParams::validate() const {
  if (channel_threshold < 0 || red_dominance_delta < 0 || area_threshold < 0 || gap_fill_frames < 0 ||
      min_interval_frames < 0) {
    throw ContractError("diff parameters must be non-negative");
  }
  if (downscale_factor < 1) throw ContractError("downscale_factor must be >= 1");
}

json DiffParams::to_json() const {
  return {{"channel_threshold", channel_threshold},   {"red_dominance_delta", red_dominance_delta},
          {"area_threshold", area_threshold},         {"gap_fill_frames", gap_fill_frames},
          {"min_interval_frames", min_interval_frames}, {"downscale_factor", downscale_factor}};
}

DiffParams DiffParams::from_json(const json& j) {
  DiffParams p;
  p.channel_threshold = j.value("channel_threshold", p.channel_threshold);
  p.red_dominance_delta = j.value("red_dominance_delta", p.red_dominance_delta);
  p.area_threshold = j.value("area_threshold", p.area_threshold);
  p.gap_fill_frames = j.value("gap_fill_frames", p.gap_fill_frames);
  p.min_interval_frames = j.value("min_interval_frames", p.min_interval_frames);
  p.downscale_factor = j.value("downscale_factor", p.downscale_factor);
  return p;
}

namespace {

Raster block_average(const Raster& in, int factor) {
  if (factor == 1) return in;
  Raster out(in.width / factor, in.height / factor);
  const int area = factor * factor;
  for (int by = 0; by < out.height; ++by) {
    for (int bx = 0; bx < out.width; ++bx) {
      int sum[3] = {0, 0, 0};
      for (int y = by * factor; y < (by + 1) * factor; ++y) {
        for (int x = bx * factor; x < (bx + 1) * factor; ++x) {
          const auto* p = in.at(x, y);
          sum[0] += p[0];
          sum[1] += p[1];
          sum[2] += p[2];
        }
      }
      auto* q = out.at(bx, by);
      for (int c = 0; c < 3; ++c) q[c] = static_cast<std::uint8_t>((sum[c] + area / 2) / area);
    }
  }
  return out;
}

}  // namespace

std::int64_t frame_diff(const FramePair& pair, const DiffParams& params) {
  params.validate();
  if (pair.marked.width != pair.unmarked.width || pair.marked.height != pair.unmarked.height) {
    throw AlignmentError("frame " + std::to_string(pair.frame_index) + ": marked " +
                         std::to_string(pair.marked.width) + "x" + std::to_string(pair.marked.height) +
                         " vs unmarked " + std::to_string(pair.unmarked.width) + "x" +
                         std::to_string(pair.unmarked.height));
  }
  const Raster m = block_average(pair.marked, params.downscale_factor);
  const Raster u = block_average(pair.unmarked, params.downscale_factor);
  std::int64_t count = 0;
  const std::size_t n = m.rgb.size();
  for (std::size_t i = 0; i < n; i += 3) {
    int max_delta = 0;
    for (int c = 0; c < 3; ++c) {
      max_delta = std::max(max_delta, std::abs(int{m.rgb[i + c]} - int{u.rgb[i + c]}));
    }
    if (max_delta <= params.channel_threshold) continue;
    const int r = m.rgb[i];
    const int g = m.rgb[i + 1];
    const int b = m.rgb[i + 2];
    if (r > g + params.red_dominance_delta && r > b + params.red_dominance_delta) ++count;
  }
  return count;
}

std::vector<std::pair<int, int>> visible_runs(const std::vector<bool>& flags, int gap_fill_frames,
                                              int min_interval_frames) {
  std::vector<std::pair<int, int>> runs;
  const int n = static_cast<int>(flags.size());
  int i = 0;
  while (i < n) {
    if (!flags[i]) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && flags[j + 1]) ++j;
    // Bridge short gaps into the previous run.
    if (!runs.empty() && i - runs.back().second - 1 <= gap_fill_frames) {
      runs.back().second = j;
    } else {
      runs.emplace_back(i, j);
    }
    i = j + 1;
  }
  std::erase_if(runs, [&](const auto& r) { return r.second - r.first + 1 < min_interval_frames; });
  return runs;
}

IntervalSet derive_intervals(const VisibilityTrace& trace, const DiffParams& params) {
  std::vector<Interval> out;
  const double fps = trace.fps;
  for (const auto& [first, last] : visible_runs(trace.flags, params.gap_fill_frames,
                                                params.min_interval_frames)) {
    out.push_back({first / fps, (last + 1) / fps});
  }
  const double duration = static_cast<double>(trace.flags.size()) / fps;
  return IntervalSet::normalized(std::move(out), std::max(duration, kClipDurationSec));
}

std::string_view to_string(FrameVariant v) { return v == FrameVariant::kMarked ? "marked" : "unmarked"; }

FrameVariant parse_frame_variant(std::string_view s) {
  if (s == "marked") return FrameVariant::kMarked;
  if (s == "unmarked") return FrameVariant::kUnmarked;
  throw DataError("unknown frame variant '" + std::string(s) + "'");
}

std::filesystem::path frame_path(const std::filesystem::path& clip_dir, FrameVariant variant, int index) {
  char name[32];
  std::snprintf(name, sizeof(name), "frame_%04d.png", index);
  return clip_dir / std::string(to_string(variant)) / name;
}

DirectoryFrameSource::DirectoryFrameSource(std::filesystem::path clip_dir, int frame_count)
    : clip_dir_(std::move(clip_dir)), frame_count_(frame_count) {}

FramePair DirectoryFrameSource::load(int index) const {
  FramePair pair;
  pair.frame_index = index;
  pair.unmarked = read_png(frame_path(clip_dir_, FrameVariant::kUnmarked, index));
  pair.marked = read_png(frame_path(clip_dir_, FrameVariant::kMarked, index));
  return pair;
}

json ClipDerivation::to_json() const {
  return {{"clip_id", trace.clip_id},
          {"candidates", intervals_to_json(candidates)},
          {"params", trace.params.to_json()},
          {"diff_counts", trace.diff_pixel_counts}};
}

ClipDerivation derive_clip(const std::string& clip_id, const FrameSource& frames, const DiffParams& params,
                           int fps) {
  params.validate();
  ClipDerivation d;
  d.trace.clip_id = clip_id;
  d.trace.params = params;
  d.trace.fps = fps;
  const int n = frames.frame_count();
  int width = -1;
  int height = -1;
  for (int i = 0; i < n; ++i) {
    const auto pair = frames.load(i);
    if (width < 0) {
      width = pair.unmarked.width;
      height = pair.unmarked.height;
    } else if (pair.unmarked.width != width || pair.unmarked.height != height) {
      throw AlignmentError("clip " + clip_id + ": frame " + std::to_string(i) +
                           " changes size mid-clip");
    }
    const auto count = frame_diff(pair, params);
    d.trace.diff_pixel_counts.push_back(count);
    d.trace.flags.push_back(count >= params.area_threshold);
  }
  d.candidates = derive_intervals(d.trace, params);
  return d;
}

}  // namespace mmviad
