#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mmviad/interval_set.hpp"
#include "mmviad/png_io.hpp"

namespace mmviad {

struct DiffParams {
  int channel_threshold = 30;    // per 8-bit channel
  int red_dominance_delta = 40;  // R must exceed G and B by more than this
  int area_threshold = 25;       // changed pixels (downscaled grid) to flag a frame
  int gap_fill_frames = 2;
  int min_interval_frames = 3;
  int downscale_factor = 2;      // block-average factor; 1 disables

  void validate() const;  // throws ContractError
  nlohmann::json to_json() const;
  // Missing keys keep their defaults.
  static DiffParams from_json(const nlohmann::json& j);
};

struct FramePair {
  int frame_index = 0;
  Raster unmarked;
  Raster marked;
};

struct VisibilityTrace {
  std::string clip_id;
  std::vector<bool> flags;
  std::vector<std::int64_t> diff_pixel_counts;
  DiffParams params;
  int fps = kClipFps;
};

/// Counts downscaled pixels where the marked render differs from the
/// unmarked one by more than channel_threshold in some channel and the
/// marked pixel is red-dominant. Throws AlignmentError on a size mismatch.
std::int64_t frame_diff(const FramePair& pair, const DiffParams& params);

// Inclusive [first, last] frame ranges after gap filling and length filtering.
std::vector<std::pair<int, int>> visible_runs(const std::vector<bool>& flags, int gap_fill_frames,
                                              int min_interval_frames);

/// Converts per-frame flags to candidate intervals; frame i spans
/// [i/fps, (i+1)/fps).
IntervalSet derive_intervals(const VisibilityTrace& trace, const DiffParams& params);

enum class FrameVariant { kUnmarked, kMarked };
std::string_view to_string(FrameVariant v);
FrameVariant parse_frame_variant(std::string_view s);  // throws DataError

// <clip_dir>/<variant>/frame_NNNN.png
std::filesystem::path frame_path(const std::filesystem::path& clip_dir, FrameVariant variant, int index);

class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual int frame_count() const = 0;
  virtual FramePair load(int index) const = 0;
};

// Reads PNG pairs from <clip_dir>/{unmarked,marked}/frame_NNNN.png.
class DirectoryFrameSource : public FrameSource {
 public:
  explicit DirectoryFrameSource(std::filesystem::path clip_dir, int frame_count = kFramesPerClip);
  int frame_count() const override { return frame_count_; }
  FramePair load(int index) const override;

 private:
  std::filesystem::path clip_dir_;
  int frame_count_;
};

class MemoryFrameSource : public FrameSource {
 public:
  explicit MemoryFrameSource(std::vector<FramePair> frames) : frames_(std::move(frames)) {}
  int frame_count() const override { return static_cast<int>(frames_.size()); }
  FramePair load(int index) const override { return frames_.at(static_cast<std::size_t>(index)); }

 private:
  std::vector<FramePair> frames_;
};

struct ClipDerivation {
  VisibilityTrace trace;
  IntervalSet candidates;

  // {"clip_id", "candidates", "params", "diff_counts"}
  nlohmann::json to_json() const;
};

/// Diffs every frame pair, then derives candidate intervals. Frame sizes must
/// stay constant across the clip (AlignmentError otherwise).
ClipDerivation derive_clip(const std::string& clip_id, const FrameSource& frames,
                           const DiffParams& params, int fps = kClipFps);

}  // namespace mmviad
