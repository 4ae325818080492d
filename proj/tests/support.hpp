#pragma once

// Fixture builders shared by the unit tests and the acceptance suite.

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "mmviad/dataset.hpp"
#include "mmviad/response_grammar.hpp"
#include "mmviad/taxonomy.hpp"
#include "mmviad/visibility.hpp"

namespace fixture {

namespace fs = std::filesystem;

// Removes itself on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("mmviad_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline mmviad::ClipRecord clip(std::string id, std::string category, mmviad::DefectType defect,
                               std::vector<mmviad::Interval> intervals = {},
                               std::vector<mmviad::SplitTag> splits = {mmviad::SplitTag::kStandardTest}) {
  mmviad::ClipRecord c;
  c.clip_id = std::move(id);
  c.object_category = std::move(category);
  c.semantic_group = std::string(mmviad::Taxonomy::instance().group_of(c.object_category));
  c.defect_type = defect;
  c.anomaly_status =
      defect == mmviad::DefectType::kNone ? mmviad::AnomalyStatus::kNormal : mmviad::AnomalyStatus::kAbnormal;
  c.splits = std::move(splits);
  c.gt_intervals = mmviad::IntervalSet::normalized(std::move(intervals));
  return c;
}

inline mmviad::Manifest manifest(std::vector<mmviad::ClipRecord> clips, std::string protocol = "standard") {
  mmviad::Manifest m;
  m.protocol = std::move(protocol);
  m.clips = std::move(clips);
  return m;
}

// n clips cycling through categories and defects; every third clip is normal.
// Abnormal clips get a single interval derived from the index.
inline std::vector<mmviad::ClipRecord> synthetic_clips(int n, mmviad::SplitTag split = mmviad::SplitTag::kStandardTest) {
  const auto& cats = mmviad::Taxonomy::instance().categories();
  std::vector<mmviad::ClipRecord> out;
  for (int i = 0; i < n; ++i) {
    const auto& cat = cats[static_cast<std::size_t>(i) % cats.size()];
    char id[32];
    std::snprintf(id, sizeof(id), "clip_%04d", i);
    if (i % 3 == 0) {
      out.push_back(clip(id, std::string(cat.category), mmviad::DefectType::kNone, {}, {split}));
    } else {
      const auto defect = mmviad::kStructuralDefects[static_cast<std::size_t>(i) % 6];
      const double s = (i % 10) / 10.0;
      out.push_back(clip(id, std::string(cat.category), defect, {{s, s + 0.5 + (i % 5) / 10.0}}, {split}));
    }
  }
  return out;
}

inline std::string structured_response(char q1, char q2, char q3, const std::string& q4,
                                       const std::string& think = "The red-free surface shows a dent.") {
  return "<global_perception>\nA ceramic vase on a wooden floor.\n</global_perception>\n"
         "<segment_perception>\nEarly frames show the rim; later frames the base.\n</segment_perception>\n"
         "<think>\n" +
         think + "\n</think>\n<answer>\n<q1>" + q1 + "</q1>\n<q2>" + q2 + "</q2>\n<q3>" + q3 +
         "</q3>\n<q4>" + q4 + "</q4>\n</answer>";
}

// A response answering every question of `clip` correctly.
inline std::string perfect_response(const mmviad::ClipRecord& c, const mmviad::DistractorPolicy& policy = {}) {
  const auto qa = mmviad::generate_qa(c, policy);
  return structured_response(*qa[0].gt_letter, *qa[1].gt_letter, *qa[2].gt_letter,
                             mmviad::format_intervals(c.gt_intervals));
}

inline mmviad::Raster gray_frame(int w, int h, std::uint8_t level = 128) { return mmviad::Raster(w, h, level, level, level); }

}  // namespace fixture
