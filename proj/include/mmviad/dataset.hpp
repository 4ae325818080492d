#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mmviad/interval_set.hpp"
#include "mmviad/taxonomy.hpp"

namespace mmviad {

enum class AnomalyStatus { kNormal, kAbnormal };
enum class Protocol { kStandard, kUnseen };
enum class SplitTag { kStandardTrain, kStandardTest, kUnseenTrain, kUnseenTest };
enum class QaTask { kDetect, kDefect, kObject, kLocalize };

std::string_view to_string(AnomalyStatus s);
std::string_view to_string(Protocol p);
std::string_view to_string(SplitTag s);
std::string_view to_string(QaTask t);
// These throw SchemaError on unknown names.
AnomalyStatus parse_anomaly_status(std::string_view s);
Protocol parse_protocol(std::string_view s);
SplitTag parse_split_tag(std::string_view s);
Protocol protocol_of(SplitTag s);

struct ClipRecord {
  std::string clip_id;
  std::string object_category;
  std::string semantic_group;
  AnomalyStatus anomaly_status = AnomalyStatus::kNormal;
  DefectType defect_type = DefectType::kNone;
  std::vector<SplitTag> splits;  // at most one tag per protocol
  IntervalSet gt_intervals;
  double duration_sec = kClipDurationSec;
  int fps = kClipFps;
  std::optional<std::string> frame_root;
  std::optional<bool> verified;  // set by review export

  bool has_split(SplitTag tag) const;
  std::optional<SplitTag> split_for(Protocol p) const;
  int frame_count() const;
};

struct QaOption {
  char letter = 'A';
  std::string label;
  friend bool operator==(const QaOption&, const QaOption&) = default;
};

struct QAInstance {
  std::string qa_id;
  std::string clip_id;
  QaTask task = QaTask::kDetect;
  std::string question_text;
  std::vector<QaOption> options;   // empty for localization
  std::optional<char> gt_letter;   // absent for localization
  IntervalSet gt_intervals;        // only meaningful for localization
};

inline constexpr std::string_view kNoDefectLabel = "no defect";
inline constexpr std::string_view kDetectYesLabel = "Yes, a defect is present.";
inline constexpr std::string_view kDetectNoLabel = "No, the object looks normal.";

struct DistractorPolicy {
  int object_options = 4;  // one correct category plus distractors
  std::uint64_t seed = 0;  // mixed into the per-clip hash
};

// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t stable_hash(std::string_view text);

/// Builds the four QA instances for a clip. Option orders depend only on
/// (clip_id, policy), so repeated calls produce identical output.
std::vector<QAInstance> generate_qa(const ClipRecord& clip, const DistractorPolicy& policy = {});

struct Manifest {
  std::string protocol;
  int fps = kClipFps;
  double duration_sec = kClipDurationSec;
  std::vector<ClipRecord> clips;
  std::vector<std::string> warnings;  // non-fatal findings from loading

  const ClipRecord* find(std::string_view clip_id) const;
};

/// Parses and validates a manifest document. Throws SchemaError or
/// TaxonomyError naming the offending clip_id.
Manifest load_manifest(std::istream& source);
Manifest load_manifest_file(const std::filesystem::path& path);

nlohmann::json clip_to_json(const ClipRecord& clip);
nlohmann::json manifest_to_json(const Manifest& manifest);
nlohmann::json qa_to_json(const QAInstance& qa);

// Published dataset figures the count report compares against.
struct PublishedCounts {
  int total_clips = 4023;
  int normal_clips = 1410;
  int abnormal_clips = 2613;
  int total_qa_pairs = 16092;
  int standard_train = 2913;
  int standard_test = 1101;
  int unseen_train = 2952;
  int unseen_test = 1062;
  int unseen_train_categories = 36;
  int unseen_test_categories = 12;
};

struct CountReport {
  Protocol protocol = Protocol::kStandard;
  int total_clips = 0;
  int normal_clips = 0;
  int abnormal_clips = 0;
  int total_qa_pairs = 0;
  int train_clips = 0;
  int test_clips = 0;
  int untagged_clips = 0;
  int train_qa_pairs = 0;
  int test_qa_pairs = 0;
  int train_categories = 0;
  int test_categories = 0;
  int shared_categories = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

/// Diagnostic comparison of a loaded manifest against the published counts.
/// Mismatches become warnings; this never throws.
CountReport validate_counts(const std::vector<ClipRecord>& clips, Protocol protocol,
                            const PublishedCounts& published = {});

}  // namespace mmviad
