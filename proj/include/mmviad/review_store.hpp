#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mmviad/dataset.hpp"
#include "mmviad/error.hpp"
#include "mmviad/interval_set.hpp"
#include "mmviad/visibility.hpp"

namespace mmviad {

// A request the review service refuses; `status` is the HTTP status to send.
class RequestError : public DataError {
 public:
  RequestError(int status, const std::string& what) : DataError(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

enum class Verdict { kAccept, kAdjust, kRejectNoVisibility };
std::string_view to_string(Verdict v);
Verdict parse_verdict(std::string_view s);  // throws RequestError(400)

struct ReviewDecision {
  std::string clip_id;
  std::string reviewer_id;
  Verdict verdict = Verdict::kAccept;
  IntervalSet final_intervals;
  std::optional<std::string> note;
  std::string timestamp;  // UTC, ISO 8601
  std::int64_t decision_seq = 0;

  nlohmann::json to_json() const;
  static ReviewDecision from_json(const nlohmann::json& j);

  friend bool operator==(const ReviewDecision&, const ReviewDecision&) = default;
};

// What a reviewer submits; the store fills in sequence number and timestamp.
struct DecisionRequest {
  std::string clip_id;
  std::string reviewer_id;
  Verdict verdict = Verdict::kAccept;
  std::optional<IntervalSet> final_intervals;  // defaults from the verdict when absent
  std::optional<std::string> note;
  std::optional<std::string> timestamp;

  // Body of POST /clips/{id}/decision.
  static DecisionRequest from_json(const std::string& clip_id, const nlohmann::json& body);
};

enum class ReviewStatus { kPending, kDone };
std::string_view to_string(ReviewStatus s);

struct ClipSummary {
  std::string clip_id;
  std::string object_category;
  AnomalyStatus anomaly_status = AnomalyStatus::kNormal;
  IntervalSet candidates;
  ReviewStatus status = ReviewStatus::kPending;
  std::optional<ReviewDecision> latest;

  nlohmann::json to_json() const;
};

struct ClipFilter {
  std::optional<std::string> status;    // "pending" | "done"
  std::optional<std::string> category;  // taxonomy category name
  int page = 1;                         // 1-based
  int page_size = 50;
};

struct ClipPage {
  std::vector<ClipSummary> items;
  int page = 1;
  int page_size = 50;
  int total = 0;

  nlohmann::json to_json() const;
};

struct ReviewStoreOptions {
  std::filesystem::path log_path;
  std::filesystem::path frames_root;  // used when a clip has no frame_root
  std::function<std::string()> clock;  // UTC timestamp source; defaults to the system clock
};

std::string utc_timestamp_now();

/// Reads candidate documents (<clip_id>.json as written by `derive`) from a
/// directory.
std::map<std::string, IntervalSet> load_candidate_dir(const std::filesystem::path& dir);

/// Reads a decision log; a torn final line (crash mid-append) is ignored.
std::vector<ReviewDecision> read_decision_log(const std::filesystem::path& path);

/// Review queue backed by an append-only JSON Lines decision log.
///
/// Queue state is derived from the log: a clip is done once it has at least
/// one decision, and the highest decision_seq wins on export. Reads may run
/// concurrently; submissions serialize on one writer and reach the file
/// before submit() returns.
class ReviewStore {
 public:
  ReviewStore(Manifest manifest, std::map<std::string, IntervalSet> candidates, ReviewStoreOptions options);
  ~ReviewStore();
  ReviewStore(const ReviewStore&) = delete;
  ReviewStore& operator=(const ReviewStore&) = delete;

  /// Pending clips first, each group in clip_id order.
  ClipPage list_clips(const ClipFilter& filter) const;
  ClipSummary get_clip(const std::string& clip_id) const;  // throws RequestError(404)
  IntervalSet candidates(const std::string& clip_id) const;
  std::vector<ReviewDecision> history(const std::string& clip_id) const;

  ReviewDecision submit(const DecisionRequest& request);

  /// Reviewed clips take their latest decision's intervals and are marked
  /// verified; the rest keep their candidates, unverified. `protocol` keeps
  /// only clips tagged for it; empty or "all" keeps every clip.
  Manifest export_manifest(const std::string& protocol) const;

  std::filesystem::path frame_file(const std::string& clip_id, FrameVariant variant, int index) const;

  const Manifest& manifest() const { return manifest_; }
  std::size_t decision_count() const;

 private:
  void apply(ReviewDecision decision);
  const ClipRecord& clip_or_throw(const std::string& clip_id) const;
  ClipSummary summarize(const ClipRecord& clip) const;

  Manifest manifest_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, IntervalSet> candidates_;
  ReviewStoreOptions options_;

  mutable std::shared_mutex mutex_;
  std::map<std::string, std::vector<ReviewDecision>> decisions_;
  std::size_t decision_count_ = 0;
  std::FILE* log_ = nullptr;
};

}  // namespace mmviad
