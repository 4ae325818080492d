#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmviad/dataset.hpp"
#include "mmviad/response_grammar.hpp"

namespace mmviad {

struct PredictionRecord {
  std::string clip_id;
  AnswerBlock answers;
  std::optional<std::string> raw_response;
};

// set_iou: total overlap over total union. max_iou: best single pair.
enum class LocMetric { kSetIou, kMaxIou };
// Whether normal clips (empty ground truth) take part in the mIoU average.
enum class NormalClipPolicy { kEmptyMatchesEmpty, kExcludeNormal };

struct ScoreOptions {
  LocMetric loc_metric = LocMetric::kSetIou;
  NormalClipPolicy normal_policy = NormalClipPolicy::kEmptyMatchesEmpty;
  DistractorPolicy distractors;
};

// All values are percentages.
struct TaskScores {
  double detect_acc = 0.0;
  double defect_acc = 0.0;
  double loc_miou = 0.0;
  double object_acc = 0.0;
  double avg = 0.0;
  int n_clips = 0;

  friend bool operator==(const TaskScores&, const TaskScores&) = default;
};

struct ScoreReport {
  double detect_acc = 0.0;
  double defect_acc = 0.0;
  double loc_miou = 0.0;
  double object_acc = 0.0;
  double avg = 0.0;
  int n_scored = 0;
  int n_missing = 0;
  std::map<std::string, TaskScores> per_category;

  nlohmann::json to_json() const;
};

// Arithmetic mean of the four task scores.
double average_of_tasks(double detect, double defect, double loc, double object);

/// Per-clip localization score: both empty 1, one side empty 0, otherwise
/// set-IoU (or pairwise max IoU under LocMetric::kMaxIou).
double loc_iou(const IntervalSet& pred, const IntervalSet& gt, LocMetric metric = LocMetric::kSetIou);

/// Scores predictions against the clips of one split (all clips when `split`
/// is empty). Clips without a usable prediction score 0 on every task.
/// Throws DataError for predictions naming unknown or duplicated clips.
ScoreReport score(const std::vector<PredictionRecord>& preds, const std::vector<ClipRecord>& manifest,
                  std::optional<SplitTag> split, const ScoreOptions& opts = {});

/// Reads predictions from JSON Lines. Lines carry either q1..q4 fields or a
/// raw "response" that goes through the response parser.
std::vector<PredictionRecord> load_predictions(std::istream& in, Grammar grammar = Grammar::kStructured,
                                               const ParseOptions& opts = {});

PredictionRecord prediction_from_json(const nlohmann::json& line, Grammar grammar,
                                      const ParseOptions& opts = {});

// Display rounding: half-up at one decimal (57.45 -> 57.5).
double round_half_up_1dp(double value);
std::string format_1dp(double value);

/// Plain-text table with Detect./Class./Loc./Class./Avg columns, one row per
/// model. Throws ContractError on an empty map.
std::string report_table(const std::map<std::string, ScoreReport>& reports);
nlohmann::json report_json(const std::map<std::string, ScoreReport>& reports);

}  // namespace mmviad
