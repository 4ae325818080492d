#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mmviad/dataset.hpp"
#include "mmviad/interval_set.hpp"
#include "mmviad/response_grammar.hpp"

namespace mmviad {

// Where the answer reward reads its letters from.
enum class AnswerExtraction { kLenient, kStrict };

struct RewardWeights {
  double format = 1.0;
  double answer = 1.0;
  double semantic_gate = 1.0;
  double visibility = 1.0;
};

struct RewardConfig {
  double alpha_bon = 0.3;   // discovery bonus
  double alpha_iou = 0.7;
  double alpha_pen = -0.3;  // missed or hallucinated visibility
  double lambda = 0.5;      // interval-count penalty rate
  bool semantic_gate_enabled = true;
  bool flat_iou_mode = false;
  RewardWeights weights;
  double std_epsilon = 1e-8;
  AnswerExtraction answer_extraction = AnswerExtraction::kLenient;

  // Throws ContractError when a constant is out of its allowed range.
  void validate() const;
  nlohmann::json to_json() const;
};

struct GroundTruthBundle {
  char y_ano = 'B';
  char y_def = 'A';
  char y_obj = 'A';
  IntervalSet gt_intervals;
};

// Builds the ground truth from the clip's generated QA instances.
GroundTruthBundle ground_truth_for(const ClipRecord& clip, const DistractorPolicy& policy = {});

enum class VisibilityCase { kBothEmpty, kMissed, kHallucinated, kMatched };
std::string_view to_string(VisibilityCase c);

struct RewardBreakdown {
  int r_fmt = 0;
  int r_ans = 0;
  int r_sg = 0;
  double r_vis = 0.0;
  double total = 0.0;
  VisibilityCase vis_case = VisibilityCase::kBothEmpty;
  std::vector<std::string> diagnostics;

  nlohmann::json to_json() const;
};

int reward_format(const StructuredResponse& resp);
int reward_answer(const AnswerBlock& resp, const GroundTruthBundle& gt);
int reward_semantic_gated(const AnswerBlock& resp, const GroundTruthBundle& gt,
                          const RewardConfig& cfg);

/// Largest single-pair IoU between any predicted and any ground-truth
/// interval. Both sets must be non-empty (ContractError otherwise).
double iou_max(const IntervalSet& pred, const IntervalSet& gt);

VisibilityCase classify_visibility(const IntervalSet& pred, const IntervalSet& gt);

/// Visibility-aware temporal reward. Separates correct abstention, missed
/// and hallucinated visibility from boundary quality; in flat-IoU mode it
/// falls back to plain IoU with 1/0 handling of empty sets.
double reward_visibility(const IntervalSet& pred, const IntervalSet& gt, const RewardConfig& cfg);

RewardBreakdown reward_total(const StructuredResponse& resp, const GroundTruthBundle& gt,
                             const RewardConfig& cfg);

/// (R_i - mean) / max(population std, epsilon). Empty input is a
/// ContractError; a constant group maps to exact zeros.
std::vector<double> group_advantages(std::span<const double> rewards, const RewardConfig& cfg = {});

}  // namespace mmviad
