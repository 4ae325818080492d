#include "mmviad/reward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "mmviad/error.hpp"

namespace mmviad {

using nlohmann::json;

void RewardConfig::validate() const {
  if (!(alpha_iou >= 0.0)) throw ContractError("alpha_iou must be >= 0");
  if (!(lambda >= 0.0)) throw ContractError("lambda must be >= 0");
  if (!(alpha_pen <= 0.0)) throw ContractError("alpha_pen must be <= 0");
  if (!(std_epsilon > 0.0)) throw ContractError("std_epsilon must be > 0");
  for (double w : {weights.format, weights.answer, weights.semantic_gate, weights.visibility}) {
    if (!(w >= 0.0)) throw ContractError("reward weights must be >= 0");
  }
}

json RewardConfig::to_json() const {
  return {{"alpha_bon", alpha_bon},
          {"alpha_iou", alpha_iou},
          {"alpha_pen", alpha_pen},
          {"lambda", lambda},
          {"semantic_gate_enabled", semantic_gate_enabled},
          {"flat_iou_mode", flat_iou_mode},
          {"weights", {weights.format, weights.answer, weights.semantic_gate, weights.visibility}},
          {"std_epsilon", std_epsilon},
          {"answer_extraction", answer_extraction == AnswerExtraction::kLenient ? "lenient" : "strict"}};
}

GroundTruthBundle ground_truth_for(const ClipRecord& clip, const DistractorPolicy& policy) {
  const auto qa = generate_qa(clip, policy);
  GroundTruthBundle gt;
  gt.y_ano = *qa[0].gt_letter;
  gt.y_def = *qa[1].gt_letter;
  gt.y_obj = *qa[2].gt_letter;
  gt.gt_intervals = qa[3].gt_intervals;
  return gt;
}

std::string_view to_string(VisibilityCase c) {
  switch (c) {
    case VisibilityCase::kBothEmpty: return "both_empty";
    case VisibilityCase::kMissed: return "missed";
    case VisibilityCase::kHallucinated: return "hallucinated";
    case VisibilityCase::kMatched: return "matched";
  }
  return "both_empty";
}

json RewardBreakdown::to_json() const {
  return {{"r_fmt", r_fmt},
          {"r_ans", r_ans},
          {"r_sg", r_sg},
          {"r_vis", r_vis},
          {"total", total},
          {"vis_case", mmviad::to_string(vis_case)},
          {"diagnostics", diagnostics}};
}

namespace {

bool matches(const std::optional<char>& pred, char truth) {
  return pred && std::toupper(static_cast<unsigned char>(*pred)) ==
                     std::toupper(static_cast<unsigned char>(truth));
}

}  // namespace

int reward_format(const StructuredResponse& resp) { return resp.format_ok ? 1 : 0; }

int reward_answer(const AnswerBlock& resp, const GroundTruthBundle& gt) {
  return (matches(resp.q1, gt.y_ano) ? 1 : 0) + (matches(resp.q3, gt.y_obj) ? 1 : 0);
}

int reward_semantic_gated(const AnswerBlock& resp, const GroundTruthBundle& gt,
                          const RewardConfig& cfg) {
  if (!matches(resp.q2, gt.y_def)) return 0;
  if (cfg.semantic_gate_enabled && !matches(resp.q1, gt.y_ano)) return 0;
  return 1;
}

double iou_max(const IntervalSet& pred, const IntervalSet& gt) {
  if (pred.empty() || gt.empty()) {
    throw ContractError("iou_max requires non-empty prediction and ground truth");
  }
  double best = 0.0;
  for (const auto& p : pred) {
    for (const auto& g : gt) best = std::max(best, interval_iou(p, g));
  }
  return best;
}

VisibilityCase classify_visibility(const IntervalSet& pred, const IntervalSet& gt) {
  if (pred.empty()) return gt.empty() ? VisibilityCase::kBothEmpty : VisibilityCase::kMissed;
  return gt.empty() ? VisibilityCase::kHallucinated : VisibilityCase::kMatched;
}

double reward_visibility(const IntervalSet& pred, const IntervalSet& gt, const RewardConfig& cfg) {
  const auto c = classify_visibility(pred, gt);
  if (cfg.flat_iou_mode) {
    switch (c) {
      case VisibilityCase::kBothEmpty: return 1.0;
      case VisibilityCase::kMatched: return iou_max(pred, gt);
      default: return 0.0;
    }
  }
  switch (c) {
    case VisibilityCase::kBothEmpty: return 1.0;
    case VisibilityCase::kMissed:
    case VisibilityCase::kHallucinated: return cfg.alpha_pen;
    case VisibilityCase::kMatched: break;
  }
  const double count_gap =
      std::abs(static_cast<double>(pred.size()) - static_cast<double>(gt.size()));
  return cfg.alpha_bon + cfg.alpha_iou * iou_max(pred, gt) * std::exp(-cfg.lambda * count_gap);
}

RewardBreakdown reward_total(const StructuredResponse& resp, const GroundTruthBundle& gt,
                             const RewardConfig& cfg) {
  RewardBreakdown b;
  b.r_fmt = reward_format(resp);
  if (!resp.format_ok) {
    for (const auto& v : resp.violations) {
      b.diagnostics.push_back("format: " + std::string(to_string(v.code)) + " at " +
                              std::to_string(v.location));
    }
  }

  AnswerBlock answers = resp.answer;
  if (cfg.answer_extraction == AnswerExtraction::kStrict && !resp.format_ok) {
    answers = AnswerBlock{};
    b.diagnostics.push_back("answers: strict extraction ignores a malformed response");
  }
  b.r_ans = reward_answer(answers, gt);
  b.r_sg = reward_semantic_gated(answers, gt, cfg);
  if (cfg.semantic_gate_enabled && matches(answers.q2, gt.y_def) && !matches(answers.q1, gt.y_ano)) {
    b.diagnostics.push_back("semantic gate: defect correct but detection wrong");
  }

  // A missing or unparsable q4 counts as "no visible interval".
  const IntervalSet pred = answers.q4.value_or(IntervalSet{});
  if (!answers.q4) b.diagnostics.push_back("q4 missing: treated as empty prediction");
  b.vis_case = classify_visibility(pred, gt.gt_intervals);
  b.r_vis = reward_visibility(pred, gt.gt_intervals, cfg);
  b.diagnostics.push_back("visibility: " + std::string(to_string(b.vis_case)));

  const auto& w = cfg.weights;
  b.total = w.format * b.r_fmt + w.answer * b.r_ans + w.semantic_gate * b.r_sg + w.visibility * b.r_vis;
  return b;
}

std::vector<double> group_advantages(std::span<const double> rewards, const RewardConfig& cfg) {
  if (rewards.empty()) throw ContractError("group_advantages requires at least one reward");
  const double n = static_cast<double>(rewards.size());
  double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  // Second pass removes the rounding residue of the first mean estimate.
  double residue = 0.0;
  for (double r : rewards) residue += r - mean;
  mean += residue / n;
  const bool constant = std::all_of(rewards.begin(), rewards.end(),
                                    [&](double r) { return r == rewards.front(); });
  std::vector<double> out(rewards.size(), 0.0);
  if (constant) return out;

  double ss = 0.0;
  for (double r : rewards) ss += (r - mean) * (r - mean);
  const double stddev = std::sqrt(ss / n);
  const double denom = std::max(stddev, cfg.std_epsilon);
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / denom;
  return out;
}

}  // namespace mmviad
