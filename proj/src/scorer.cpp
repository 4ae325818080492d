#include "mmviad/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "mmviad/error.hpp"
#include "mmviad/reward.hpp"

namespace mmviad {

using nlohmann::json;

double average_of_tasks(double detect, double defect, double loc, double object) {
  return (detect + defect + loc + object) / 4.0;
}

double loc_iou(const IntervalSet& pred, const IntervalSet& gt, LocMetric metric) {
  if (pred.empty() && gt.empty()) return 1.0;
  if (pred.empty() || gt.empty()) return 0.0;
  if (metric == LocMetric::kMaxIou) return iou_max(pred, gt);
  const double uni = union_length(pred, gt);
  return uni > 0.0 ? intersection_length(pred, gt) / uni : 0.0;
}

namespace {

struct Tally {
  int clips = 0;
  int detect = 0;
  int defect = 0;
  int object = 0;
  int loc_clips = 0;
  double loc_sum = 0.0;

  TaskScores scores() const {
    TaskScores s;
    s.n_clips = clips;
    if (clips > 0) {
      s.detect_acc = 100.0 * detect / clips;
      s.defect_acc = 100.0 * defect / clips;
      s.object_acc = 100.0 * object / clips;
    }
    if (loc_clips > 0) s.loc_miou = 100.0 * loc_sum / loc_clips;
    s.avg = average_of_tasks(s.detect_acc, s.defect_acc, s.loc_miou, s.object_acc);
    return s;
  }
};

bool same_letter(const std::optional<char>& pred, char truth) {
  return pred && std::toupper(static_cast<unsigned char>(*pred)) == truth;
}

}  // namespace

ScoreReport score(const std::vector<PredictionRecord>& preds, const std::vector<ClipRecord>& manifest,
                  std::optional<SplitTag> split, const ScoreOptions& opts) {
  std::map<std::string, const ClipRecord*> by_id;
  for (const auto& c : manifest) by_id.emplace(c.clip_id, &c);

  std::map<std::string, const PredictionRecord*> pred_by_id;
  for (const auto& p : preds) {
    if (!by_id.count(p.clip_id)) {
      throw DataError("prediction for unknown clip_id '" + p.clip_id + "'");
    }
    if (!pred_by_id.emplace(p.clip_id, &p).second) {
      throw DataError("duplicate prediction for clip_id '" + p.clip_id + "'");
    }
  }

  ScoreReport report;
  Tally total;
  std::map<std::string, Tally> per_category;
  // Iterate in clip_id order so floating-point sums do not depend on input order.
  for (const auto& [id, clip] : by_id) {
    if (split && !clip->has_split(*split)) continue;
    const auto gt = ground_truth_for(*clip, opts.distractors);
    auto& cat = per_category[clip->object_category];
    ++total.clips;
    ++cat.clips;

    const bool counts_for_loc =
        opts.normal_policy == NormalClipPolicy::kEmptyMatchesEmpty || !gt.gt_intervals.empty();
    if (counts_for_loc) {
      ++total.loc_clips;
      ++cat.loc_clips;
    }

    auto it = pred_by_id.find(id);
    if (it == pred_by_id.end() || !it->second->answers.any()) {
      ++report.n_missing;
      continue;
    }
    ++report.n_scored;
    const auto& a = it->second->answers;
    const int d = same_letter(a.q1, gt.y_ano) ? 1 : 0;
    const int f = same_letter(a.q2, gt.y_def) ? 1 : 0;
    const int o = same_letter(a.q3, gt.y_obj) ? 1 : 0;
    total.detect += d;
    total.defect += f;
    total.object += o;
    cat.detect += d;
    cat.defect += f;
    cat.object += o;
    if (counts_for_loc && a.q4) {
      const double l = loc_iou(*a.q4, gt.gt_intervals, opts.loc_metric);
      total.loc_sum += l;
      cat.loc_sum += l;
    }
  }

  const auto s = total.scores();
  report.detect_acc = s.detect_acc;
  report.defect_acc = s.defect_acc;
  report.loc_miou = s.loc_miou;
  report.object_acc = s.object_acc;
  report.avg = s.avg;
  for (const auto& [name, tally] : per_category) report.per_category[name] = tally.scores();
  return report;
}

namespace {

json scores_json(const TaskScores& s) {
  return {{"detect_acc", s.detect_acc}, {"defect_acc", s.defect_acc}, {"loc_miou", s.loc_miou},
          {"object_acc", s.object_acc}, {"avg", s.avg},               {"n_clips", s.n_clips}};
}

std::optional<char> letter_field(const json& line, const char* key, std::vector<FieldError>& errors) {
  auto it = line.find(key);
  if (it == line.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) {
    const auto text = "<answer><" + std::string(key) + ">" + it->get<std::string>() + "</" + key +
                      "></answer>";
    // Reuse the response parser's letter rules.
    const auto parsed = parse(text, Grammar::kBenchmark).answer;
    const auto& field = std::string(key) == "q1" ? parsed.q1
                        : std::string(key) == "q2" ? parsed.q2
                                                   : parsed.q3;
    if (field) return field;
  }
  errors.push_back({key, "unparsable option letter"});
  return std::nullopt;
}

}  // namespace

json ScoreReport::to_json() const {
  json cats = json::object();
  for (const auto& [name, s] : per_category) cats[name] = scores_json(s);
  return {{"detect_acc", detect_acc}, {"defect_acc", defect_acc}, {"loc_miou", loc_miou},
          {"object_acc", object_acc}, {"avg", avg},               {"n_scored", n_scored},
          {"n_missing", n_missing},   {"per_category", cats}};
}

PredictionRecord prediction_from_json(const json& line, Grammar grammar, const ParseOptions& opts) {
  if (!line.is_object()) throw SchemaError("prediction must be a JSON object");
  auto id = line.find("clip_id");
  if (id == line.end() || !id->is_string()) throw SchemaError("prediction missing string clip_id");

  PredictionRecord rec;
  rec.clip_id = id->get<std::string>();
  if (auto r = line.find("response"); r != line.end()) {
    if (!r->is_string()) throw SchemaError("prediction " + rec.clip_id + ": response must be a string");
    rec.raw_response = r->get<std::string>();
    rec.answers = parse(*rec.raw_response, grammar, opts).answer;
    return rec;
  }
  rec.answers.q1 = letter_field(line, "q1", rec.answers.parse_errors);
  rec.answers.q2 = letter_field(line, "q2", rec.answers.parse_errors);
  rec.answers.q3 = letter_field(line, "q3", rec.answers.parse_errors);
  if (auto q4 = line.find("q4"); q4 != line.end() && !q4->is_null()) {
    const std::string text = q4->is_string() ? q4->get<std::string>() : q4->dump();
    auto parsed = parse_intervals(text, opts.duration_sec);
    if (parsed.value) {
      rec.answers.q4 = std::move(parsed.value);
    } else {
      rec.answers.parse_errors.push_back({"q4", parsed.error});
    }
  }
  return rec;
}

std::vector<PredictionRecord> load_predictions(std::istream& in, Grammar grammar, const ParseOptions& opts) {
  std::vector<PredictionRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(prediction_from_json(json::parse(line), grammar, opts));
    } catch (const json::parse_error& e) {
      throw SchemaError("predictions line " + std::to_string(line_no) + ": " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError("predictions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

double round_half_up_1dp(double value) {
  // The nudge absorbs binary representation error, e.g. 81.075 stored as 81.07499...
  return std::floor(value * 10.0 + 0.5 + 1e-7) / 10.0;
}

std::string format_1dp(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", round_half_up_1dp(value));
  return buf;
}

std::string report_table(const std::map<std::string, ScoreReport>& reports) {
  if (reports.empty()) throw ContractError("report_table needs at least one report");
  std::size_t name_width = 5;
  for (const auto& [name, _] : reports) name_width = std::max(name_width, name.size());

  std::ostringstream out;
  auto cell = [&](const std::string& text, std::size_t width) {
    out << std::string(width > text.size() ? width - text.size() : 0, ' ') << text;
  };
  auto row = [&](const std::string& name, const std::vector<std::string>& cols) {
    out << name << std::string(name_width - name.size(), ' ');
    for (const auto& c : cols) {
      out << "  ";
      cell(c, 7);
    }
    out << '\n';
  };
  row("", {"Defect", "Defect", "Defect", "Object", ""});
  row("Model", {"Detect.", "Class.", "Loc.", "Class.", "Avg."});
  for (const auto& [name, r] : reports) {
    row(name, {format_1dp(r.detect_acc), format_1dp(r.defect_acc), format_1dp(r.loc_miou),
               format_1dp(r.object_acc), format_1dp(r.avg)});
  }
  return out.str();
}

json report_json(const std::map<std::string, ScoreReport>& reports) {
  if (reports.empty()) throw ContractError("report_json needs at least one report");
  json models = json::object();
  for (const auto& [name, r] : reports) {
    auto j = r.to_json();
    j["display"] = {{"detect_acc", format_1dp(r.detect_acc)},
                    {"defect_acc", format_1dp(r.defect_acc)},
                    {"loc_miou", format_1dp(r.loc_miou)},
                    {"object_acc", format_1dp(r.object_acc)},
                    {"avg", format_1dp(r.avg)}};
    models[name] = j;
  }
  return {{"models", models}};
}

}  // namespace mmviad
