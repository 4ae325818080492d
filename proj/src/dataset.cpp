#include "mmviad/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "mmviad/error.hpp"
#include "mmviad/json_io.hpp"

namespace mmviad {

using nlohmann::json;

std::string_view to_string(AnomalyStatus s) {
  return s == AnomalyStatus::kNormal ? "normal" : "abnormal";
}

std::string_view to_string(Protocol p) { return p == Protocol::kStandard ? "standard" : "unseen"; }

std::string_view to_string(SplitTag s) {
  switch (s) {
    case SplitTag::kStandardTrain: return "standard_train";
    case SplitTag::kStandardTest: return "standard_test";
    case SplitTag::kUnseenTrain: return "unseen_train";
    case SplitTag::kUnseenTest: return "unseen_test";
  }
  return "standard_train";
}

std::string_view to_string(QaTask t) {
  switch (t) {
    case QaTask::kDetect: return "Q1_detect";
    case QaTask::kDefect: return "Q2_defect";
    case QaTask::kObject: return "Q3_object";
    case QaTask::kLocalize: return "Q4_localize";
  }
  return "Q1_detect";
}

AnomalyStatus parse_anomaly_status(std::string_view s) {
  if (s == "normal") return AnomalyStatus::kNormal;
  if (s == "abnormal") return AnomalyStatus::kAbnormal;
  throw SchemaError("unknown anomaly_status '" + std::string(s) + "'");
}

Protocol parse_protocol(std::string_view s) {
  if (s == "standard") return Protocol::kStandard;
  if (s == "unseen") return Protocol::kUnseen;
  throw SchemaError("unknown protocol '" + std::string(s) + "'");
}

SplitTag parse_split_tag(std::string_view s) {
  for (auto tag : {SplitTag::kStandardTrain, SplitTag::kStandardTest, SplitTag::kUnseenTrain,
                   SplitTag::kUnseenTest}) {
    if (to_string(tag) == s) return tag;
  }
  throw SchemaError("unknown split '" + std::string(s) + "'");
}

Protocol protocol_of(SplitTag s) {
  return (s == SplitTag::kStandardTrain || s == SplitTag::kStandardTest) ? Protocol::kStandard
                                                                         : Protocol::kUnseen;
}

bool ClipRecord::has_split(SplitTag tag) const {
  return std::find(splits.begin(), splits.end(), tag) != splits.end();
}

std::optional<SplitTag> ClipRecord::split_for(Protocol p) const {
  for (auto tag : splits) {
    if (protocol_of(tag) == p) return tag;
  }
  return std::nullopt;
}

int ClipRecord::frame_count() const {
  return static_cast<int>(std::lround(duration_sec * fps));
}

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

// Fisher-Yates over mt19937_64 output; std::shuffle's algorithm is
// implementation-defined, which would break cross-platform determinism.
template <typename T>
void stable_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

std::mt19937_64 task_rng(const ClipRecord& clip, std::string_view task, std::uint64_t seed) {
  std::string key = clip.clip_id;
  key += '#';
  key += task;
  return std::mt19937_64(stable_hash(key) ^ seed);
}

std::vector<QaOption> lettered(const std::vector<std::string>& labels) {
  std::vector<QaOption> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.push_back({static_cast<char>('A' + i), labels[i]});
  }
  return out;
}

std::optional<char> letter_of(const std::vector<QaOption>& options, std::string_view label) {
  for (const auto& o : options) {
    if (o.label == label) return o.letter;
  }
  return std::nullopt;
}

std::string render_question(std::string_view stem, const std::vector<QaOption>& options) {
  std::string text(stem);
  text += "\nOptions:";
  for (const auto& o : options) {
    text += " (";
    text += o.letter;
    text += ") ";
    text += o.label;
  }
  return text;
}

}  // namespace

std::vector<QAInstance> generate_qa(const ClipRecord& clip, const DistractorPolicy& policy) {
  const auto& taxonomy = Taxonomy::instance();
  if (!taxonomy.has_category(clip.object_category)) {
    throw TaxonomyError("clip " + clip.clip_id + ": unknown object_category '" +
                        clip.object_category + "'");
  }
  const int n_categories = static_cast<int>(taxonomy.categories().size());
  if (policy.object_options < 2 || policy.object_options > n_categories) {
    throw ContractError("object_options must lie in [2, " + std::to_string(n_categories) + "]");
  }
  const bool abnormal = clip.anomaly_status == AnomalyStatus::kAbnormal;
  const std::string defect_label =
      clip.defect_type == DefectType::kNone ? std::string(kNoDefectLabel)
                                            : std::string(to_string(clip.defect_type));

  std::vector<QAInstance> out(4);

  auto& q1 = out[0];
  q1.qa_id = clip.clip_id + "_q1";
  q1.clip_id = clip.clip_id;
  q1.task = QaTask::kDetect;
  q1.options = {{'A', std::string(kDetectYesLabel)}, {'B', std::string(kDetectNoLabel)}};
  q1.question_text = render_question("Is there a defect or anomaly present in this video?", q1.options);
  q1.gt_letter = abnormal ? 'A' : 'B';

  auto& q2 = out[1];
  q2.qa_id = clip.clip_id + "_q2";
  q2.clip_id = clip.clip_id;
  q2.task = QaTask::kDefect;
  {
    std::vector<std::string> labels;
    for (auto d : kStructuralDefects) labels.emplace_back(to_string(d));
    labels.emplace_back(kNoDefectLabel);
    auto rng = task_rng(clip, "q2", policy.seed);
    stable_shuffle(labels, rng);
    q2.options = lettered(labels);
  }
  q2.question_text = render_question("Which type of structural defect does the object have?", q2.options);
  q2.gt_letter = letter_of(q2.options, defect_label);

  auto& q3 = out[2];
  q3.qa_id = clip.clip_id + "_q3";
  q3.clip_id = clip.clip_id;
  q3.task = QaTask::kObject;
  {
    std::vector<std::string> pool;
    for (const auto& c : taxonomy.categories()) {
      if (c.category != clip.object_category) pool.emplace_back(c.category);
    }
    auto rng = task_rng(clip, "q3", policy.seed);
    stable_shuffle(pool, rng);
    std::vector<std::string> labels(pool.begin(), pool.begin() + (policy.object_options - 1));
    labels.push_back(clip.object_category);
    stable_shuffle(labels, rng);
    q3.options = lettered(labels);
  }
  q3.question_text = render_question("Which object category is shown in the video?", q3.options);
  q3.gt_letter = letter_of(q3.options, clip.object_category);

  auto& q4 = out[3];
  q4.qa_id = clip.clip_id + "_q4";
  q4.clip_id = clip.clip_id;
  q4.task = QaTask::kLocalize;
  q4.question_text =
      "During which time span of the 2-second clip is the anomaly visible? Answer [] if no "
      "anomaly is visible, otherwise [start_sec,end_sec].";
  q4.gt_intervals = clip.gt_intervals;

  return out;
}

const ClipRecord* Manifest::find(std::string_view clip_id) const {
  auto it = std::find_if(clips.begin(), clips.end(),
                         [&](const ClipRecord& c) { return c.clip_id == clip_id; });
  return it == clips.end() ? nullptr : &*it;
}

namespace {

const json& require(const json& obj, const char* key, const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(context + ": missing field '" + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& context) {
  const auto& v = require(obj, key, context);
  if (!v.is_string()) throw SchemaError(context + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

ClipRecord parse_clip(const json& obj, const Manifest& m, std::size_t index,
                      std::vector<std::string>& warnings) {
  if (!obj.is_object()) {
    throw SchemaError("clips[" + std::to_string(index) + "]: expected an object");
  }
  ClipRecord clip;
  clip.clip_id = require_string(obj, "clip_id", "clips[" + std::to_string(index) + "]");
  const std::string ctx = "clip " + clip.clip_id;
  if (clip.clip_id.empty()) throw SchemaError("clips[" + std::to_string(index) + "]: empty clip_id");
  clip.duration_sec = m.duration_sec;
  clip.fps = m.fps;

  try {
    clip.object_category = require_string(obj, "object_category", ctx);
    const auto group = Taxonomy::instance().group_of(clip.object_category);
    if (auto it = obj.find("semantic_group"); it != obj.end()) {
      if (!it->is_string() || it->get<std::string>() != group) {
        throw TaxonomyError(ctx + ": semantic_group does not match category '" +
                            clip.object_category + "' (expected '" + std::string(group) + "')");
      }
    }
    clip.semantic_group = std::string(group);
    clip.anomaly_status = parse_anomaly_status(require_string(obj, "anomaly_status", ctx));
    clip.defect_type = parse_defect_type(require_string(obj, "defect_type", ctx));

    if (auto it = obj.find("split"); it != obj.end()) {
      std::vector<std::string> tags;
      if (it->is_string()) {
        tags.push_back(it->get<std::string>());
      } else if (it->is_array()) {
        for (const auto& t : *it) {
          if (!t.is_string()) throw SchemaError(ctx + ": split tags must be strings");
          tags.push_back(t.get<std::string>());
        }
      } else {
        throw SchemaError(ctx + ": split must be a string or an array of strings");
      }
      for (const auto& t : tags) {
        const auto tag = parse_split_tag(t);
        if (clip.split_for(protocol_of(tag))) {
          throw SchemaError(ctx + ": more than one split tag for protocol " +
                            std::string(to_string(protocol_of(tag))));
        }
        clip.splits.push_back(tag);
      }
    }

    const auto& intervals = require(obj, "gt_intervals", ctx);
    clip.gt_intervals = intervals_from_json(intervals, clip.duration_sec);

    if (auto it = obj.find("frame_root"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) throw SchemaError(ctx + ": frame_root must be a string");
      clip.frame_root = it->get<std::string>();
    }
    if (auto it = obj.find("verified"); it != obj.end() && !it->is_null()) {
      if (!it->is_boolean()) throw SchemaError(ctx + ": verified must be a boolean");
      clip.verified = it->get<bool>();
    }
  } catch (const TaxonomyError& e) {
    const std::string what = e.what();
    throw TaxonomyError(what.rfind(ctx, 0) == 0 ? what : ctx + ": " + what);
  } catch (const DataError& e) {
    const std::string what = e.what();
    throw SchemaError(what.rfind(ctx, 0) == 0 ? what : ctx + ": " + what);
  }

  const bool normal = clip.anomaly_status == AnomalyStatus::kNormal;
  if (normal != (clip.defect_type == DefectType::kNone)) {
    throw SchemaError(ctx + ": anomaly_status '" + std::string(to_string(clip.anomaly_status)) +
                      "' is inconsistent with defect_type '" +
                      std::string(to_string(clip.defect_type)) + "'");
  }
  if (normal && !clip.gt_intervals.empty() && !clip.verified.value_or(false)) {
    throw SchemaError(ctx + ": normal clip carries visible-time intervals");
  }
  if (!normal && clip.gt_intervals.empty() && !clip.verified.value_or(false)) {
    warnings.push_back(ctx + ": abnormal clip has no visible-time interval");
  }
  return clip;
}

}  // namespace

Manifest load_manifest(std::istream& source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("manifest must be a JSON object");

  Manifest m;
  m.protocol = require_string(doc, "protocol", "manifest");
  if (auto it = doc.find("fps"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<int>() <= 0) {
      throw SchemaError("manifest: fps must be a positive integer");
    }
    m.fps = it->get<int>();
  }
  if (auto it = doc.find("duration_sec"); it != doc.end()) {
    if (!it->is_number() || it->get<double>() <= 0.0) {
      throw SchemaError("manifest: duration_sec must be a positive number");
    }
    m.duration_sec = it->get<double>();
  }
  const auto& clips = require(doc, "clips", "manifest");
  if (!clips.is_array()) throw SchemaError("manifest: clips must be an array");

  std::set<std::string> seen;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    auto clip = parse_clip(clips[i], m, i, m.warnings);
    if (!seen.insert(clip.clip_id).second) {
      throw SchemaError("clip " + clip.clip_id + ": duplicate clip_id");
    }
    m.clips.push_back(std::move(clip));
  }

  // Held-out categories must not leak into the unseen training split.
  std::map<std::string, std::string> unseen_train;
  for (const auto& c : m.clips) {
    if (c.has_split(SplitTag::kUnseenTrain)) unseen_train.emplace(c.object_category, c.clip_id);
  }
  for (const auto& c : m.clips) {
    if (c.has_split(SplitTag::kUnseenTest)) {
      if (auto it = unseen_train.find(c.object_category); it != unseen_train.end()) {
        throw SchemaError("clip " + c.clip_id + ": category '" + c.object_category +
                          "' appears in both unseen_train (e.g. " + it->second +
                          ") and unseen_test");
      }
    }
  }
  return m;
}

Manifest load_manifest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest " + path.string());
  return load_manifest(in);
}

json clip_to_json(const ClipRecord& clip) {
  json splits = json::array();
  for (auto tag : clip.splits) splits.push_back(to_string(tag));
  json out = {
      {"clip_id", clip.clip_id},
      {"object_category", clip.object_category},
      {"semantic_group", clip.semantic_group},
      {"anomaly_status", to_string(clip.anomaly_status)},
      {"defect_type", to_string(clip.defect_type)},
      {"split", splits},
      {"gt_intervals", intervals_to_json(clip.gt_intervals)},
  };
  if (clip.frame_root) out["frame_root"] = *clip.frame_root;
  if (clip.verified) out["verified"] = *clip.verified;
  return out;
}

json manifest_to_json(const Manifest& manifest) {
  json clips = json::array();
  for (const auto& c : manifest.clips) clips.push_back(clip_to_json(c));
  return {{"protocol", manifest.protocol},
          {"fps", manifest.fps},
          {"duration_sec", manifest.duration_sec},
          {"clips", clips}};
}

json qa_to_json(const QAInstance& qa) {
  json options = json::array();
  for (const auto& o : qa.options) options.push_back({std::string(1, o.letter), o.label});
  json out = {{"qa_id", qa.qa_id},
              {"clip_id", qa.clip_id},
              {"task", to_string(qa.task)},
              {"question_text", qa.question_text},
              {"options", options}};
  if (qa.gt_letter) out["gt_letter"] = std::string(1, *qa.gt_letter);
  if (qa.task == QaTask::kLocalize) out["gt_intervals"] = intervals_to_json(qa.gt_intervals);
  return out;
}

json CountReport::to_json() const {
  return {{"protocol", mmviad::to_string(protocol)},
          {"total_clips", total_clips},
          {"normal_clips", normal_clips},
          {"abnormal_clips", abnormal_clips},
          {"total_qa_pairs", total_qa_pairs},
          {"train_clips", train_clips},
          {"test_clips", test_clips},
          {"untagged_clips", untagged_clips},
          {"train_qa_pairs", train_qa_pairs},
          {"test_qa_pairs", test_qa_pairs},
          {"train_categories", train_categories},
          {"test_categories", test_categories},
          {"shared_categories", shared_categories},
          {"warnings", warnings}};
}

namespace {

void compare(std::vector<std::string>& warnings, const std::string& what, int observed,
             int published) {
  if (observed != published) {
    warnings.push_back(what + ": observed " + std::to_string(observed) + ", published " +
                       std::to_string(published));
  }
}

}  // namespace

CountReport validate_counts(const std::vector<ClipRecord>& clips, Protocol protocol,
                            const PublishedCounts& published) {
  CountReport r;
  r.protocol = protocol;
  std::set<std::string> train_cats;
  std::set<std::string> test_cats;
  for (const auto& c : clips) {
    ++r.total_clips;
    if (c.anomaly_status == AnomalyStatus::kNormal) {
      ++r.normal_clips;
    } else {
      ++r.abnormal_clips;
    }
    const auto tag = c.split_for(protocol);
    if (!tag) {
      ++r.untagged_clips;
    } else if (*tag == SplitTag::kStandardTrain || *tag == SplitTag::kUnseenTrain) {
      ++r.train_clips;
      train_cats.insert(c.object_category);
    } else {
      ++r.test_clips;
      test_cats.insert(c.object_category);
    }
  }
  r.total_qa_pairs = 4 * r.total_clips;
  r.train_qa_pairs = 4 * r.train_clips;
  r.test_qa_pairs = 4 * r.test_clips;
  r.train_categories = static_cast<int>(train_cats.size());
  r.test_categories = static_cast<int>(test_cats.size());
  for (const auto& c : train_cats) r.shared_categories += static_cast<int>(test_cats.count(c));

  auto& w = r.warnings;
  compare(w, "total clips", r.total_clips, published.total_clips);
  compare(w, "normal clips", r.normal_clips, published.normal_clips);
  compare(w, "abnormal clips", r.abnormal_clips, published.abnormal_clips);
  compare(w, "QA pairs", r.total_qa_pairs, published.total_qa_pairs);
  if (protocol == Protocol::kStandard) {
    compare(w, "standard train clips", r.train_clips, published.standard_train);
    compare(w, "standard test clips", r.test_clips, published.standard_test);
  } else {
    compare(w, "unseen train clips", r.train_clips, published.unseen_train);
    compare(w, "unseen test clips", r.test_clips, published.unseen_test);
    compare(w, "unseen train categories", r.train_categories, published.unseen_train_categories);
    compare(w, "unseen test categories", r.test_categories, published.unseen_test_categories);
    if (r.shared_categories > 0) {
      w.push_back("unseen protocol: " + std::to_string(r.shared_categories) +
                  " categories appear in both train and test");
    }
  }
  const int split_sum = r.train_clips + r.test_clips;
  if (split_sum != published.total_clips && r.untagged_clips == 0) {
    w.push_back("split sum " + std::to_string(split_sum) + " differs from published total " +
                std::to_string(published.total_clips));
  }
  if (r.untagged_clips > 0) {
    w.push_back(std::to_string(r.untagged_clips) + " clips carry no " +
                std::string(to_string(protocol)) + " split tag");
  }
  return r;
}

}  // namespace mmviad
