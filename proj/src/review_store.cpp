#include "mmviad/review_store.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include "mmviad/json_io.hpp"

namespace mmviad {

using nlohmann::json;

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kAccept: return "accept";
    case Verdict::kAdjust: return "adjust";
    case Verdict::kRejectNoVisibility: return "reject_no_visibility";
  }
  return "accept";
}

Verdict parse_verdict(std::string_view s) {
  if (s == "accept") return Verdict::kAccept;
  if (s == "adjust") return Verdict::kAdjust;
  if (s == "reject_no_visibility") return Verdict::kRejectNoVisibility;
  throw RequestError(400, "unknown verdict '" + std::string(s) + "'");
}

std::string_view to_string(ReviewStatus s) { return s == ReviewStatus::kDone ? "done" : "pending"; }

json ReviewDecision::to_json() const {
  json j = {{"clip_id", clip_id},
            {"reviewer_id", reviewer_id},
            {"verdict", mmviad::to_string(verdict)},
            {"final_intervals", intervals_to_json(final_intervals)},
            {"timestamp", timestamp},
            {"decision_seq", decision_seq}};
  if (note) j["note"] = *note;
  return j;
}

ReviewDecision ReviewDecision::from_json(const json& j) {
  try {
    ReviewDecision d;
    d.clip_id = j.at("clip_id").get<std::string>();
    d.reviewer_id = j.at("reviewer_id").get<std::string>();
    d.verdict = parse_verdict(j.at("verdict").get<std::string>());
    d.final_intervals = intervals_from_json(j.at("final_intervals"));
    if (auto it = j.find("note"); it != j.end() && !it->is_null()) d.note = it->get<std::string>();
    d.timestamp = j.at("timestamp").get<std::string>();
    d.decision_seq = j.at("decision_seq").get<std::int64_t>();
    return d;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed decision record: ") + e.what());
  }
}

DecisionRequest DecisionRequest::from_json(const std::string& clip_id, const json& body) {
  if (!body.is_object()) throw RequestError(400, "decision body must be a JSON object");
  DecisionRequest r;
  r.clip_id = clip_id;
  if (auto it = body.find("clip_id"); it != body.end() && (!it->is_string() || *it != clip_id)) {
    throw RequestError(400, "clip_id in body does not match the URL");
  }
  auto reviewer = body.find("reviewer_id");
  if (reviewer == body.end() || !reviewer->is_string()) {
    throw RequestError(400, "reviewer_id must be a string");
  }
  r.reviewer_id = reviewer->get<std::string>();
  auto verdict = body.find("verdict");
  if (verdict == body.end() || !verdict->is_string()) throw RequestError(400, "verdict must be a string");
  r.verdict = parse_verdict(verdict->get<std::string>());
  if (auto it = body.find("final_intervals"); it != body.end() && !it->is_null()) {
    try {
      r.final_intervals = intervals_from_json(*it);
    } catch (const DataError& e) {
      throw RequestError(400, std::string("invalid final_intervals: ") + e.what());
    }
  }
  if (auto it = body.find("note"); it != body.end() && !it->is_null()) {
    if (!it->is_string()) throw RequestError(400, "note must be a string");
    r.note = it->get<std::string>();
  }
  if (auto it = body.find("timestamp"); it != body.end() && !it->is_null()) {
    if (!it->is_string()) throw RequestError(400, "timestamp must be a string");
    r.timestamp = it->get<std::string>();
  }
  return r;
}

json ClipSummary::to_json() const {
  json j = {{"clip_id", clip_id},
            {"object_category", object_category},
            {"anomaly_status", mmviad::to_string(anomaly_status)},
            {"candidates", intervals_to_json(candidates)},
            {"status", mmviad::to_string(status)}};
  j["latest_decision"] = latest ? latest->to_json() : json(nullptr);
  return j;
}

json ClipPage::to_json() const {
  json items_json = json::array();
  for (const auto& s : items) items_json.push_back(s.to_json());
  return {{"items", items_json}, {"page", page}, {"page_size", page_size}, {"total", total}};
}

std::string utc_timestamp_now() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

std::map<std::string, IntervalSet> load_candidate_dir(const std::filesystem::path& dir) {
  std::map<std::string, IntervalSet> out;
  if (!std::filesystem::is_directory(dir)) throw DataError("candidate directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    json doc;
    try {
      doc = json::parse(read_file(entry.path()));
      out[doc.at("clip_id").get<std::string>()] = intervals_from_json(doc.at("candidates"));
    } catch (const json::exception& e) {
      throw SchemaError(entry.path().string() + ": " + e.what());
    } catch (const DataError& e) {
      throw SchemaError(entry.path().string() + ": " + e.what());
    }
  }
  return out;
}

std::vector<ReviewDecision> read_decision_log(const std::filesystem::path& path) {
  std::vector<ReviewDecision> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    const bool torn = nl == std::string::npos;
    const std::string line = content.substr(pos, torn ? std::string::npos : nl - pos);
    pos = torn ? content.size() : nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      if (torn) break;  // partial append from an interrupted write
      throw SchemaError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(ReviewDecision::from_json(j));
  }
  return out;
}

ReviewStore::ReviewStore(Manifest manifest, std::map<std::string, IntervalSet> candidates,
                         ReviewStoreOptions options)
    : manifest_(std::move(manifest)), options_(std::move(options)) {
  if (!options_.clock) options_.clock = utc_timestamp_now;
  for (std::size_t i = 0; i < manifest_.clips.size(); ++i) index_[manifest_.clips[i].clip_id] = i;
  for (const auto& clip : manifest_.clips) {
    auto it = candidates.find(clip.clip_id);
    candidates_[clip.clip_id] = it != candidates.end() ? it->second : clip.gt_intervals;
  }

  for (auto& d : read_decision_log(options_.log_path)) {
    if (!index_.count(d.clip_id)) {
      throw SchemaError("decision log references unknown clip '" + d.clip_id + "'");
    }
    const auto& hist = decisions_[d.clip_id];
    if (!hist.empty() && d.decision_seq <= hist.back().decision_seq) {
      throw SchemaError("decision log: decision_seq does not increase for clip '" + d.clip_id + "'");
    }
    apply(std::move(d));
  }

  // Drop a torn tail so new appends start on a fresh line.
  if (std::filesystem::exists(options_.log_path)) {
    const auto content = read_file(options_.log_path);
    if (!content.empty() && content.back() != '\n') {
      const auto cut = content.rfind('\n');
      std::filesystem::resize_file(options_.log_path, cut == std::string::npos ? 0 : cut + 1);
    }
  }
  log_ = std::fopen(options_.log_path.c_str(), "ab");
  if (log_ == nullptr) throw DataError("cannot open decision log " + options_.log_path.string());
}

ReviewStore::~ReviewStore() {
  if (log_ != nullptr) std::fclose(log_);
}

void ReviewStore::apply(ReviewDecision decision) {
  decisions_[decision.clip_id].push_back(std::move(decision));
  ++decision_count_;
}

const ClipRecord& ReviewStore::clip_or_throw(const std::string& clip_id) const {
  auto it = index_.find(clip_id);
  if (it == index_.end()) throw RequestError(404, "unknown clip '" + clip_id + "'");
  return manifest_.clips[it->second];
}

ClipSummary ReviewStore::summarize(const ClipRecord& clip) const {
  ClipSummary s;
  s.clip_id = clip.clip_id;
  s.object_category = clip.object_category;
  s.anomaly_status = clip.anomaly_status;
  s.candidates = candidates_.at(clip.clip_id);
  if (auto it = decisions_.find(clip.clip_id); it != decisions_.end() && !it->second.empty()) {
    s.status = ReviewStatus::kDone;
    s.latest = it->second.back();
  }
  return s;
}

ClipPage ReviewStore::list_clips(const ClipFilter& filter) const {
  if (filter.status && *filter.status != "pending" && *filter.status != "done") {
    throw RequestError(400, "unknown status filter '" + *filter.status + "'");
  }
  if (filter.category && !Taxonomy::instance().has_category(*filter.category)) {
    throw RequestError(400, "unknown category filter '" + *filter.category + "'");
  }
  if (filter.page < 1 || filter.page_size < 1) throw RequestError(400, "page and page_size must be >= 1");

  std::shared_lock lock(mutex_);
  std::vector<ClipSummary> pending;
  std::vector<ClipSummary> done;
  for (const auto& [id, idx] : index_) {
    const auto& clip = manifest_.clips[idx];
    if (filter.category && clip.object_category != *filter.category) continue;
    auto s = summarize(clip);
    if (filter.status && to_string(s.status) != *filter.status) continue;
    (s.status == ReviewStatus::kPending ? pending : done).push_back(std::move(s));
  }
  pending.insert(pending.end(), std::make_move_iterator(done.begin()), std::make_move_iterator(done.end()));

  ClipPage page;
  page.page = filter.page;
  page.page_size = filter.page_size;
  page.total = static_cast<int>(pending.size());
  const std::size_t first = static_cast<std::size_t>(filter.page - 1) * filter.page_size;
  for (std::size_t i = first; i < pending.size() && i < first + filter.page_size; ++i) {
    page.items.push_back(std::move(pending[i]));
  }
  return page;
}

ClipSummary ReviewStore::get_clip(const std::string& clip_id) const {
  const auto& clip = clip_or_throw(clip_id);
  std::shared_lock lock(mutex_);
  return summarize(clip);
}

IntervalSet ReviewStore::candidates(const std::string& clip_id) const {
  clip_or_throw(clip_id);
  return candidates_.at(clip_id);
}

std::vector<ReviewDecision> ReviewStore::history(const std::string& clip_id) const {
  clip_or_throw(clip_id);
  std::shared_lock lock(mutex_);
  auto it = decisions_.find(clip_id);
  return it == decisions_.end() ? std::vector<ReviewDecision>{} : it->second;
}

ReviewDecision ReviewStore::submit(const DecisionRequest& request) {
  const auto& clip = clip_or_throw(request.clip_id);
  if (request.reviewer_id.empty()) throw RequestError(400, "reviewer_id must not be empty");
  const auto& candidates = candidates_.at(clip.clip_id);

  ReviewDecision d;
  d.clip_id = request.clip_id;
  d.reviewer_id = request.reviewer_id;
  d.verdict = request.verdict;
  d.note = request.note;
  switch (request.verdict) {
    case Verdict::kAccept:
      if (request.final_intervals && !(*request.final_intervals == candidates)) {
        throw RequestError(400, "accept must keep the candidate intervals");
      }
      d.final_intervals = candidates;
      break;
    case Verdict::kAdjust:
      if (!request.final_intervals) throw RequestError(400, "adjust requires final_intervals");
      if (*request.final_intervals == candidates) {
        throw RequestError(400, "adjust must change the candidate intervals");
      }
      d.final_intervals = *request.final_intervals;
      break;
    case Verdict::kRejectNoVisibility:
      if (request.final_intervals && !request.final_intervals->empty()) {
        throw RequestError(400, "reject_no_visibility requires empty final_intervals");
      }
      break;
  }
  // Re-validate against this clip's duration.
  try {
    d.final_intervals = IntervalSet::normalized(d.final_intervals.intervals(), clip.duration_sec);
  } catch (const DataError& e) {
    throw RequestError(400, e.what());
  }

  std::unique_lock lock(mutex_);
  const auto& hist = decisions_[d.clip_id];
  d.decision_seq = hist.empty() ? 1 : hist.back().decision_seq + 1;
  d.timestamp = request.timestamp.value_or(options_.clock());
  const std::string line = d.to_json().dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() || std::fflush(log_) != 0 ||
      ::fsync(::fileno(log_)) != 0) {
    throw DataError("failed to append to decision log " + options_.log_path.string());
  }
  apply(d);
  return d;
}

Manifest ReviewStore::export_manifest(const std::string& protocol) const {
  std::optional<Protocol> keep;
  if (!protocol.empty() && protocol != "all") {
    try {
      keep = parse_protocol(protocol);
    } catch (const SchemaError& e) {
      throw RequestError(400, e.what());
    }
  }
  Manifest out;
  out.protocol = protocol.empty() ? manifest_.protocol : protocol;
  out.fps = manifest_.fps;
  out.duration_sec = manifest_.duration_sec;

  std::shared_lock lock(mutex_);
  for (const auto& [id, idx] : index_) {
    auto clip = manifest_.clips[idx];
    if (keep && !clip.split_for(*keep)) continue;
    auto it = decisions_.find(id);
    if (it != decisions_.end() && !it->second.empty()) {
      clip.gt_intervals = it->second.back().final_intervals;
      clip.verified = true;
    } else {
      clip.gt_intervals = candidates_.at(id);
      clip.verified = false;
    }
    out.clips.push_back(std::move(clip));
  }
  return out;
}

std::filesystem::path ReviewStore::frame_file(const std::string& clip_id, FrameVariant variant, int index) const {
  const auto& clip = clip_or_throw(clip_id);
  if (index < 0 || index >= clip.frame_count()) {
    throw RequestError(400, "frame index " + std::to_string(index) + " outside [0, " +
                                std::to_string(clip.frame_count() - 1) + "]");
  }
  std::filesystem::path dir = options_.frames_root / clip_id;
  if (clip.frame_root) {
    const std::filesystem::path root(*clip.frame_root);
    dir = root.is_absolute() ? root : options_.frames_root / root;
  }
  return frame_path(dir, variant, index);
}

std::size_t ReviewStore::decision_count() const {
  std::shared_lock lock(mutex_);
  return decision_count_;
}

}  // namespace mmviad
