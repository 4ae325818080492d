#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <pthread.h>
#include <signal.h>

#include "mmviad/dataset.hpp"
#include "mmviad/error.hpp"
#include "mmviad/json_io.hpp"
#include "mmviad/response_grammar.hpp"
#include "mmviad/review_server.hpp"
#include "mmviad/review_store.hpp"
#include "mmviad/reward.hpp"
#include "mmviad/scorer.hpp"
#include "mmviad/version.hpp"
#include "mmviad/visibility.hpp"

namespace mmviad::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kConfigEnv = "MMVIAD_CONFIG";

struct Settings {
  RewardConfig reward;
  DiffParams diff;
  DistractorPolicy qa;
  Grammar grammar = Grammar::kStructured;
  std::size_t max_length = 64 * 1024;

  json to_json() const {
    return {{"reward", reward.to_json()},
            {"diff", diff.to_json()},
            {"qa", {{"object_options", qa.object_options}, {"seed", qa.seed}}},
            {"grammar", to_string(grammar)},
            {"max_length", max_length}};
  }
  ParseOptions parse_options() const {
    ParseOptions o;
    o.max_length = max_length;
    return o;
  }
};

void apply_config_file(Settings& s, const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw SchemaError("config " + path.string() + ": " + e.what());
  }
  try {
    if (auto r = doc.find("reward"); r != doc.end()) {
      auto& c = s.reward;
      c.alpha_bon = r->value("alpha_bon", c.alpha_bon);
      c.alpha_iou = r->value("alpha_iou", c.alpha_iou);
      c.alpha_pen = r->value("alpha_pen", c.alpha_pen);
      c.lambda = r->value("lambda", c.lambda);
      c.semantic_gate_enabled = r->value("semantic_gate_enabled", c.semantic_gate_enabled);
      c.flat_iou_mode = r->value("flat_iou_mode", c.flat_iou_mode);
      c.std_epsilon = r->value("std_epsilon", c.std_epsilon);
      if (auto w = r->find("weights"); w != r->end()) {
        const auto v = w->get<std::vector<double>>();
        if (v.size() != 4) throw SchemaError("config: reward.weights needs four values");
        c.weights = {v[0], v[1], v[2], v[3]};
      }
      if (auto a = r->find("answer_extraction"); a != r->end()) {
        c.answer_extraction = a->get<std::string>() == "strict" ? AnswerExtraction::kStrict
                                                                : AnswerExtraction::kLenient;
      }
    }
    if (auto d = doc.find("diff"); d != doc.end()) s.diff = DiffParams::from_json(*d);
    if (auto q = doc.find("qa"); q != doc.end()) {
      s.qa.object_options = q->value("object_options", s.qa.object_options);
      s.qa.seed = q->value("seed", s.qa.seed);
    }
    if (auto g = doc.find("grammar"); g != doc.end()) s.grammar = parse_grammar(g->get<std::string>());
  } catch (const json::exception& e) {
    throw SchemaError("config " + path.string() + ": " + e.what());
  }
}

std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ContractError("--weights expects four comma-separated numbers");
    }
  }
  if (out.size() != 4) throw ContractError("--weights expects four comma-separated numbers");
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

// Writes to `path`, or to `fallback` when the path is empty or "-".
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw DataError("cannot write " + path);
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

json versioned(json body, const Settings& s) {
  body["tool_version"] = kToolVersion;
  body["config"] = s.to_json();
  return body;
}

json violations_json(const std::vector<ViolationCode>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back({{"code", to_string(v.code)}, {"location", v.location}});
  return out;
}

std::optional<SplitTag> parse_split_arg(const std::string& s) {
  if (s.empty() || s == "all") return std::nullopt;
  return parse_split_tag(s);
}

std::map<std::string, IntervalSet> candidates_or_empty(const std::string& dir) {
  if (dir.empty()) return {};
  return load_candidate_dir(dir);
}

// Stops the server on SIGINT/SIGTERM. The signals are blocked before the
// server spawns its workers so only the waiting thread receives them.
void stop_on_signal(ReviewServer& server) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread([set, &server] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  }).detach();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings settings;
  CLI::App app{"Multi-view video anomaly QA toolkit: rewards, scoring, visibility annotation."};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string config_path;
  app.add_option("--config", config_path, std::string("JSON config file (default: $") + kConfigEnv + ")");

  // Shared option targets.
  std::string manifest_path;
  std::string output_path;
  std::string grammar_name = "structured";
  int object_options = 4;
  std::uint64_t seed = 0;

  auto add_qa_options = [&](CLI::App* cmd) {
    cmd->add_option("--object-options", object_options, "options per object question (1 correct + distractors)");
    cmd->add_option("--seed", seed, "seed mixed into the per-clip option shuffles");
  };
  auto add_grammar = [&](CLI::App* cmd) {
    cmd->add_option("--grammar", grammar_name, "response grammar: structured | benchmark")
        ->check(CLI::IsMember({"structured", "benchmark"}));
  };

  // gen-qa
  auto* gen = app.add_subcommand("gen-qa", "generate the four QA instances per clip as JSON Lines");
  gen->add_option("--manifest", manifest_path, "manifest JSON")->required();
  gen->add_option("--out", output_path, "output JSONL (default stdout)");
  add_qa_options(gen);

  // validate
  std::string protocol_name = "standard";
  auto* validate = app.add_subcommand("validate", "validate a manifest and compare counts with published figures");
  validate->add_option("--manifest", manifest_path, "manifest JSON")->required();
  validate->add_option("--protocol", protocol_name, "standard | unseen")
      ->check(CLI::IsMember({"standard", "unseen"}));
  validate->add_option("--out", output_path, "report JSON (default stdout)");

  // filter-traces
  std::string input_path;
  std::string kept_path;
  std::string rejected_path;
  auto* filter = app.add_subcommand("filter-traces", "keep SFT traces that satisfy the response grammar");
  filter->add_option("--input", input_path, "JSONL of {\"response\": ...} or bare strings")->required();
  filter->add_option("--kept", kept_path, "kept traces, lines copied verbatim")->required();
  filter->add_option("--rejected", rejected_path, "rejected traces with violation codes")->required();
  filter->add_option("--out", output_path, "summary JSON (default stdout)");
  add_grammar(filter);

  // reward
  std::string groups_path;
  bool no_gate = false;
  bool flat_iou = false;
  bool strict_answers = false;
  std::string weights_text;
  double alpha_bon = 0, alpha_iou = 0, alpha_pen = 0, lambda = 0;
  auto* reward = app.add_subcommand("reward", "score rollout groups and compute group-relative advantages");
  reward->add_option("--groups", groups_path, "JSONL of {group_id, clip_id, responses}")->required();
  reward->add_option("--manifest", manifest_path, "manifest JSON with ground truth")->required();
  reward->add_option("--out", output_path, "output JSONL (default stdout)");
  reward->add_flag("--no-semantic-gate", no_gate, "reward defect answers without requiring correct detection");
  reward->add_flag("--flat-iou", flat_iou, "replace the visibility-aware reward with flat IoU");
  reward->add_flag("--strict-answers", strict_answers, "ignore answers of responses that fail the format check");
  auto* weights_opt = reward->add_option("--weights", weights_text, "w_fmt,w_ans,w_sg,w_vis");
  auto* bon_opt = reward->add_option("--alpha-bon", alpha_bon, "discovery bonus");
  auto* iou_opt = reward->add_option("--alpha-iou", alpha_iou, "IoU weight");
  auto* pen_opt = reward->add_option("--alpha-pen", alpha_pen, "missed/hallucinated penalty (<= 0)");
  auto* lambda_opt = reward->add_option("--lambda", lambda, "interval-count penalty rate");
  add_grammar(reward);
  add_qa_options(reward);

  // advantages
  auto* adv = app.add_subcommand("advantages", "group-relative advantages for precomputed rewards");
  adv->add_option("--input", input_path, "JSONL of {group_id, rewards: [...]}")->required();
  adv->add_option("--out", output_path, "output JSONL (default stdout)");

  // score
  std::vector<std::string> pred_paths;
  std::vector<std::string> model_names;
  std::string split_name = "all";
  std::string json_path;
  std::string loc_metric = "set";
  bool exclude_normal = false;
  auto* score_cmd = app.add_subcommand("score", "score prediction files against the manifest");
  score_cmd->add_option("--manifest", manifest_path, "manifest JSON")->required();
  score_cmd->add_option("--preds", pred_paths, "prediction JSONL (repeatable)")->required();
  score_cmd->add_option("--name", model_names, "model name per --preds (default: file stem)");
  score_cmd->add_option("--protocol", split_name,
                        "split to score: standard_train | standard_test | unseen_train | unseen_test | all");
  score_cmd->add_option("--json", json_path, "also write the JSON report here");
  score_cmd->add_option("--loc-metric", loc_metric, "set | max")->check(CLI::IsMember({"set", "max"}));
  score_cmd->add_flag("--exclude-normal-loc", exclude_normal, "leave normal clips out of the mIoU average");
  add_grammar(score_cmd);
  add_qa_options(score_cmd);

  // derive
  std::string frames_root;
  std::string out_dir;
  std::vector<std::string> clip_filter;
  auto* derive = app.add_subcommand("derive", "derive candidate visible-time intervals from marked/unmarked frames");
  derive->add_option("--frames", frames_root, "root holding <clip_id>/{unmarked,marked}/frame_NNNN.png")->required();
  derive->add_option("--out", out_dir, "directory for <clip_id>.json candidate documents")->required();
  derive->add_option("--clip", clip_filter, "only these clip ids (repeatable)");
  int channel_threshold = 0, red_delta = 0, area_threshold = 0, gap_fill = 0, min_frames = 0, downscale = 0;
  auto* ch_opt = derive->add_option("--channel-threshold", channel_threshold);
  auto* rd_opt = derive->add_option("--red-delta", red_delta);
  auto* area_opt = derive->add_option("--area-threshold", area_threshold);
  auto* gap_opt = derive->add_option("--gap-fill", gap_fill);
  auto* min_opt = derive->add_option("--min-frames", min_frames);
  auto* ds_opt = derive->add_option("--downscale", downscale);

  // serve
  std::string candidates_dir;
  std::string log_path;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui_dir;
  auto* serve = app.add_subcommand("serve", "run the local review service");
  serve->add_option("--manifest", manifest_path, "manifest JSON")->required();
  serve->add_option("--candidates", candidates_dir, "directory of candidate documents");
  serve->add_option("--log", log_path, "append-only decision log (JSONL)")->required();
  serve->add_option("--frames", frames_root, "frame root directory");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port (0 picks a free one)");
  serve->add_option("--ui", ui_dir, "static review UI bundle served at /");

  // export-manifest
  std::string export_protocol;
  auto* exp = app.add_subcommand("export-manifest", "fold the decision log into a verified manifest");
  exp->add_option("--manifest", manifest_path, "manifest JSON")->required();
  exp->add_option("--candidates", candidates_dir, "directory of candidate documents");
  exp->add_option("--log", log_path, "decision log (JSONL)")->required();
  exp->add_option("--protocol", export_protocol, "standard | unseen | all");
  exp->add_option("--out", output_path, "output manifest (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') config_path = env;
    }
    if (!config_path.empty()) apply_config_file(settings, config_path);

    auto& cmd = *app.get_subcommands().front();
    auto given = [&cmd](const std::string& name) {
      const auto* opt = cmd.get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };
    if (given("--object-options")) settings.qa.object_options = object_options;
    if (given("--seed")) settings.qa.seed = seed;
    if (given("--grammar")) settings.grammar = parse_grammar(grammar_name);
    if (no_gate) settings.reward.semantic_gate_enabled = false;
    if (flat_iou) settings.reward.flat_iou_mode = true;
    if (strict_answers) settings.reward.answer_extraction = AnswerExtraction::kStrict;
    if (weights_opt->count() > 0) {
      const auto w = parse_weights(weights_text);
      settings.reward.weights = {w[0], w[1], w[2], w[3]};
    }
    if (bon_opt->count() > 0) settings.reward.alpha_bon = alpha_bon;
    if (iou_opt->count() > 0) settings.reward.alpha_iou = alpha_iou;
    if (pen_opt->count() > 0) settings.reward.alpha_pen = alpha_pen;
    if (lambda_opt->count() > 0) settings.reward.lambda = lambda;
    if (ch_opt->count() > 0) settings.diff.channel_threshold = channel_threshold;
    if (rd_opt->count() > 0) settings.diff.red_dominance_delta = red_delta;
    if (area_opt->count() > 0) settings.diff.area_threshold = area_threshold;
    if (gap_opt->count() > 0) settings.diff.gap_fill_frames = gap_fill;
    if (min_opt->count() > 0) settings.diff.min_interval_frames = min_frames;
    if (ds_opt->count() > 0) settings.diff.downscale_factor = downscale;
    settings.reward.validate();
    settings.diff.validate();

    err << "mmviad " << kToolVersion << " " << cmd.get_name() << " effective config: " << settings.to_json().dump()
        << "\n";

    if (gen->parsed()) {
      const auto manifest = load_manifest_file(manifest_path);
      Output sink(output_path, out);
      for (const auto& clip : manifest.clips) {
        for (const auto& qa : generate_qa(clip, settings.qa)) {
          auto line = qa_to_json(qa);
          line["tool_version"] = kToolVersion;
          line["qa_config"] = settings.to_json()["qa"];
          *sink << line.dump() << "\n";
        }
      }
      return kOk;
    }

    if (validate->parsed()) {
      const auto manifest = load_manifest_file(manifest_path);
      const auto report = validate_counts(manifest.clips, parse_protocol(protocol_name));
      for (const auto& w : manifest.warnings) err << "warning: " << w << "\n";
      for (const auto& w : report.warnings) err << "warning: " << w << "\n";
      auto body = report.to_json();
      body["load_warnings"] = manifest.warnings;
      Output sink(output_path, out);
      *sink << versioned(body, settings).dump(2) << "\n";
      return kOk;
    }

    if (filter->parsed()) {
      auto in = open_input(input_path);
      std::ofstream kept(kept_path, std::ios::binary | std::ios::trunc);
      std::ofstream rejected(rejected_path, std::ios::binary | std::ios::trunc);
      if (!kept || !rejected) throw DataError("cannot write filter outputs");
      std::size_t n_kept = 0;
      std::size_t n_rejected = 0;
      std::map<std::string, std::size_t> by_code;
      std::string line;
      int line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
          j = json::parse(line);
        } catch (const json::parse_error& e) {
          throw SchemaError(input_path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        std::string trace;
        if (j.is_string()) {
          trace = j.get<std::string>();
        } else if (j.is_object() && j.contains("response") && j["response"].is_string()) {
          trace = j["response"].get<std::string>();
        } else if (j.is_object() && j.contains("trace") && j["trace"].is_string()) {
          trace = j["trace"].get<std::string>();
        } else {
          throw SchemaError(input_path + " line " + std::to_string(line_no) +
                            ": expected a string or an object with \"response\"");
        }
        const auto result = filter_sft_traces({trace}, settings.grammar, settings.parse_options());
        if (!result.kept.empty()) {
          kept << line << "\n";
          ++n_kept;
        } else {
          const auto& r = result.rejected.front();
          for (const auto& v : r.violations) ++by_code[std::string(to_string(v.code))];
          rejected << json{{"line", line_no}, {"violations", violations_json(r.violations)}, {"input", j}}.dump()
                   << "\n";
          ++n_rejected;
        }
      }
      Output sink(output_path, out);
      *sink << versioned({{"kept", n_kept}, {"rejected", n_rejected}, {"violation_counts", by_code}}, settings)
                   .dump(2)
            << "\n";
      return kOk;
    }

    if (reward->parsed()) {
      const auto manifest = load_manifest_file(manifest_path);
      auto in = open_input(groups_path);
      Output sink(output_path, out);
      std::map<std::string, GroundTruthBundle> gt_cache;
      for_each_json_line(in, [&](const json& j, int line_no) {
        const std::string where = groups_path + " line " + std::to_string(line_no);
        if (!j.is_object() || !j.contains("clip_id") || !j.contains("responses") || !j["responses"].is_array()) {
          throw SchemaError(where + ": expected {group_id, clip_id, responses: [...]}");
        }
        const auto clip_id = j["clip_id"].get<std::string>();
        const auto* clip = manifest.find(clip_id);
        if (clip == nullptr) throw SchemaError(where + ": unknown clip_id '" + clip_id + "'");
        auto it = gt_cache.find(clip_id);
        if (it == gt_cache.end()) it = gt_cache.emplace(clip_id, ground_truth_for(*clip, settings.qa)).first;

        std::vector<RewardBreakdown> breakdowns;
        std::vector<double> totals;
        for (const auto& r : j["responses"]) {
          if (!r.is_string()) throw SchemaError(where + ": responses must be strings");
          const auto resp = parse(r.get<std::string>(), settings.grammar, settings.parse_options());
          breakdowns.push_back(reward_total(resp, it->second, settings.reward));
          totals.push_back(breakdowns.back().total);
        }
        if (totals.empty()) throw SchemaError(where + ": empty response group");
        const auto advantages = group_advantages(totals, settings.reward);
        json results = json::array();
        for (std::size_t i = 0; i < breakdowns.size(); ++i) {
          auto b = breakdowns[i].to_json();
          b["index"] = i;
          b["advantage"] = advantages[i];
          results.push_back(b);
        }
        json line = {{"group_id", j.value("group_id", std::string())}, {"clip_id", clip_id}, {"results", results}};
        *sink << versioned(line, settings).dump() << "\n";
      });
      return kOk;
    }

    if (adv->parsed()) {
      auto in = open_input(input_path);
      Output sink(output_path, out);
      for_each_json_line(in, [&](const json& j, int line_no) {
        if (!j.is_object() || !j.contains("rewards") || !j["rewards"].is_array()) {
          throw SchemaError(input_path + " line " + std::to_string(line_no) + ": expected {group_id, rewards}");
        }
        const auto rewards = j["rewards"].get<std::vector<double>>();
        if (rewards.empty()) throw SchemaError(input_path + " line " + std::to_string(line_no) + ": empty group");
        json line = {{"group_id", j.value("group_id", std::string())},
                     {"rewards", rewards},
                     {"advantages", group_advantages(rewards, settings.reward)}};
        *sink << versioned(line, settings).dump() << "\n";
      });
      return kOk;
    }

    if (score_cmd->parsed()) {
      const auto manifest = load_manifest_file(manifest_path);
      if (!model_names.empty() && model_names.size() != pred_paths.size()) {
        throw ContractError("--name must be given once per --preds");
      }
      ScoreOptions opts;
      opts.loc_metric = loc_metric == "max" ? LocMetric::kMaxIou : LocMetric::kSetIou;
      opts.normal_policy = exclude_normal ? NormalClipPolicy::kExcludeNormal : NormalClipPolicy::kEmptyMatchesEmpty;
      opts.distractors = settings.qa;
      const auto split = parse_split_arg(split_name);
      std::map<std::string, ScoreReport> reports;
      for (std::size_t i = 0; i < pred_paths.size(); ++i) {
        auto in = open_input(pred_paths[i]);
        std::vector<PredictionRecord> preds;
        try {
          preds = load_predictions(in, settings.grammar, settings.parse_options());
        } catch (const SchemaError& e) {
          throw SchemaError(pred_paths[i] + ": " + e.what());
        }
        const auto name = model_names.empty() ? fs::path(pred_paths[i]).stem().string() : model_names[i];
        try {
          reports[name] = score(preds, manifest.clips, split, opts);
        } catch (const DataError& e) {
          throw DataError(pred_paths[i] + ": " + e.what());
        }
      }
      out << report_table(reports);
      auto body = report_json(reports);
      body["split"] = split_name;
      body["loc_metric"] = loc_metric;
      body["normal_clip_policy"] = exclude_normal ? "exclude_normal" : "empty_matches_empty";
      const auto doc = versioned(body, settings).dump(2);
      if (!json_path.empty()) {
        write_file(json_path, doc + "\n");
      } else {
        out << doc << "\n";
      }
      return kOk;
    }

    if (derive->parsed()) {
      if (!fs::is_directory(frames_root)) throw DataError("frame root not found: " + frames_root);
      fs::create_directories(out_dir);
      std::vector<std::string> clips;
      if (!clip_filter.empty()) {
        clips = clip_filter;
      } else {
        for (const auto& e : fs::directory_iterator(frames_root)) {
          if (e.is_directory()) clips.push_back(e.path().filename().string());
        }
      }
      std::sort(clips.begin(), clips.end());
      for (const auto& id : clips) {
        DirectoryFrameSource source(fs::path(frames_root) / id);
        ClipDerivation d;
        try {
          d = derive_clip(id, source, settings.diff);
        } catch (const DataError& e) {
          throw DataError("clip " + id + ": " + e.what());
        }
        auto doc = d.to_json();
        doc["tool_version"] = kToolVersion;
        write_file(fs::path(out_dir) / (id + ".json"), doc.dump(2) + "\n");
        out << id << " " << format_intervals(d.candidates) << "\n";
      }
      return kOk;
    }

    if (serve->parsed()) {
      auto manifest = load_manifest_file(manifest_path);
      ReviewStoreOptions opts;
      opts.log_path = log_path;
      opts.frames_root = frames_root;
      ReviewStore store(std::move(manifest), candidates_or_empty(candidates_dir), opts);
      ReviewServerOptions sopts;
      if (!ui_dir.empty()) sopts.ui_dir = ui_dir;
      ReviewServer server(store, sopts);
      stop_on_signal(server);
      const int bound = server.bind(host, port);
      err << "review service listening on http://" << host << ":" << bound << "/ (" << store.decision_count()
          << " decisions replayed)\n";
      server.listen();
      err << "review service stopped (" << store.decision_count() << " decisions)\n";
      return kOk;
    }

    if (exp->parsed()) {
      auto manifest = load_manifest_file(manifest_path);
      ReviewStoreOptions opts;
      opts.log_path = log_path;
      if (!fs::exists(log_path)) throw DataError("decision log not found: " + log_path);
      ReviewStore store(std::move(manifest), candidates_or_empty(candidates_dir), opts);
      auto body = manifest_to_json(store.export_manifest(export_protocol));
      Output sink(output_path, out);
      *sink << versioned(body, settings).dump(2) << "\n";
      return kOk;
    }
    return kUsageError;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

}  // namespace mmviad::cli
