#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmviad/interval_set.hpp"

namespace mmviad {

// benchmark: <think> then <answer>. structured: the four-section format.
enum class Grammar { kBenchmark, kStructured };

std::string_view to_string(Grammar g);
Grammar parse_grammar(std::string_view s);  // throws ContractError

enum class Violation {
  kMissingSection,
  kSectionOutOfOrder,
  kDuplicateSection,
  kUnclosedTag,
  kTrailingTextAfterAnswer,
  kNonQtagInsideAnswer,
  kUnparsableField,
  kMarkdownFence,
  kStrayText,       // non-whitespace before the first or between sections
  kLengthExceeded,  // input truncated at the length cap
};

std::string_view to_string(Violation v);

struct ViolationCode {
  Violation code = Violation::kMissingSection;
  std::size_t location = 0;  // character offset into the (possibly truncated) input
  friend bool operator==(const ViolationCode&, const ViolationCode&) = default;
};

struct FieldError {
  std::string field;  // "q1".."q4"
  std::string note;
  friend bool operator==(const FieldError&, const FieldError&) = default;
};

struct AnswerBlock {
  std::optional<char> q1;  // upper-case letter
  std::optional<char> q2;
  std::optional<char> q3;
  std::optional<IntervalSet> q4;
  std::vector<FieldError> parse_errors;

  bool complete() const { return q1 && q2 && q3 && q4; }
  bool any() const { return q1 || q2 || q3 || q4; }
  friend bool operator==(const AnswerBlock&, const AnswerBlock&) = default;
};

struct StructuredResponse {
  Grammar grammar = Grammar::kStructured;
  std::optional<std::string> global_perception;  // structured grammar only
  std::optional<std::string> segment_perception;
  std::string think;
  AnswerBlock answer;
  bool format_ok = false;
  std::vector<ViolationCode> violations;
  std::vector<std::string> warnings;  // advisory only (word counts, clamping)

  bool has(Violation v) const;
  friend bool operator==(const StructuredResponse&, const StructuredResponse&) = default;
};

struct ParseOptions {
  std::size_t max_length = 64 * 1024;
  double duration_sec = kClipDurationSec;
};

/// Strict verdict plus lenient extraction. Never throws on any input: the
/// format verdict lives in `format_ok`/`violations`, while the answer fields
/// are filled best-effort from the last <answer> block even when the format
/// check fails.
StructuredResponse parse(std::string_view raw, Grammar grammar, const ParseOptions& opts = {});

struct IntervalParse {
  std::optional<IntervalSet> value;
  std::string error;             // set when value is empty
  std::vector<std::string> warnings;  // clamping notes
};

/// Parses q4 contents: "[]", "[s,e]" or "[[s,e], ...]". Bounds outside
/// [0, duration] are clamped with a warning; start >= end after clamping is an
/// error.
IntervalParse parse_intervals(std::string_view text, double duration = kClipDurationSec);

// Shortest decimal text that round-trips to the same double.
std::string format_seconds(double value);
std::string format_intervals(const IntervalSet& set);

/// Canonical text for a format-valid response. Throws ContractError when
/// `resp.format_ok` is false.
std::string render_canonical(const StructuredResponse& resp);

struct RejectedTrace {
  std::size_t index = 0;
  std::string trace;
  std::vector<ViolationCode> violations;
};

struct TraceFilterResult {
  std::vector<std::string> kept;
  std::vector<RejectedTrace> rejected;
  std::size_t total() const { return kept.size() + rejected.size(); }
};

/// Keeps traces that pass the strict grammar and carry all four answers.
TraceFilterResult filter_sft_traces(const std::vector<std::string>& traces,
                                    Grammar grammar = Grammar::kStructured,
                                    const ParseOptions& opts = {});

/// Streaming variant: `next` yields traces until it returns nullopt.
void filter_sft_traces(const std::function<std::optional<std::string>()>& next,
                       const std::function<void(std::size_t, const std::string&)>& on_keep,
                       const std::function<void(const RejectedTrace&)>& on_reject,
                       Grammar grammar = Grammar::kStructured, const ParseOptions& opts = {});

}  // namespace mmviad
