#include "mmviad/response_grammar.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cctype>
#include <cmath>
#include <sstream>

#include "mmviad/error.hpp"

namespace mmviad {

std::string_view to_string(Grammar g) {
  return g == Grammar::kBenchmark ? "benchmark" : "structured";
}

Grammar parse_grammar(std::string_view s) {
  if (s == "benchmark") return Grammar::kBenchmark;
  if (s == "structured") return Grammar::kStructured;
  throw ContractError("unknown grammar '" + std::string(s) + "'");
}

std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::kMissingSection: return "missing_section";
    case Violation::kSectionOutOfOrder: return "section_out_of_order";
    case Violation::kDuplicateSection: return "duplicate_section";
    case Violation::kUnclosedTag: return "unclosed_tag";
    case Violation::kTrailingTextAfterAnswer: return "trailing_text_after_answer";
    case Violation::kNonQtagInsideAnswer: return "non_qtag_inside_answer";
    case Violation::kUnparsableField: return "unparsable_field";
    case Violation::kMarkdownFence: return "markdown_fence";
    case Violation::kStrayText: return "stray_text";
    case Violation::kLengthExceeded: return "length_exceeded";
  }
  return "unparsable_field";
}

bool StructuredResponse::has(Violation v) const {
  return std::any_of(violations.begin(), violations.end(),
                     [v](const ViolationCode& c) { return c.code == v; });
}

namespace {

constexpr std::array<std::string_view, 4> kStructuredSections = {
    "global_perception", "segment_perception", "think", "answer"};
constexpr std::array<std::string_view, 2> kBenchmarkSections = {"think", "answer"};
constexpr std::array<std::string_view, 4> kAnswerFields = {"q1", "q2", "q3", "q4"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::size_t first_non_space(std::string_view s, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to; ++i) {
    if (!is_space(s[i])) return i;
  }
  return to;
}

struct Tag {
  std::string_view name;
  bool closing = false;
  std::size_t begin = 0;  // offset of '<'
  std::size_t end = 0;    // one past '>'
};

// Finds <name> / </name> tags whose name is in `names`, in text order.
template <std::size_t N>
std::vector<Tag> scan_tags(std::string_view text, const std::array<std::string_view, N>& names,
                           std::size_t from = 0, std::size_t to = std::string_view::npos) {
  std::vector<Tag> tags;
  to = std::min(to, text.size());
  std::size_t pos = from;
  while (pos < to) {
    const std::size_t lt = text.find('<', pos);
    if (lt == std::string_view::npos || lt >= to) break;
    std::size_t p = lt + 1;
    bool closing = false;
    if (p < to && text[p] == '/') {
      closing = true;
      ++p;
    }
    const std::size_t name_begin = p;
    while (p < to && (std::isalnum(static_cast<unsigned char>(text[p])) || text[p] == '_')) ++p;
    if (p < to && text[p] == '>' && p > name_begin) {
      const auto name = text.substr(name_begin, p - name_begin);
      if (std::find(names.begin(), names.end(), name) != names.end()) {
        tags.push_back({name, closing, lt, p + 1});
        pos = p + 1;
        continue;
      }
    }
    pos = lt + 1;
  }
  return tags;
}

template <std::size_t N>
int index_of(const std::array<std::string_view, N>& names, std::string_view name) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::optional<char> parse_letter_strict(std::string_view text) {
  text = trim(text);
  if (text.size() != 1 || !std::isalpha(static_cast<unsigned char>(text[0]))) return std::nullopt;
  return static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
}

// Also tolerates "(A)", "A)" and "A." decorations.
std::optional<char> parse_letter_lenient(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '(') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ')' || text.back() == '.')) text.remove_suffix(1);
  return parse_letter_strict(text);
}

struct FieldValue {
  std::optional<char> letter;
  std::optional<IntervalSet> intervals;
  std::string error;
  std::vector<std::string> warnings;
  bool ok() const { return letter || intervals; }
};

FieldValue parse_field(int field, std::string_view text, bool strict, double duration) {
  FieldValue v;
  if (field == 3) {
    auto parsed = parse_intervals(text, duration);
    v.intervals = std::move(parsed.value);
    v.error = std::move(parsed.error);
    v.warnings = std::move(parsed.warnings);
    return v;
  }
  v.letter = strict ? parse_letter_strict(text) : parse_letter_lenient(text);
  if (!v.letter) {
    v.error = "expected a single option letter";
  } else if (field == 0 && *v.letter != 'A' && *v.letter != 'B') {
    v.letter.reset();
    v.error = "q1 must be A or B";
  }
  return v;
}

// Lenient extraction: q-tags from the last <answer> block (or the whole text
// when there is none), first occurrence of each.
AnswerBlock extract_answers(std::string_view text, double duration,
                            std::vector<std::string>& warnings) {
  std::size_t from = 0;
  std::size_t to = text.size();
  if (const auto open = text.rfind("<answer>"); open != std::string_view::npos) {
    from = open + 8;
    if (const auto close = text.find("</answer>", from); close != std::string_view::npos) to = close;
  }
  const auto region = text.substr(from, to - from);

  AnswerBlock block;
  for (int f = 0; f < 4; ++f) {
    const std::string open = "<" + std::string(kAnswerFields[f]) + ">";
    const std::string close = "</" + std::string(kAnswerFields[f]) + ">";
    const auto o = region.find(open);
    if (o == std::string_view::npos) continue;
    const std::size_t vbeg = o + open.size();
    auto c = region.find(close, vbeg);
    if (c == std::string_view::npos) c = std::min(region.size(), region.find('<', vbeg));
    auto value = parse_field(f, region.substr(vbeg, c - vbeg), false, duration);
    for (auto& w : value.warnings) warnings.push_back(std::string(kAnswerFields[f]) + ": " + w);
    if (!value.ok()) {
      block.parse_errors.push_back({std::string(kAnswerFields[f]), value.error});
      continue;
    }
    switch (f) {
      case 0: block.q1 = value.letter; break;
      case 1: block.q2 = value.letter; break;
      case 2: block.q3 = value.letter; break;
      default: block.q4 = std::move(value.intervals); break;
    }
  }
  return block;
}

// Strict check of the <answer> interior: only q-tags, each once, in order,
// each parsable.
void check_answer_body(std::string_view text, std::size_t from, std::size_t to, double duration,
                       std::vector<ViolationCode>& out) {
  const auto tags = scan_tags(text, kAnswerFields, from, to);
  std::array<int, 4> count{};
  int last = -1;
  std::size_t cursor = from;
  bool flagged_text = false;
  auto check_text = [&](std::size_t a, std::size_t b) {
    const auto p = first_non_space(text, a, b);
    if (p < b && !flagged_text) {
      out.push_back({Violation::kNonQtagInsideAnswer, p});
      flagged_text = true;
    }
  };

  std::size_t i = 0;
  while (i < tags.size()) {
    const auto& t = tags[i];
    check_text(cursor, t.begin);
    const int f = index_of(kAnswerFields, t.name);
    if (t.closing) {
      // Close without a matching open.
      out.push_back({count[f] > 0 ? Violation::kDuplicateSection : Violation::kUnclosedTag, t.begin});
      cursor = t.end;
      ++i;
      continue;
    }
    if (count[f] > 0) {
      out.push_back({Violation::kDuplicateSection, t.begin});
    } else if (f < last) {
      out.push_back({Violation::kSectionOutOfOrder, t.begin});
    }
    ++count[f];
    last = std::max(last, f);
    if (i + 1 < tags.size() && tags[i + 1].closing && tags[i + 1].name == t.name) {
      const auto& c = tags[i + 1];
      const auto value = parse_field(f, text.substr(t.end, c.begin - t.end), true, duration);
      if (!value.ok()) out.push_back({Violation::kUnparsableField, t.end});
      cursor = c.end;
      i += 2;
    } else {
      out.push_back({Violation::kUnclosedTag, t.begin});
      const std::size_t stop = i + 1 < tags.size() ? tags[i + 1].begin : to;
      cursor = stop;
      ++i;
    }
  }
  check_text(cursor, to);
  for (int f = 0; f < 4; ++f) {
    if (count[f] == 0) out.push_back({Violation::kMissingSection, to});
  }
}

std::size_t word_count(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

template <std::size_t N>
void check_sections(std::string_view text, const std::array<std::string_view, N>& sections,
                    double duration, StructuredResponse& resp) {
  auto& out = resp.violations;
  const auto tags = scan_tags(text, sections);
  const int answer_idx = static_cast<int>(N) - 1;

  std::array<int, N> count{};
  std::array<std::optional<std::pair<std::size_t, std::size_t>>, N> content{};
  int last = -1;
  int open = -1;
  std::size_t open_tag = 0;
  std::size_t open_begin = 0;
  std::size_t cursor = 0;
  bool answer_closed = false;

  auto outside_text = [&](std::size_t a, std::size_t b) {
    const auto p = first_non_space(text, a, b);
    if (p < b) {
      out.push_back({answer_closed ? Violation::kTrailingTextAfterAnswer : Violation::kStrayText, p});
    }
  };
  auto finish = [&](std::size_t body_end) {
    if (!content[open]) content[open] = std::make_pair(open_begin, body_end);
    if (open == answer_idx) answer_closed = true;
    open = -1;
  };

  for (const auto& t : tags) {
    const int k = index_of(sections, t.name);
    if (!t.closing) {
      if (open != -1) {
        out.push_back({Violation::kUnclosedTag, open_tag});
        finish(t.begin);
      } else {
        outside_text(cursor, t.begin);
      }
      if (count[k] > 0) {
        out.push_back({Violation::kDuplicateSection, t.begin});
      } else if (k < last) {
        out.push_back({Violation::kSectionOutOfOrder, t.begin});
      }
      ++count[k];
      last = std::max(last, k);
      open = k;
      open_tag = t.begin;
      open_begin = t.end;
    } else if (open == k) {
      finish(t.begin);
      cursor = t.end;
    } else if (open != -1) {
      // e.g. <think> ... </answer>
      out.push_back({Violation::kUnclosedTag, open_tag});
      finish(t.begin);
      cursor = t.end;
    } else {
      outside_text(cursor, t.begin);
      out.push_back({count[k] > 0 ? Violation::kDuplicateSection : Violation::kStrayText, t.begin});
      cursor = t.end;
    }
  }
  if (open != -1) {
    out.push_back({Violation::kUnclosedTag, open_tag});
    finish(text.size());
  } else {
    outside_text(cursor, text.size());
  }
  for (std::size_t k = 0; k < N; ++k) {
    if (count[k] == 0) out.push_back({Violation::kMissingSection, text.size()});
  }

  auto body = [&](int k) -> std::optional<std::string> {
    if (!content[k]) return std::nullopt;
    return std::string(trim(text.substr(content[k]->first, content[k]->second - content[k]->first)));
  };
  if constexpr (N == 4) {
    resp.global_perception = body(0).value_or("");
    resp.segment_perception = body(1).value_or("");
    resp.think = body(2).value_or("");
  } else {
    resp.think = body(0).value_or("");
  }
  if (content[answer_idx]) {
    check_answer_body(text, content[answer_idx]->first, content[answer_idx]->second, duration, out);
  }
}

}  // namespace

StructuredResponse parse(std::string_view raw, Grammar grammar, const ParseOptions& opts) {
  StructuredResponse resp;
  resp.grammar = grammar;
  std::string_view text = raw;
  if (text.size() > opts.max_length) {
    text = text.substr(0, opts.max_length);
    resp.violations.push_back({Violation::kLengthExceeded, opts.max_length});
  }
  if (const auto fence = text.find("```"); fence != std::string_view::npos) {
    resp.violations.push_back({Violation::kMarkdownFence, fence});
  }

  if (grammar == Grammar::kStructured) {
    check_sections(text, kStructuredSections, opts.duration_sec, resp);
    const std::pair<const std::optional<std::string>*, std::pair<const char*, std::size_t>> limits[] = {
        {&resp.global_perception, {"global_perception", 80}},
        {&resp.segment_perception, {"segment_perception", 80}},
    };
    for (const auto& [section, limit] : limits) {
      if (*section && word_count(**section) > limit.second) {
        resp.warnings.push_back(std::string(limit.first) + " exceeds " +
                                std::to_string(limit.second) + " words");
      }
    }
    if (word_count(resp.think) > 60) resp.warnings.push_back("think exceeds 60 words");
  } else {
    check_sections(text, kBenchmarkSections, opts.duration_sec, resp);
  }

  resp.answer = extract_answers(text, opts.duration_sec, resp.warnings);
  std::stable_sort(resp.violations.begin(), resp.violations.end(),
                   [](const ViolationCode& a, const ViolationCode& b) { return a.location < b.location; });
  resp.format_ok = resp.violations.empty();
  return resp;
}

namespace {

class IntervalParser {
 public:
  explicit IntervalParser(std::string_view s) : s_(s) {}

  std::string_view s_;
  std::size_t p_ = 0;
  std::string error;

  void ws() {
    while (p_ < s_.size() && is_space(s_[p_])) ++p_;
  }
  bool eat(char c) {
    ws();
    if (p_ < s_.size() && s_[p_] == c) {
      ++p_;
      return true;
    }
    return false;
  }
  bool peek(char c) {
    ws();
    return p_ < s_.size() && s_[p_] == c;
  }
  std::optional<double> number() {
    ws();
    const char* first = s_.data() + p_;
    const char* last = s_.data() + s_.size();
    if (first != last && *first == '+') ++first;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
    if (ec != std::errc() || !std::isfinite(v)) {
      error = "non-numeric token";
      return std::nullopt;
    }
    p_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }
  // Parses "s, e]" after the opening bracket.
  std::optional<Interval> pair_tail() {
    auto a = number();
    if (!a) return std::nullopt;
    if (!eat(',')) {
      error = "expected ',' between interval bounds";
      return std::nullopt;
    }
    auto b = number();
    if (!b) return std::nullopt;
    if (!eat(']')) {
      error = "expected ']' closing interval";
      return std::nullopt;
    }
    return Interval{*a, *b};
  }
  bool at_end() {
    ws();
    return p_ == s_.size();
  }
};

}  // namespace

IntervalParse parse_intervals(std::string_view text, double duration) {
  IntervalParse result;
  IntervalParser p(text);
  std::vector<Interval> raw;

  auto fail = [&](std::string why) {
    result.value.reset();
    result.error = std::move(why);
    return result;
  };

  if (!p.eat('[')) return fail("expected '['");
  if (p.eat(']')) {
    // "[]"
  } else if (p.peek('[')) {
    do {
      if (!p.eat('[')) return fail("expected '[' opening interval");
      auto iv = p.pair_tail();
      if (!iv) return fail(p.error);
      raw.push_back(*iv);
    } while (p.eat(','));
    if (!p.eat(']')) return fail("malformed bracket nesting");
  } else {
    auto iv = p.pair_tail();
    if (!iv) return fail(p.error);
    raw.push_back(*iv);
  }
  if (!p.at_end()) return fail("unexpected text after interval list");

  for (auto& iv : raw) {
    const Interval before = iv;
    iv.start = std::clamp(iv.start, 0.0, duration);
    iv.end = std::clamp(iv.end, 0.0, duration);
    if (!(iv == before)) {
      result.warnings.push_back("interval [" + format_seconds(before.start) + "," +
                                format_seconds(before.end) + "] clamped to [0," +
                                format_seconds(duration) + "]");
    }
    if (iv.start >= iv.end) {
      return fail("interval start >= end");
    }
  }
  result.value = IntervalSet::normalized(std::move(raw), duration);
  return result;
}

std::string format_seconds(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(value);
}

std::string format_intervals(const IntervalSet& set) {
  std::string out = "[";
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i > 0) out += ',';
    out += '[' + format_seconds(set[i].start) + ',' + format_seconds(set[i].end) + ']';
  }
  out += ']';
  return out;
}

std::string render_canonical(const StructuredResponse& resp) {
  if (!resp.format_ok || !resp.answer.complete()) {
    throw ContractError("render_canonical requires a format-valid response");
  }
  std::ostringstream out;
  if (resp.grammar == Grammar::kStructured) {
    out << "<global_perception>\n" << resp.global_perception.value_or("") << "\n</global_perception>\n";
    out << "<segment_perception>\n" << resp.segment_perception.value_or("") << "\n</segment_perception>\n";
  }
  out << "<think>\n" << resp.think << "\n</think>\n";
  const auto& a = resp.answer;
  std::string q4;
  if (resp.grammar == Grammar::kStructured && a.q4->size() == 1) {
    q4 = '[' + format_seconds((*a.q4)[0].start) + ',' + format_seconds((*a.q4)[0].end) + ']';
  } else {
    q4 = format_intervals(*a.q4);
  }
  out << "<answer>\n"
      << "<q1>" << *a.q1 << "</q1>\n"
      << "<q2>" << *a.q2 << "</q2>\n"
      << "<q3>" << *a.q3 << "</q3>\n"
      << "<q4>" << q4 << "</q4>\n"
      << "</answer>";
  return out.str();
}

void filter_sft_traces(const std::function<std::optional<std::string>()>& next,
                       const std::function<void(std::size_t, const std::string&)>& on_keep,
                       const std::function<void(const RejectedTrace&)>& on_reject, Grammar grammar,
                       const ParseOptions& opts) {
  std::size_t index = 0;
  while (auto trace = next()) {
    auto resp = parse(*trace, grammar, opts);
    if (resp.format_ok && resp.answer.complete()) {
      on_keep(index, *trace);
    } else {
      if (resp.violations.empty()) {
        resp.violations.push_back({Violation::kUnparsableField, 0});
      }
      on_reject({index, std::move(*trace), std::move(resp.violations)});
    }
    ++index;
  }
}

TraceFilterResult filter_sft_traces(const std::vector<std::string>& traces, Grammar grammar,
                                    const ParseOptions& opts) {
  TraceFilterResult result;
  std::size_t i = 0;
  filter_sft_traces(
      [&]() -> std::optional<std::string> {
        if (i >= traces.size()) return std::nullopt;
        return traces[i++];
      },
      [&](std::size_t, const std::string& t) { result.kept.push_back(t); },
      [&](const RejectedTrace& r) { result.rejected.push_back(r); }, grammar, opts);
  return result;
}

}  // namespace mmviad
