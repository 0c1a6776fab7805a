#include "toolrm/parse.hpp"

#include <optional>
#include <vector>

#include "toolrm/codec.hpp"
#include "toolrm/error.hpp"

namespace toolrm {

namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Contents of every ``` fence pair; the optional language tag on the opening
// line is dropped.
std::vector<std::string_view> fenced_blocks(std::string_view text) {
  std::vector<std::string_view> blocks;
  std::size_t pos = 0;
  for (;;) {
    auto open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    auto body = open + 3;
    auto eol = text.find('\n', body);
    auto close = text.find("```", body);
    if (close == std::string_view::npos) break;
    if (eol != std::string_view::npos && eol < close) {
      std::string_view tag = trim(text.substr(body, eol - body));
      bool is_tag = tag.find_first_of("[{\"") == std::string_view::npos;
      if (is_tag) body = eol + 1;
    }
    blocks.push_back(text.substr(body, close - body));
    pos = close + 3;
  }
  return blocks;
}

struct Attempt {
  std::optional<ToolCallSequence> seq;
  std::string diagnostic;
};

Attempt try_parse(std::string_view candidate) {
  Attempt a;
  Json j;
  try {
    j = Json::parse(candidate.begin(), candidate.end());
  } catch (const Json::parse_error& e) {
    a.diagnostic = "JSON syntax error at byte " + std::to_string(e.byte) + ": " + e.what();
    return a;
  }
  if (!j.is_array()) {
    a.diagnostic = "expected a JSON array of tool calls";
    return a;
  }
  try {
    a.seq = sequence_from_json(j);
  } catch (const UsageError& e) {
    a.diagnostic = e.what();
  }
  return a;
}

Json canonical_arguments(const Json& args) { return canonical_value(args); }

}  // namespace

ParsedCandidate parse_tool_calls(std::string_view text) {
  std::vector<std::string_view> candidates = fenced_blocks(text);
  const bool fenced = !candidates.empty();
  if (!fenced) candidates.push_back(trim(text));

  std::vector<ToolCallSequence> accepted;
  std::string first_diagnostic;
  for (auto c : candidates) {
    Attempt a = try_parse(trim(c));
    if (a.seq) {
      accepted.push_back(std::move(*a.seq));
    } else if (first_diagnostic.empty()) {
      first_diagnostic = a.diagnostic;
    }
  }

  if (!fenced && accepted.empty()) {
    std::string_view whole = trim(text);
    auto lo = whole.find('[');
    auto hi = whole.rfind(']');
    if (lo != std::string_view::npos && hi != std::string_view::npos && hi > lo &&
        (lo != 0 || hi != whole.size() - 1)) {
      Attempt a = try_parse(whole.substr(lo, hi - lo + 1));
      if (a.seq) accepted.push_back(std::move(*a.seq));
    }
  }

  if (accepted.size() == 1) return std::move(accepted.front());
  std::string diagnostic;
  if (accepted.size() > 1) {
    diagnostic = "found " + std::to_string(accepted.size()) + " competing tool-call lists";
  } else if (trim(text).empty()) {
    diagnostic = "empty output";
  } else {
    diagnostic = first_diagnostic.empty() ? "no tool-call list found" : first_diagnostic;
  }
  return MalformedOutput{std::string(text), std::move(diagnostic)};
}

ToolCallSequence canonicalize(const ToolCallSequence& seq) {
  ToolCallSequence out;
  out.calls.reserve(seq.calls.size());
  for (const auto& call : seq.calls) {
    out.calls.push_back({call.name, canonical_arguments(call.arguments)});
  }
  return out;
}

std::string canonical_key(const ToolCallSequence& seq) {
  return sequence_to_json(canonicalize(seq)).dump();
}

bool canonical_equal(const ToolCallSequence& a, const ToolCallSequence& b) {
  return canonical_key(a) == canonical_key(b);
}

std::string render_sequence(const ToolCallSequence& seq) {
  if (seq.empty()) return "```json\n[]\n```";
  std::string out = "```json\n[\n";
  Json calls = sequence_to_json(seq);
  for (std::size_t i = 0; i < calls.size(); ++i) {
    out += "        ";
    out += spaced_dump(calls[i]);
    if (i + 1 < calls.size()) out += ",";
    out += "\n";
  }
  out += "]\n```";
  return out;
}

}  // namespace toolrm
