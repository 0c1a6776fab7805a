#include "toolrm/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_set>

#include "toolrm/parse.hpp"
#include "toolrm/schema.hpp"

namespace toolrm {

namespace {

enum Index : std::size_t {
  kParseOk,
  kIsEmpty,
  kCallCount,
  kUnknownFunction,
  kMissingRequired,
  kUnexpectedParam,
  kTypeMismatch,
  kEnumViolation,
  kKnownNameFraction,
  kRequiredCoverage,
  kEnumConformance,
  kLexicalOverlap,
  kArityZ,
  kDuplicateCalls,
  kNumericGrounding,
  kCatalogSize,
};

constexpr double kViolationCap = 4.0;

double squash_count(std::size_t n) { return std::min(static_cast<double>(n), kViolationCap) / kViolationCap; }

void collect_value_tokens(const Json& v, std::vector<std::string>& tokens,
                          std::vector<std::string>& numbers) {
  if (v.is_string()) {
    auto t = tokenize(v.get<std::string>());
    tokens.insert(tokens.end(), t.begin(), t.end());
  } else if (v.is_number()) {
    std::string text = canonical_dump(v);
    numbers.push_back(text);
    auto t = tokenize(text);
    tokens.insert(tokens.end(), t.begin(), t.end());
  } else if (v.is_array() || v.is_object()) {
    for (const auto& item : v) collect_value_tokens(item, tokens, numbers);
  }
}

}  // namespace

FeatureSpec FeatureSpec::builtin() {
  FeatureSpec spec;
  for (auto n : kFeatureNames) spec.names.emplace_back(n);
  return spec;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

FeatureVector featurize(const ScoringContext& context, const ParsedCandidate& candidate) {
  FeatureVector f(kFeatureDimension, 0.0);
  f[kCatalogSize] = std::log1p(static_cast<double>(context.catalog.tools.size()));

  if (!candidate.wellformed()) {
    for (std::size_t i = kUnknownFunction; i <= kEnumViolation; ++i) f[i] = 1.0;
    return f;
  }
  const ToolCallSequence& seq = candidate.sequence();
  f[kParseOk] = 1.0;
  f[kIsEmpty] = seq.empty() ? 1.0 : 0.0;
  f[kCallCount] = std::log1p(static_cast<double>(seq.size()));
  if (seq.empty()) return f;

  std::array<std::size_t, 5> violations{};
  for (const auto& v : validate_against_catalog(seq, context.catalog)) {
    ++violations[static_cast<std::size_t>(v.kind)];
  }
  for (std::size_t k = 0; k < violations.size(); ++k) f[kUnknownFunction + k] = squash_count(violations[k]);

  std::unordered_set<std::string> user_tokens;
  std::string user_text;
  for (const auto& m : context.conversation) {
    if (m.role != Role::User) continue;
    for (auto& t : tokenize(m.content)) user_tokens.insert(std::move(t));
    user_text += m.content;
    user_text += '\n';
  }

  std::size_t known = 0;
  std::size_t required_declared = 0;
  std::size_t required_supplied = 0;
  std::size_t enum_args = 0;
  std::size_t enum_ok = 0;
  std::size_t value_tokens = 0;
  std::size_t value_hits = 0;
  std::size_t numeric_values = 0;
  std::size_t numeric_hits = 0;
  double arity_sum = 0;
  std::size_t arity_calls = 0;
  std::size_t duplicates = 0;
  std::set<std::string> seen_calls;

  for (const auto& call : seq.calls) {
    ToolCallSequence single{{call}};
    if (!seen_calls.insert(canonical_key(single)).second) ++duplicates;

    std::vector<std::string> tokens;
    std::vector<std::string> numbers;
    for (auto it = call.arguments.begin(); it != call.arguments.end(); ++it) {
      collect_value_tokens(it.value(), tokens, numbers);
    }
    value_tokens += tokens.size();
    for (const auto& t : tokens) value_hits += user_tokens.count(t);
    numeric_values += numbers.size();
    for (const auto& n : numbers) numeric_hits += user_text.find(n) != std::string::npos ? 1 : 0;

    const ToolSpec* tool = context.catalog.find(call.name);
    if (!tool) continue;
    ++known;
    required_declared += tool->required.size();
    for (const auto& r : tool->required) required_supplied += call.arguments.contains(r) ? 1 : 0;
    for (auto it = call.arguments.begin(); it != call.arguments.end(); ++it) {
      const ParamSpec* spec = tool->find_param(it.key());
      if (!spec || !spec->enum_values) continue;
      ++enum_args;
      enum_ok += conforms_to_enum(it.value(), *spec) ? 1 : 0;
    }
    const double lo = static_cast<double>(tool->required.size());
    const double hi = static_cast<double>(tool->properties.size());
    const double mid = 0.5 * (lo + hi);
    const double half = std::max(1.0, 0.5 * (hi - lo));
    arity_sum += std::clamp((static_cast<double>(call.arguments.size()) - mid) / half, -3.0, 3.0);
    ++arity_calls;
  }

  const double n = static_cast<double>(seq.size());
  f[kKnownNameFraction] = static_cast<double>(known) / n;
  f[kRequiredCoverage] =
      required_declared ? static_cast<double>(required_supplied) / static_cast<double>(required_declared) : 1.0;
  f[kEnumConformance] = enum_args ? static_cast<double>(enum_ok) / static_cast<double>(enum_args) : 1.0;
  f[kLexicalOverlap] = value_tokens ? static_cast<double>(value_hits) / static_cast<double>(value_tokens) : 0.0;
  f[kArityZ] = arity_calls ? arity_sum / static_cast<double>(arity_calls) : 0.0;
  f[kDuplicateCalls] = static_cast<double>(duplicates) / n;
  f[kNumericGrounding] =
      numeric_values ? static_cast<double>(numeric_hits) / static_cast<double>(numeric_values) : 0.0;
  return f;
}

}  // namespace toolrm
