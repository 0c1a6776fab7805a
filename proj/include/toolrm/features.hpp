#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "toolrm/types.hpp"

namespace toolrm {

inline constexpr std::string_view kFeatureSpecVersion = "toolrm-features-v1";

/// Names of the built-in gold-blind features, in vector order.
///
///  parse_ok              1 if the output parsed into a call list
///  is_empty              1 for the empty (no-call) sequence
///  call_count            log1p(number of calls)
///  unknown_function      violation counts from schema validation, each
///  missing_required        squashed as min(count, 4) / 4; all 1 for
///  unexpected_param        malformed output
///  type_mismatch
///  enum_violation
///  known_name_fraction   calls whose function exists in the catalog
///  required_coverage     required params supplied / required params declared
///  enum_conformance      enum-constrained args within their enum
///  lexical_overlap       argument-value tokens that occur in user turns
///  arity_z               mean (args - mid) / half-range over known calls, clipped to [-3, 3]
///  duplicate_calls       fraction of calls repeating an earlier call exactly
///  numeric_grounding     numeric argument values whose text appears in user turns
///  catalog_size          log1p(number of tools in the catalog)
inline constexpr std::array<std::string_view, 16> kFeatureNames = {
    "parse_ok",          "is_empty",           "call_count",       "unknown_function",
    "missing_required",  "unexpected_param",   "type_mismatch",    "enum_violation",
    "known_name_fraction", "required_coverage", "enum_conformance", "lexical_overlap",
    "arity_z",           "duplicate_calls",    "numeric_grounding", "catalog_size",
};

inline constexpr std::size_t kFeatureDimension = kFeatureNames.size();

struct FeatureSpec {
  std::string version = std::string(kFeatureSpecVersion);
  std::size_t dimension = kFeatureDimension;
  std::vector<std::string> names;

  static FeatureSpec builtin();
};

using FeatureVector = std::vector<double>;

/// Deterministic and gold-blind: depends only on (context, candidate). Every
/// feature is invariant under consistent renaming of functions and parameters.
FeatureVector featurize(const ScoringContext& context, const ParsedCandidate& candidate);

/// Lowercased alphanumeric tokens.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace toolrm
