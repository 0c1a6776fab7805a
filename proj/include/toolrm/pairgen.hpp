#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toolrm/types.hpp"

namespace toolrm {

/// An incorrect model output kept as a rejected-side candidate.
struct PoolItem {
  std::string query_id;
  std::string source_model;
  std::string raw_text;
  ParsedCandidate candidate;
  ErrorClass error;
};

/// Keeps only outputs whose verdict against the record's gold is Incorrect,
/// annotated with their error class. Records without gold contribute nothing.
/// Output order follows record order, then output order.
std::vector<PoolItem> harvest(const std::vector<GenerationRecord>& records);

/// Keeps exactly one item per query_id, uniformly at random. The draw for a
/// query depends only on (seed, query_id), so the result is independent of
/// pool order and of other queries. Output is ordered by first appearance.
std::vector<PoolItem> subsample_per_query(const std::vector<PoolItem>& pool, std::uint64_t seed);

/// First acceptable value per parameter; optional parameters with no
/// acceptable value are omitted. Throws GoldUnderspecified when a required
/// parameter has no acceptable value.
ToolCallSequence materialize_gold(const GoldAnswer& gold);

/// Pairs each pool item with its record's materialized gold. Throws
/// GoldUnderspecified, or UsageError when a pool item's query has no record.
std::vector<PreferencePair> build_pairs(const std::vector<PoolItem>& pool,
                                        const std::vector<GenerationRecord>& records);

/// Slice of a generation record: explicit "slice" field, else irrelevance
/// when gold is empty, multi-turn when the conversation has more than one
/// user turn or any tool turn, single-turn otherwise.
Slice infer_slice(const GenerationRecord& record);

struct MixtureSpec {
  /// Counts per slice (SingleTurn, MultiTurn, Irrelevance); ratios when `ratio_mode`.
  std::array<double, 3> amounts{};
  bool ratio_mode = false;

  double amount(Slice s) const { return amounts[static_cast<std::size_t>(s)]; }
};

/// "single=10,multi=10,irrel=2" (counts) or "single=0.5,multi=0.5,irrel=0.1"
/// (ratios, detected by any fractional value). Throws UsageError.
MixtureSpec parse_mixture(const std::string& text);

/// Nonnegative, finite, at least one slice positive; counts integral.
void validate_mixture(const MixtureSpec& spec);

using SlicedPairs = std::map<Slice, std::vector<PreferencePair>>;

/// Per slice, draws the requested number of pairs without replacement, then
/// concatenates and shuffles, all under `seed`. In ratio mode the largest
/// total the slices can supply at the given proportions is used. Throws
/// InsufficientData naming the short slice.
std::vector<PreferencePair> compose_mixture(const SlicedPairs& slices, const MixtureSpec& spec,
                                            std::uint64_t seed);

/// Exact per-slice counts compose_mixture will draw given available sizes.
std::array<std::size_t, 3> resolve_counts(const MixtureSpec& spec, const std::array<std::size_t, 3>& available);

}  // namespace toolrm
