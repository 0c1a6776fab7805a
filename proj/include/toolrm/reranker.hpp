#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "toolrm/gateway.hpp"
#include "toolrm/types.hpp"

namespace toolrm {

enum class Strategy { BestOfN, Majority, Greedy };

std::string to_string(Strategy s);
std::optional<Strategy> strategy_from_string(const std::string& name);

struct RerankConfig {
  std::size_t n = 32;
  Strategy strategy = Strategy::BestOfN;
  FailureMode failure_mode = FailureMode::Strict;
};

/// Index of the largest reward, lowest index on ties. Missing rewards count as -inf.
std::size_t argmax_lowest(std::span<const std::optional<double>> rewards);

struct BestOfNChoice {
  std::size_t index = 0;
  std::vector<std::optional<double>> rewards;
  std::vector<ItemError> errors;
};

/// Scores every candidate through score_batch and returns the argmax.
/// Malformed candidates are scored like any other. In lenient mode failed
/// scores count as -inf. Pairwise (judge) backends run a knockout where the
/// incumbent is replaced only when the judge prefers the challenger.
BestOfNChoice best_of_n(std::span<const ParsedCandidate> candidates, const ScorerBackend& backend,
                        const ScoringContext& context, FailureMode mode = FailureMode::Strict);

/// Groups by canonical sequence equality (malformed outputs by exact raw
/// text); the largest group wins, earliest first occurrence on ties. Returns
/// the first index of the winning group.
std::size_t majority_vote(std::span<const ParsedCandidate> candidates);

/// Position 0 holds the greedy (n = 1, temperature 0) generation.
std::size_t greedy(std::span<const ParsedCandidate> candidates);

}  // namespace toolrm
