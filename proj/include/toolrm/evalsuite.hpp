#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "toolrm/gateway.hpp"
#include "toolrm/json.hpp"
#include "toolrm/matcher.hpp"
#include "toolrm/reranker.hpp"
#include "toolrm/types.hpp"

namespace toolrm {

// ---------------------------------------------------------------------------
// Benchmark protocol
// ---------------------------------------------------------------------------

struct BenchRow {
  std::string id;
  std::optional<double> reward_correct;
  std::optional<double> reward_incorrect;
  /// Strict: reward_correct > reward_incorrect. Ties and failures lose.
  bool win = false;
  /// Judge backends only.
  std::optional<bool> presentation_swapped;
  std::string error;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  double accuracy = 0.0;
  std::size_t failures = 0;
};

/// Scores both sequences of each record in the same context and counts a win
/// when the correct one scores strictly higher. Judge backends are asked
/// directly which of the two is better.
BenchResult eval_bench(const std::vector<BenchRecord>& records, const ScorerBackend& backend,
                       FailureMode mode = FailureMode::Strict);

Json bench_result_to_json(const BenchResult& result);

// ---------------------------------------------------------------------------
// Downstream (Best-of-n / majority / greedy) evaluation
// ---------------------------------------------------------------------------

struct DownstreamTask {
  TaskRecord task;
  std::vector<ParsedCandidate> candidates;
};

struct DownstreamRow {
  std::string id;
  std::size_t chosen_index = 0;
  std::size_t candidates_used = 0;
  MatchVerdict verdict;
};

struct DownstreamResult {
  std::vector<DownstreamRow> rows;
  double accuracy = 0.0;
  std::size_t correct = 0;
  ErrorHistogram histogram;
};

/// Applies the strategy to the first config.n candidates of each task and
/// checks the chosen one against gold. Strict mode throws ShortCandidateSet
/// when a task has fewer than n candidates; lenient mode uses what exists.
DownstreamResult eval_downstream(const std::vector<DownstreamTask>& tasks, const ScorerBackend& backend,
                                 const RerankConfig& config);

/// Joins tasks with generation records by id, in task order. Tasks without
/// generations get an empty candidate list.
std::vector<DownstreamTask> join_tasks(const std::vector<TaskRecord>& tasks,
                                       const std::vector<GenerationRecord>& generations);

Json downstream_result_to_json(const DownstreamResult& result);

// ---------------------------------------------------------------------------
// Correlation
// ---------------------------------------------------------------------------

/// Product-moment correlation. Throws DegenerateInput for mismatched lengths,
/// fewer than two points, or a constant vector.
double pearson(std::span<const double> xs, std::span<const double> ys);

using CellKey = std::tuple<std::string, std::string, std::string>;  // generator, benchmark, RM

struct CorrelationCell {
  std::string generator;
  std::string benchmark;
  std::optional<double> r;
  std::size_t reward_models = 0;
  std::string error;
};

struct CorrelationTable {
  std::vector<CorrelationCell> cells;
  std::map<std::string, double> generator_average;
  std::optional<double> overall_average;
};

/// One coefficient per (generator, benchmark) cell, correlating benchmark
/// accuracy with downstream accuracy across the reward models present in
/// both inputs. Degenerate cells carry an error and are left out of averages.
CorrelationTable correlation_matrix(const std::map<std::string, double>& bench_scores,
                                    const std::map<CellKey, double>& downstream);

Json correlation_to_json(const CorrelationTable& table);

// ---------------------------------------------------------------------------
// Reward-guided filtering
// ---------------------------------------------------------------------------

struct FilterSample {
  std::string id;
  ScoringContext context;
  ParsedCandidate target;
};

struct FilterManifestRow {
  std::size_t index = 0;
  std::string id;
  std::optional<double> score;
  std::optional<std::size_t> rank;
  bool kept = false;
  std::string error;
};

struct FilterResult {
  /// Kept sample indices in input order.
  std::vector<std::size_t> kept;
  std::vector<FilterManifestRow> manifest;
  std::size_t failures = 0;
};

/// Number kept out of n scored samples: ceil(keep_fraction * n).
std::size_t keep_count(double keep_fraction, std::size_t n);

/// Ranks samples by the reward of their own target, descending with input
/// order breaking ties, and keeps the top ceil(keep_fraction * N) of the N
/// that scored. Failed samples are excluded and reported in the manifest.
FilterResult filter_topk(const std::vector<FilterSample>& samples, const ScorerBackend& backend,
                         double keep_fraction);

Json filter_manifest_to_json(const FilterResult& result);

}  // namespace toolrm
