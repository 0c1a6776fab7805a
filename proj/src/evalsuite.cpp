#include "toolrm/evalsuite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "toolrm/error.hpp"

namespace toolrm {

BenchResult eval_bench(const std::vector<BenchRecord>& records, const ScorerBackend& backend, FailureMode mode) {
  if (records.empty()) throw UsageError("eval_bench: no records");
  BenchResult result;
  result.rows.resize(records.size());
  std::vector<ParsedCandidate> correct;
  std::vector<ParsedCandidate> incorrect;
  correct.reserve(records.size());
  incorrect.reserve(records.size());
  for (const auto& r : records) {
    correct.emplace_back(r.correct);
    incorrect.emplace_back(r.incorrect);
  }

  if (const auto* judge = std::get_if<JudgeBackend>(&backend)) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      BenchRow& row = result.rows[i];
      row.id = records[i].id;
      try {
        JudgeVerdict v = judge_pair(*judge, records[i].context, correct[i], incorrect[i]);
        row.win = v.preferred == Choice::A;
        row.presentation_swapped = v.presentation_swapped;
      } catch (const std::exception& e) {
        if (mode == FailureMode::Strict) throw;
        row.error = e.what();
        ++result.failures;
      }
    }
  } else {
    std::vector<ScoreItem> items;
    items.reserve(records.size() * 2);
    for (std::size_t i = 0; i < records.size(); ++i) {
      items.push_back({std::cref(records[i].context), std::cref(correct[i])});
      items.push_back({std::cref(records[i].context), std::cref(incorrect[i])});
    }
    BatchScores scores = score_batch(backend, items, mode);
    for (const auto& e : scores.errors) {
      BenchRow& row = result.rows[e.index / 2];
      if (!row.error.empty()) row.error += "; ";
      row.error += e.message;
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      BenchRow& row = result.rows[i];
      row.id = records[i].id;
      row.reward_correct = scores.rewards[2 * i];
      row.reward_incorrect = scores.rewards[2 * i + 1];
      row.win = row.reward_correct && row.reward_incorrect && *row.reward_correct > *row.reward_incorrect;
      if (!row.error.empty()) ++result.failures;
    }
  }
  std::size_t wins = 0;
  for (const auto& row : result.rows) wins += row.win ? 1 : 0;
  result.accuracy = static_cast<double>(wins) / static_cast<double>(records.size());
  return result;
}

Json bench_result_to_json(const BenchResult& result) {
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    Json j = Json::object();
    j["id"] = r.id;
    j["reward_correct"] = r.reward_correct ? Json(*r.reward_correct) : Json(nullptr);
    j["reward_incorrect"] = r.reward_incorrect ? Json(*r.reward_incorrect) : Json(nullptr);
    j["win"] = r.win;
    if (r.presentation_swapped) j["presentation_swapped"] = *r.presentation_swapped;
    if (!r.error.empty()) j["error"] = r.error;
    rows.push_back(std::move(j));
  }
  Json j = Json::object();
  j["records"] = result.rows.size();
  j["accuracy"] = result.accuracy;
  j["failures"] = result.failures;
  j["rows"] = std::move(rows);
  return j;
}

// ---------------------------------------------------------------------------

DownstreamResult eval_downstream(const std::vector<DownstreamTask>& tasks, const ScorerBackend& backend,
                                 const RerankConfig& config) {
  if (config.n == 0) throw UsageError("rerank n must be >= 1");
  DownstreamResult result;
  for (const auto& t : tasks) {
    if (t.candidates.size() < config.n && config.failure_mode == FailureMode::Strict) {
      throw ShortCandidateSet("task " + t.task.id + " has " + std::to_string(t.candidates.size()) +
                              " candidates, " + std::to_string(config.n) + " required");
    }
    DownstreamRow row;
    row.id = t.task.id;
    const std::size_t used = std::min(config.n, t.candidates.size());
    row.candidates_used = used;
    if (used == 0) {
      row.verdict = match_sequence(ParsedCandidate(MalformedOutput{"", "no candidates"}), t.task.gold,
                                   t.task.context.catalog);
    } else {
      std::span<const ParsedCandidate> cands(t.candidates.data(), used);
      switch (config.strategy) {
        case Strategy::BestOfN:
          row.chosen_index = best_of_n(cands, backend, t.task.context, config.failure_mode).index;
          break;
        case Strategy::Majority: row.chosen_index = majority_vote(cands); break;
        case Strategy::Greedy: row.chosen_index = greedy(cands); break;
      }
      row.verdict = match_sequence(cands[row.chosen_index], t.task.gold, t.task.context.catalog);
    }
    if (row.verdict.correct) {
      ++result.correct;
    } else {
      result.histogram.add(row.verdict.error);
    }
    result.rows.push_back(std::move(row));
  }
  result.accuracy = tasks.empty() ? 0.0 : static_cast<double>(result.correct) / static_cast<double>(tasks.size());
  return result;
}

std::vector<DownstreamTask> join_tasks(const std::vector<TaskRecord>& tasks,
                                       const std::vector<GenerationRecord>& generations) {
  std::unordered_map<std::string, const GenerationRecord*> by_id;
  for (const auto& g : generations) by_id.emplace(g.query_id, &g);
  std::vector<DownstreamTask> out;
  out.reserve(tasks.size());
  for (const auto& t : tasks) {
    DownstreamTask d{t, {}};
    if (auto it = by_id.find(t.id); it != by_id.end()) {
      for (const auto& o : it->second->outputs) d.candidates.push_back(o.candidate);
    }
    out.push_back(std::move(d));
  }
  return out;
}

Json downstream_result_to_json(const DownstreamResult& result) {
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    Json j = Json::object();
    j["id"] = r.id;
    j["chosen_index"] = r.chosen_index;
    j["candidates_used"] = r.candidates_used;
    j["correct"] = r.verdict.correct;
    if (!r.verdict.correct) {
      j["error_type"] = std::string(to_string(r.verdict.error));
      j["detail"] = r.verdict.detail;
    }
    rows.push_back(std::move(j));
  }
  Json j = Json::object();
  j["tasks"] = result.rows.size();
  j["accuracy"] = result.accuracy;
  j["correct"] = result.correct;
  j["errors"] = error_report_json(result.histogram);
  j["rows"] = std::move(rows);
  return j;
}

// ---------------------------------------------------------------------------

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DegenerateInput("pearson: vectors differ in length");
  if (xs.size() < 2) throw DegenerateInput("pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("pearson: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationTable correlation_matrix(const std::map<std::string, double>& bench_scores,
                                    const std::map<CellKey, double>& downstream) {
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> cells;
  for (const auto& [key, acc] : downstream) {
    const auto& [generator, benchmark, rm] = key;
    auto& points = cells[{generator, benchmark}];
    if (auto it = bench_scores.find(rm); it != bench_scores.end()) points.emplace_back(it->second, acc);
  }
  CorrelationTable table;
  std::map<std::string, std::pair<double, std::size_t>> per_generator;
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& [key, points] : cells) {
    CorrelationCell cell;
    cell.generator = key.first;
    cell.benchmark = key.second;
    cell.reward_models = points.size();
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [x, y] : points) {
      xs.push_back(x);
      ys.push_back(y);
    }
    try {
      cell.r = pearson(xs, ys);
      auto& g = per_generator[cell.generator];
      g.first += *cell.r;
      ++g.second;
      total += *cell.r;
      ++counted;
    } catch (const DegenerateInput& e) {
      cell.error = e.what();
    }
    table.cells.push_back(std::move(cell));
  }
  for (const auto& [gen, acc] : per_generator) table.generator_average[gen] = acc.first / static_cast<double>(acc.second);
  if (counted) table.overall_average = total / static_cast<double>(counted);
  return table;
}

Json correlation_to_json(const CorrelationTable& table) {
  Json cells = Json::array();
  for (const auto& c : table.cells) {
    Json j = Json::object();
    j["generator"] = c.generator;
    j["benchmark"] = c.benchmark;
    j["reward_models"] = c.reward_models;
    j["r"] = c.r ? Json(*c.r) : Json(nullptr);
    if (!c.error.empty()) j["error"] = c.error;
    cells.push_back(std::move(j));
  }
  Json j = Json::object();
  j["assumption"] =
      "each cell correlates benchmark accuracy with downstream accuracy across reward models for one "
      "(generator, benchmark) pair";
  j["cells"] = std::move(cells);
  j["generator_average"] = table.generator_average;
  j["overall_average"] = table.overall_average ? Json(*table.overall_average) : Json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------

std::size_t keep_count(double keep_fraction, std::size_t n) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw UsageError("keep_fraction must be in (0, 1]");
  // The epsilon absorbs representation error such as 0.3 * 10 = 3.0000000000000004.
  const double raw = keep_fraction * static_cast<double>(n);
  const auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::min(k, n);
}

FilterResult filter_topk(const std::vector<FilterSample>& samples, const ScorerBackend& backend,
                         double keep_fraction) {
  keep_count(keep_fraction, 0);
  FilterResult result;
  result.manifest.resize(samples.size());
  if (samples.empty()) return result;

  std::vector<ScoreItem> items;
  items.reserve(samples.size());
  for (const auto& s : samples) items.push_back({std::cref(s.context), std::cref(s.target)});
  BatchScores scores = score_batch(backend, items, FailureMode::Lenient);

  std::vector<std::size_t> scored;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto& row = result.manifest[i];
    row.index = i;
    row.id = samples[i].id;
    row.score = scores.rewards[i];
    if (row.score) scored.push_back(i);
  }
  for (const auto& e : scores.errors) result.manifest[e.index].error = e.message;
  result.failures = scores.errors.size();

  std::stable_sort(scored.begin(), scored.end(),
                   [&](std::size_t a, std::size_t b) { return *scores.rewards[a] > *scores.rewards[b]; });
  const std::size_t k = keep_count(keep_fraction, scored.size());
  for (std::size_t r = 0; r < scored.size(); ++r) {
    result.manifest[scored[r]].rank = r;
    result.manifest[scored[r]].kept = r < k;
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (result.manifest[i].kept) result.kept.push_back(i);
  }
  return result;
}

Json filter_manifest_to_json(const FilterResult& result) {
  Json rows = Json::array();
  for (const auto& r : result.manifest) {
    Json j = Json::object();
    j["index"] = r.index;
    j["id"] = r.id;
    j["score"] = r.score ? Json(*r.score) : Json(nullptr);
    j["rank"] = r.rank ? Json(*r.rank) : Json(nullptr);
    j["kept"] = r.kept;
    if (!r.error.empty()) j["error"] = r.error;
    rows.push_back(std::move(j));
  }
  Json j = Json::object();
  j["samples"] = result.manifest.size();
  j["kept"] = result.kept.size();
  j["failures"] = result.failures;
  j["rows"] = std::move(rows);
  return j;
}

}  // namespace toolrm
