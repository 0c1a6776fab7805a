#include "toolrm/pairgen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "toolrm/error.hpp"
#include "toolrm/matcher.hpp"
#include "toolrm/rng.hpp"

namespace toolrm {

std::vector<PoolItem> harvest(const std::vector<GenerationRecord>& records) {
  std::vector<PoolItem> pool;
  for (const auto& rec : records) {
    if (!rec.gold) continue;
    for (const auto& out : rec.outputs) {
      MatchVerdict v = match_sequence(out.candidate, *rec.gold, rec.context.catalog);
      if (v.correct) continue;
      pool.push_back({rec.query_id, out.source_model, out.raw_text, out.candidate, v.error});
    }
  }
  return pool;
}

std::vector<PoolItem> subsample_per_query(const std::vector<PoolItem>& pool, std::uint64_t seed) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(pool[i].query_id);
    if (inserted) order.push_back(pool[i].query_id);
    it->second.push_back(i);
  }
  std::vector<PoolItem> out;
  out.reserve(order.size());
  for (const auto& qid : order) {
    const auto& members = groups[qid];
    SplitMix64 rng(combine_seed(seed, qid));
    out.push_back(pool[members[rng.below(members.size())]]);
  }
  return out;
}

ToolCallSequence materialize_gold(const GoldAnswer& gold) {
  ToolCallSequence seq;
  for (const auto& g : gold.calls) {
    ToolCall call;
    call.name = g.name;
    for (const auto& [param, values] : g.arguments) {
      if (values.empty()) {
        if (g.optional_params.count(param)) continue;
        throw GoldUnderspecified("gold call " + g.name + ": parameter " + param +
                                 " has no acceptable value");
      }
      call.arguments[param] = values.front();
    }
    seq.calls.push_back(std::move(call));
  }
  return seq;
}

std::vector<PreferencePair> build_pairs(const std::vector<PoolItem>& pool,
                                        const std::vector<GenerationRecord>& records) {
  std::unordered_map<std::string, const GenerationRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.query_id, &r);
  std::vector<PreferencePair> pairs;
  pairs.reserve(pool.size());
  for (const auto& item : pool) {
    auto it = by_id.find(item.query_id);
    if (it == by_id.end() || !it->second->gold) {
      throw UsageError("no gold record for query " + item.query_id);
    }
    const GenerationRecord& rec = *it->second;
    PreferencePair p;
    p.query_id = item.query_id;
    p.context = rec.context;
    p.chosen = materialize_gold(*rec.gold);
    p.rejected = item.candidate;
    p.rejected_error = item.error;
    p.source_model = item.source_model;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

Slice infer_slice(const GenerationRecord& record) {
  if (record.slice) return *record.slice;
  if (record.gold && record.gold->calls.empty()) return Slice::Irrelevance;
  std::size_t user_turns = 0;
  for (const auto& m : record.context.conversation) {
    if (m.role == Role::Tool) return Slice::MultiTurn;
    if (m.role == Role::User) ++user_turns;
  }
  return user_turns > 1 ? Slice::MultiTurn : Slice::SingleTurn;
}

MixtureSpec parse_mixture(const std::string& text) {
  MixtureSpec spec;
  std::stringstream ss(text);
  std::string part;
  bool any = false;
  while (std::getline(ss, part, ',')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) throw UsageError("mixture entry needs name=value: " + part);
    auto slice = slice_from_string(part.substr(0, eq));
    if (!slice) throw UsageError("unknown mixture slice: " + part.substr(0, eq));
    const std::string value = part.substr(eq + 1);
    double v = 0;
    try {
      std::size_t used = 0;
      v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw UsageError("mixture value is not a number: " + value);
    }
    if (value.find('.') != std::string::npos) spec.ratio_mode = true;
    spec.amounts[static_cast<std::size_t>(*slice)] = v;
    any = true;
  }
  if (!any) throw UsageError("empty mixture");
  validate_mixture(spec);
  return spec;
}

void validate_mixture(const MixtureSpec& spec) {
  bool positive = false;
  for (double a : spec.amounts) {
    if (!std::isfinite(a) || a < 0) throw UsageError("mixture amounts must be finite and nonnegative");
    if (!spec.ratio_mode && std::trunc(a) != a) throw UsageError("mixture counts must be integers");
    if (a > 0) positive = true;
  }
  if (!positive) throw UsageError("mixture needs at least one positive slice");
}

std::array<std::size_t, 3> resolve_counts(const MixtureSpec& spec,
                                          const std::array<std::size_t, 3>& available) {
  validate_mixture(spec);
  static constexpr Slice kSlices[] = {Slice::SingleTurn, Slice::MultiTurn, Slice::Irrelevance};
  std::array<std::size_t, 3> counts{};
  if (!spec.ratio_mode) {
    for (std::size_t i = 0; i < 3; ++i) {
      counts[i] = static_cast<std::size_t>(spec.amounts[i]);
      if (counts[i] > available[i]) {
        throw InsufficientData(std::string(to_string(kSlices[i])), counts[i], available[i]);
      }
    }
    return counts;
  }
  double sum = 0;
  for (double a : spec.amounts) sum += a;
  // Ratios like 0.5/1.1 are inexact; nudge before flooring so 29.999... counts as 30.
  auto floor_tol = [](double x) { return std::floor(x + 1e-9 * std::max(1.0, std::abs(x))); };
  // Largest total whose proportional shares every slice can cover.
  double total = -1;
  for (std::size_t i = 0; i < 3; ++i) {
    if (spec.amounts[i] <= 0) continue;
    double cap = floor_tol(static_cast<double>(available[i]) * sum / spec.amounts[i]);
    if (total < 0 || cap < total) total = cap;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    counts[i] = static_cast<std::size_t>(floor_tol(total * spec.amounts[i] / sum));
    if (counts[i] > available[i]) counts[i] = available[i];
  }
  return counts;
}

std::vector<PreferencePair> compose_mixture(const SlicedPairs& slices, const MixtureSpec& spec,
                                            std::uint64_t seed) {
  static constexpr Slice kSlices[] = {Slice::SingleTurn, Slice::MultiTurn, Slice::Irrelevance};
  std::array<std::size_t, 3> available{};
  for (std::size_t i = 0; i < 3; ++i) {
    auto it = slices.find(kSlices[i]);
    available[i] = it == slices.end() ? 0 : it->second.size();
  }
  const auto counts = resolve_counts(spec, available);

  std::vector<PreferencePair> out;
  for (std::size_t i = 0; i < 3; ++i) {
    if (counts[i] == 0) continue;
    const auto& items = slices.at(kSlices[i]);
    std::vector<std::size_t> idx(items.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    SplitMix64 rng(combine_seed(seed, std::string("slice:") + std::string(to_string(kSlices[i]))));
    seeded_shuffle(idx, rng);
    for (std::size_t k = 0; k < counts[i]; ++k) out.push_back(items[idx[k]]);
  }
  SplitMix64 rng(combine_seed(seed, "mixture"));
  seeded_shuffle(out, rng);
  return out;
}

}  // namespace toolrm
