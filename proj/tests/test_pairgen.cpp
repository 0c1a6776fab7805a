#include <doctest.h>

#include <cmath>
#include <set>

#include "support.hpp"
#include "toolrm/error.hpp"
#include "toolrm/matcher.hpp"
#include "toolrm/pairgen.hpp"
#include "toolrm/parse.hpp"

using namespace toolrm;
using testing::J;

namespace {

GenerationOutput out(const std::string& model, const std::string& text) {
  return {model, text, parse_tool_calls(text)};
}

GenerationRecord weather_record(const std::string& id, std::vector<GenerationOutput> outputs) {
  GenerationRecord r;
  r.query_id = id;
  r.context = testing::small_context();
  r.gold = gold_from_json(J(R"([{"get_weather": {"city": ["Paris"], "unit": ["celsius", ""]}}])"));
  r.outputs = std::move(outputs);
  return r;
}

const char* kCorrect = R"([{"get_weather": {"city": "Paris"}}])";
const char* kWrongCity = R"([{"get_weather": {"city": "Lyon"}}])";
const char* kWrongName = R"([{"get_wether": {"city": "Paris"}}])";

/// Smallest k with P(X <= k) >= q for X ~ Binomial(n, p), from log-space pmf sums.
std::size_t binomial_quantile(std::size_t n, double p, double q) {
  long double cdf = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    const long double logpmf = std::lgamma(n + 1.0L) - std::lgamma(k + 1.0L) - std::lgamma(n - k + 1.0L) +
                               k * std::log(static_cast<long double>(p)) +
                               (n - k) * std::log1p(-static_cast<long double>(p));
    cdf += std::exp(logpmf);
    if (cdf >= q) return k;
  }
  return n;
}

std::vector<PreferencePair> sliced(std::size_t n, const std::string& prefix) {
  std::vector<PreferencePair> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i].query_id = prefix + std::to_string(i);
  return v;
}

}  // namespace

TEST_CASE("harvest keeps only incorrect outputs") {
  auto rec = weather_record("q1", {out("a", kCorrect), out("b", kWrongCity), out("c", "not json")});
  const auto pool = harvest({rec});
  REQUIRE(pool.size() == 2);
  CHECK(pool[0].source_model == "b");
  CHECK(pool[0].error == ErrorClass::IncorrectParameterValue);
  CHECK(pool[1].error == ErrorClass::IncorrectOutputFormat);
  CHECK_FALSE(pool[1].candidate.wellformed());

  CHECK(harvest({weather_record("q2", {out("a", kCorrect), out("b", kCorrect)})}).empty());
  auto no_gold = rec;
  no_gold.gold.reset();
  CHECK(harvest({no_gold}).empty());
}

TEST_CASE("subsampling keeps one per query deterministically") {
  auto rec = weather_record("q1", {out("a", kWrongCity), out("b", kWrongName), out("c", "x"), out("d", "[1]"),
                                   out("e", R"([{"get_weather": {}}])")});
  const auto pool = harvest({rec, weather_record("q2", {out("a", kWrongCity)})});
  REQUIRE(pool.size() == 6);
  const auto one = subsample_per_query(pool, 7);
  REQUIRE(one.size() == 2);
  CHECK(one[0].query_id == "q1");
  CHECK(one[1].query_id == "q2");
  const auto again = subsample_per_query(pool, 7);
  CHECK(again[0].source_model == one[0].source_model);

  // The draw for a query ignores pool order and other queries.
  std::vector<PoolItem> reversed(pool.rbegin(), pool.rend());
  std::vector<PoolItem> q1_only(pool.begin(), pool.begin() + 5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = subsample_per_query(pool, seed);
    const auto b = subsample_per_query(q1_only, seed);
    CHECK(a[0].source_model == b[0].source_model);
    CHECK(subsample_per_query(reversed, seed).size() == 2);
  }
}

TEST_CASE("subsampling preserves source proportions within binomial noise") {
  constexpr std::size_t kQueries = 10000;
  std::vector<PoolItem> pool;
  for (std::size_t q = 0; q < kQueries; ++q) {
    for (int k = 0; k < 5; ++k) {
      PoolItem item;
      item.query_id = "q" + std::to_string(q);
      item.source_model = k < 4 ? "A" : "B";
      pool.push_back(item);
    }
  }
  const auto picked = subsample_per_query(pool, 2024);
  REQUIRE(picked.size() == kQueries);
  std::size_t b = 0;
  for (const auto& p : picked) b += p.source_model == "B";
  const auto lo = binomial_quantile(kQueries, 0.2, 0.0005);
  const auto hi = binomial_quantile(kQueries, 0.2, 0.9995);
  CHECK(lo < 2000);
  CHECK(hi > 2000);
  CHECK(b >= lo);
  CHECK(b <= hi);
}

TEST_CASE("pairs satisfy the preference invariants") {
  std::vector<GenerationRecord> recs;
  for (int i = 0; i < 10; ++i) {
    recs.push_back(weather_record("q" + std::to_string(i),
                                  {out("a", kWrongCity), out("b", kCorrect), out("c", kWrongName), out("d", "oops")}));
  }
  const auto pairs = build_pairs(subsample_per_query(harvest(recs), 3), recs);
  REQUIRE(pairs.size() == 10);
  std::set<std::string> ids;
  for (const auto& p : pairs) {
    ids.insert(p.query_id);
    const auto& gold = *recs[0].gold;
    CHECK(match_sequence(ParsedCandidate(p.chosen), gold, p.context.catalog).correct);
    CHECK_FALSE(match_sequence(p.rejected, gold, p.context.catalog).correct);
    REQUIRE(p.rejected_error);
    CHECK(*p.rejected_error == classify_error(p.rejected, gold, p.context.catalog));
    CHECK(canonical_key(p.chosen) ==
          canonical_key(testing::seq(R"([{"get_weather": {"city": "Paris", "unit": "celsius"}}])")));
  }
  CHECK(ids.size() == 10);
}

TEST_CASE("value-only difference is labeled as a value error") {
  auto rec = weather_record("q", {out("m", kWrongCity)});
  const auto pairs = build_pairs(harvest({rec}), {rec});
  REQUIRE(pairs.size() == 1);
  CHECK(*pairs[0].rejected_error == ErrorClass::IncorrectParameterValue);
  CHECK(pairs[0].source_model == "m");
}

TEST_CASE("materialized gold takes first values and drops optional blanks") {
  auto gold = gold_from_json(J(R"([{"get_weather": {"city": ["Rome", "Roma"], "unit": [""]}}])"));
  CHECK(canonical_key(materialize_gold(gold)) == canonical_key(testing::seq(R"([{"get_weather": {"city": "Rome"}}])")));
  GoldAnswer bad;
  bad.calls.push_back(GoldCall{"get_weather", {{"city", {}}}, {}});
  CHECK_THROWS_AS(materialize_gold(bad), GoldUnderspecified);
  auto rec = weather_record("q", {out("m", kWrongCity)});
  const auto pool = harvest({rec});
  rec.gold = bad;
  CHECK_THROWS_AS(build_pairs(pool, {rec}), GoldUnderspecified);
  CHECK_THROWS_AS(build_pairs(pool, {}), UsageError);
}

TEST_CASE("slice inference") {
  auto rec = weather_record("q", {});
  CHECK(infer_slice(rec) == Slice::SingleTurn);
  rec.context.conversation = {{Role::User, "a"}, {Role::Assistant, "b"}, {Role::User, "c"}};
  CHECK(infer_slice(rec) == Slice::MultiTurn);
  rec.gold = GoldAnswer{};
  CHECK(infer_slice(rec) == Slice::Irrelevance);
  rec.slice = Slice::SingleTurn;
  CHECK(infer_slice(rec) == Slice::SingleTurn);
}

TEST_CASE("mixture composition uses exact per-slice counts") {
  SlicedPairs slices{{Slice::SingleTurn, sliced(50, "s")},
                     {Slice::MultiTurn, sliced(50, "m")},
                     {Slice::Irrelevance, sliced(50, "i")}};
  const auto spec = parse_mixture("single=10,multi=10,irrel=2");
  const auto mixed = compose_mixture(slices, spec, 9);
  REQUIRE(mixed.size() == 22);
  std::map<char, int> counts;
  std::set<std::string> ids;
  for (const auto& p : mixed) {
    ++counts[p.query_id[0]];
    ids.insert(p.query_id);
  }
  CHECK(counts['s'] == 10);
  CHECK(counts['m'] == 10);
  CHECK(counts['i'] == 2);
  CHECK(ids.size() == 22);
  const auto again = compose_mixture(slices, spec, 9);
  for (std::size_t i = 0; i < mixed.size(); ++i) CHECK(mixed[i].query_id == again[i].query_id);
  // Shuffled: slices are interleaved rather than concatenated.
  bool interleaved = false;
  for (std::size_t i = 0; i < 10; ++i) interleaved |= mixed[i].query_id[0] != 's';
  CHECK(interleaved);
}

TEST_CASE("short slices are named") {
  SlicedPairs slices{{Slice::SingleTurn, sliced(50, "s")}, {Slice::MultiTurn, sliced(5, "m")}};
  try {
    compose_mixture(slices, parse_mixture("single=10,multi=10"), 1);
    FAIL("expected InsufficientData");
  } catch (const InsufficientData& e) {
    CHECK(e.slice() == "multi");
  }
}

TEST_CASE("mixture parsing and validation") {
  const auto big = parse_mixture("single=85000,multi=85000,irrel=10000");
  CHECK_FALSE(big.ratio_mode);
  CHECK(big.amount(Slice::Irrelevance) == 10000);
  CHECK_NOTHROW(validate_mixture(big));
  CHECK(resolve_counts(big, {85000, 85000, 10000}) == std::array<std::size_t, 3>{85000, 85000, 10000});

  const auto ratio = parse_mixture("single=0.5,multi=0.5,irrel=0.1");
  CHECK(ratio.ratio_mode);
  const auto counts = resolve_counts(ratio, {100, 30, 100});
  CHECK(counts[0] == 30);
  CHECK(counts[1] == 30);
  CHECK(counts[2] == 6);

  CHECK_THROWS_AS(parse_mixture("single=-1"), UsageError);
  CHECK_THROWS_AS(parse_mixture("single=0,multi=0"), UsageError);
  CHECK_THROWS_AS(parse_mixture("bogus=3"), UsageError);
  CHECK_THROWS_AS(parse_mixture("single=three"), UsageError);
  CHECK_THROWS_AS(parse_mixture(""), UsageError);
}
