#include <doctest.h>

#include <regex>
#include <set>

#include "generators.hpp"
#include "support.hpp"
#include "toolrm/error.hpp"
#include "toolrm/matcher.hpp"
#include "toolrm/obfuscator.hpp"

using namespace toolrm;
using testing::J;

namespace {

const std::regex kNamePattern("^[a-z][a-z0-9_]{7,11}$");

ToolCatalog weather_catalog() {
  return catalog_from_json(J(R"([{"name": "get_weather", "description": "Weather for get_weather users.",
    "parameters": {"type": "dict", "properties": {
      "city": {"type": "string", "description": "The city"},
      "unit": {"type": "string", "enum": ["celsius", "fahrenheit"], "description": "Unit"},
      "days": {"type": "integer", "description": "Days"}}, "required": ["city", "days"]}}])"));
}

std::string dump_sample(const ObfuscationSample& s) {
  Json j = Json::object();
  j["tools"] = catalog_to_json(s.context.catalog);
  j["conversation"] = conversation_to_json(s.context.conversation);
  Json seqs = Json::array();
  for (const auto& q : s.sequences) seqs.push_back(sequence_to_json(q));
  j["sequences"] = seqs;
  Json golds = Json::array();
  for (const auto& g : s.golds) golds.push_back(gold_to_json(g));
  j["golds"] = golds;
  return j.dump();
}

}  // namespace

TEST_CASE("map cardinality and name shape") {
  const auto m = build_map(weather_catalog(), 42);
  CHECK(m.functions.size() == 1);
  REQUIRE(m.params.count("get_weather") == 1);
  CHECK(m.params.at("get_weather").size() == 3);
  std::set<std::string> names;
  for (const auto& [_, n] : m.functions) names.insert(n);
  for (const auto& [_, n] : m.params.at("get_weather")) names.insert(n);
  CHECK(names.size() == 4);
  for (const auto& n : names) {
    CHECK(std::regex_match(n, kNamePattern));
    CHECK(is_obfuscated_name(n));
  }
}

TEST_CASE("empty catalog gives an empty map") { CHECK(build_map(ToolCatalog{}, 1).empty()); }

TEST_CASE("maps are deterministic per seed") {
  const auto cat = weather_catalog();
  CHECK(map_to_json(build_map(cat, 5)).dump() == map_to_json(build_map(cat, 5)).dump());
  CHECK(map_to_json(build_map(cat, 5)).dump() != map_to_json(build_map(cat, 6)).dump());
  CHECK(map_from_json(map_to_json(build_map(cat, 5))) == build_map(cat, 5));
}

TEST_CASE("substitution renames structure only") {
  ObfuscationSample s{make_context(weather_catalog(), {{Role::User, "get_weather for city Paris"}}),
                      {testing::seq(R"([{"get_weather": {"city": "Paris", "unit": "celsius"}}])")},
                      {}};
  const auto m = build_map(s.context.catalog, 3);
  const auto o = apply_map(s, m);
  const std::string fn = m.functions.at("get_weather");
  const std::string city = m.params.at("get_weather").at("city");
  REQUIRE(o.sequences[0].calls[0].name == fn);
  CHECK(o.sequences[0].calls[0].arguments.at(city) == "Paris");
  CHECK(o.sequences[0].calls[0].arguments.at(m.params.at("get_weather").at("unit")) == "celsius");
  CHECK(o.context.conversation[0].content == "get_weather for city Paris");
  const ToolSpec& tool = o.context.catalog.tools[0];
  CHECK(tool.description == "Weather for get_weather users.");
  CHECK(tool.find_param(m.params.at("get_weather").at("unit"))->enum_values->at(0) == "celsius");
  CHECK(tool.required == std::vector<std::string>{city, m.params.at("get_weather").at("days")});
  CHECK(dump_sample(apply_map(o, invert_map(m))) == dump_sample(s));
}

TEST_CASE("unmapped names are rejected") {
  const auto m = build_map(weather_catalog(), 3);
  CHECK_THROWS_AS(apply_map(testing::seq(R"([{"other": {}}])"), m), UnmappedName);
  CHECK_THROWS_AS(apply_map(testing::seq(R"([{"get_weather": {"zip": 1}}])"), m), UnmappedName);
  const std::vector<ToolCallSequence> refs{testing::seq(R"([{"other": {"zip": 1}}])")};
  const auto covered = build_map(weather_catalog(), 3, refs);
  CHECK_NOTHROW(apply_map(refs[0], covered));
}

TEST_CASE("no-call sample renames only the catalog") {
  ObfuscationSample s{make_context(weather_catalog(), {{Role::User, "hi"}}), {}, {}};
  const auto o = apply_map(s, build_map(s.context.catalog, 1));
  CHECK(o.sequences.empty());
  CHECK(o.context.catalog.tools[0].name != "get_weather");
}

TEST_CASE("inversion is an involution and undoes application") {
  SplitMix64 r(21);
  for (int i = 0; i < 200; ++i) {
    auto t = testing::random_triple(r);
    std::vector<ToolCallSequence> seqs;
    if (t.candidate.wellformed()) seqs.push_back(t.candidate.sequence());
    std::vector<ToolCallSequence> refs = seqs;
    refs.push_back(testing::gold_as_names(t.gold));
    const auto m = build_map(t.context.catalog, r.next(), refs, ObfuscationOptions{i % 2 == 0});
    CHECK(invert_map(invert_map(m)) == m);
    ObfuscationSample s{t.context, seqs, {t.gold}};
    CHECK(dump_sample(apply_map(apply_map(s, m), invert_map(m))) == dump_sample(s));
  }
}

TEST_CASE("verdicts survive obfuscation") {
  SplitMix64 r(99);
  for (int i = 0; i < 300; ++i) {
    auto t = testing::random_triple(r);
    std::vector<ToolCallSequence> refs{testing::gold_as_names(t.gold)};
    if (t.candidate.wellformed()) refs.push_back(t.candidate.sequence());
    const auto m = build_map(t.context.catalog, r.next(), refs);
    const auto before = match_sequence(t.candidate, t.gold, t.context.catalog);
    const auto after = match_sequence(apply_map(t.candidate, m), apply_map(t.gold, m), apply_map(t.context.catalog, m));
    CHECK(before.correct == after.correct);
    if (!before.correct) CHECK(before.error == after.error);
  }
}

TEST_CASE("property order is shuffled and tool order only on request") {
  ToolCatalog cat;
  for (int t = 0; t < 8; ++t) {
    ToolSpec spec;
    spec.name = "t" + std::to_string(t);
    for (int p = 0; p < 6; ++p) spec.properties.emplace_back("p" + std::to_string(p), ParamSpec{});
    cat.tools.push_back(spec);
  }
  const auto m = build_map(cat, 11);
  const auto plain = apply_map(cat, m);
  int reordered = 0;
  for (std::size_t t = 0; t < cat.tools.size(); ++t) {
    CHECK(plain.tools[t].name == m.functions.at(cat.tools[t].name));
    const auto& pm = m.params.at(cat.tools[t].name);
    for (std::size_t p = 0; p < 6; ++p) {
      if (plain.tools[t].properties[p].first != pm.at(cat.tools[t].properties[p].first)) {
        ++reordered;
        break;
      }
    }
  }
  CHECK(reordered > 0);
  const auto shuffled = apply_map(cat, build_map(cat, 11, {}, ObfuscationOptions{true}));
  bool moved = false;
  const auto m2 = build_map(cat, 11, {}, ObfuscationOptions{true});
  for (std::size_t t = 0; t < cat.tools.size(); ++t) moved |= shuffled.tools[t].name != m2.functions.at(cat.tools[t].name);
  CHECK(moved);
}

TEST_CASE("malformed candidates pass through unchanged") {
  const auto m = build_map(weather_catalog(), 2);
  ParsedCandidate bad = MalformedOutput{"[{\"get_weather\": ", "eof"};
  const auto out = apply_map(bad, m);
  REQUIRE_FALSE(out.wellformed());
  CHECK(out.malformed().raw_text == bad.malformed().raw_text);
}
