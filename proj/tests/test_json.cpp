#include <doctest.h>

#include "support.hpp"
#include "toolrm/json.hpp"

using namespace toolrm;
using testing::J;

TEST_CASE("canonical_value sorts keys at every depth") {
  CHECK(canonical_dump(J(R"({"b": 1, "a": {"d": [ {"z": 1, "y": 2} ], "c": 2}})")) ==
        R"({"a":{"c":2,"d":[{"y":2,"z":1}]},"b":1})");
}

TEST_CASE("integral floats fold to integers") {
  CHECK(canonical_dump(J("5.0")) == "5");
  CHECK(canonical_dump(J("-0.0")) == "0");
  CHECK(canonical_dump(J("5.5")) == "5.5");
  CHECK(canonical_equal(J(R"({"a": 1.0})"), J(R"({"a": 1})")));
  CHECK_FALSE(canonical_equal(J(R"({"a": "1"})"), J(R"({"a": 1})")));
  CHECK_FALSE(canonical_equal(J("[1, 2]"), J("[2, 1]")));
}

TEST_CASE("canonical_value is idempotent") {
  const Json v = J(R"({"q": [3.0, {"b": 2.0, "a": null}], "p": true})");
  CHECK(canonical_value(canonical_value(v)) == canonical_value(v));
}

TEST_CASE("spaced_dump matches python separators") {
  CHECK(spaced_dump(J(R"({"a": [1, 2], "b": {"c": "é"}})")) == R"({"a": [1, 2], "b": {"c": "é"}})");
  CHECK(spaced_dump(J("[]")) == "[]");
  CHECK(spaced_dump(J("{}")) == "{}");
}

TEST_CASE("kind_of groups numbers") {
  CHECK(kind_of(J("1")) == JsonKind::Number);
  CHECK(kind_of(J("1.5")) == JsonKind::Number);
  CHECK(kind_of(J("\"1\"")) == JsonKind::String);
  CHECK(is_integral_number(J("2.0")));
  CHECK_FALSE(is_integral_number(J("2.5")));
  CHECK_FALSE(is_integral_number(J("\"2\"")));
}
