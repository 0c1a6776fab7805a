#include "toolrm/json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace toolrm {

namespace {

Json canonical_number(const Json& value) {
  if (value.is_number_unsigned()) {
    auto u = value.get<std::uint64_t>();
    if (u <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      return Json(static_cast<std::int64_t>(u));
    }
    return value;
  }
  if (value.is_number_float()) {
    double d = value.get<double>();
    // 2^63 is exactly representable; anything below it truncates safely.
    constexpr double kLimit = 9223372036854775808.0;
    if (std::isfinite(d) && std::trunc(d) == d && d > -kLimit && d < kLimit) {
      return Json(static_cast<std::int64_t>(d));
    }
  }
  return value;
}

}  // namespace

Json canonical_value(const Json& value) {
  if (value.is_object()) {
    std::vector<std::string> keys;
    keys.reserve(value.size());
    for (auto it = value.begin(); it != value.end(); ++it) keys.push_back(it.key());
    std::sort(keys.begin(), keys.end());
    Json out = Json::object();
    for (const auto& k : keys) out[k] = canonical_value(value.at(k));
    return out;
  }
  if (value.is_array()) {
    Json out = Json::array();
    for (const auto& v : value) out.push_back(canonical_value(v));
    return out;
  }
  if (value.is_number()) return canonical_number(value);
  return value;
}

std::string canonical_dump(const Json& value) { return canonical_value(value).dump(); }

bool canonical_equal(const Json& a, const Json& b) { return canonical_dump(a) == canonical_dump(b); }

std::string spaced_dump(const Json& value) {
  if (value.is_object()) {
    std::string out = "{";
    bool first = true;
    for (auto it = value.begin(); it != value.end(); ++it) {
      if (!first) out += ", ";
      first = false;
      out += Json(it.key()).dump();
      out += ": ";
      out += spaced_dump(it.value());
    }
    return out + "}";
  }
  if (value.is_array()) {
    std::string out = "[";
    bool first = true;
    for (const auto& v : value) {
      if (!first) out += ", ";
      first = false;
      out += spaced_dump(v);
    }
    return out + "]";
  }
  return value.dump();
}

JsonKind kind_of(const Json& value) {
  switch (value.type()) {
    case Json::value_t::null: return JsonKind::Null;
    case Json::value_t::boolean: return JsonKind::Boolean;
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned:
    case Json::value_t::number_float: return JsonKind::Number;
    case Json::value_t::string: return JsonKind::String;
    case Json::value_t::array: return JsonKind::Array;
    case Json::value_t::object: return JsonKind::Object;
    default: return JsonKind::Null;
  }
}

bool is_integral_number(const Json& value) {
  if (value.is_number_integer() || value.is_number_unsigned()) return true;
  if (value.is_number_float()) {
    double d = value.get<double>();
    return std::isfinite(d) && std::trunc(d) == d;
  }
  return false;
}

}  // namespace toolrm
