#include "toolrm/matcher.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "toolrm/error.hpp"
#include "toolrm/schema.hpp"

namespace toolrm {

namespace {

std::string at_call(std::size_t i, const std::string& name) {
  return "call " + std::to_string(i) + " (" + name + ")";
}

bool value_acceptable(const Json& value, const std::vector<Json>& acceptable) {
  const std::string key = canonical_dump(value);
  return std::any_of(acceptable.begin(), acceptable.end(),
                     [&](const Json& a) { return canonical_dump(a) == key; });
}

bool type_mismatch(const Json& value, const std::vector<Json>& acceptable, const ParamSpec* spec) {
  if (spec) return !conforms_to_type(value, *spec);
  if (acceptable.empty()) return false;
  const JsonKind kind = kind_of(value);
  return std::none_of(acceptable.begin(), acceptable.end(),
                      [&](const Json& a) { return kind_of(a) == kind; });
}

std::size_t priority_rank(ErrorClass cls) {
  auto it = std::find(kErrorPriority.begin(), kErrorPriority.end(), cls);
  return static_cast<std::size_t>(it - kErrorPriority.begin());
}

void compare_call(std::size_t i, const ToolCall& cand, const GoldCall& gold,
                  const ToolCatalog& catalog, std::vector<Discrepancy>& out) {
  if (cand.name != gold.name) {
    out.push_back({ErrorClass::IncorrectFunctionName,
                   "call " + std::to_string(i) + ": expected function " + gold.name + ", got " + cand.name});
    return;
  }
  const ToolSpec* tool = catalog.find(gold.name);
  for (const auto& [param, acceptable] : gold.arguments) {
    auto it = cand.arguments.find(param);
    if (it == cand.arguments.end()) {
      if (gold.optional_params.count(param)) continue;
      const bool schema_optional = tool && tool->find_param(param) && !tool->is_required(param);
      out.push_back({schema_optional ? ErrorClass::MissingOptionalParameter
                                     : ErrorClass::MissingRequiredParameter,
                     at_call(i, gold.name) + ": parameter " + param + " is missing"});
      continue;
    }
    if (value_acceptable(*it, acceptable)) continue;
    const ParamSpec* spec = tool ? tool->find_param(param) : nullptr;
    if (type_mismatch(*it, acceptable, spec)) {
      out.push_back({ErrorClass::IncorrectParameterType,
                     at_call(i, gold.name) + ": parameter " + param + " has wrong type: " + it->dump()});
    } else {
      out.push_back({ErrorClass::IncorrectParameterValue,
                     at_call(i, gold.name) + ": parameter " + param + " = " + it->dump() +
                         ", acceptable " + Json(acceptable).dump()});
    }
  }
  for (auto it = cand.arguments.begin(); it != cand.arguments.end(); ++it) {
    if (!gold.acceptable(it.key())) {
      out.push_back({ErrorClass::UnexpectedParameter,
                     at_call(i, gold.name) + ": unexpected parameter " + it.key()});
    }
  }
}

}  // namespace

std::vector<Discrepancy> find_discrepancies(const ParsedCandidate& candidate, const GoldAnswer& gold,
                                            const ToolCatalog& catalog) {
  std::vector<Discrepancy> out;
  if (!candidate.wellformed()) {
    out.push_back({ErrorClass::IncorrectOutputFormat,
                   "malformed output: " + candidate.malformed().diagnostic});
    return out;
  }
  const ToolCallSequence& seq = candidate.sequence();
  if (gold.calls.empty()) {
    if (!seq.empty()) {
      out.push_back({ErrorClass::IrrelevanceError,
                     "expected no call, got " + std::to_string(seq.size()) + " call(s)"});
    }
    return out;
  }
  if (seq.size() != gold.calls.size()) {
    out.push_back({ErrorClass::IncorrectNumberOfFunctions,
                   "expected " + std::to_string(gold.calls.size()) + " call(s), got " +
                       std::to_string(seq.size())});
    return out;
  }
  for (std::size_t i = 0; i < seq.size(); ++i) compare_call(i, seq.calls[i], gold.calls[i], catalog, out);
  return out;
}

MatchVerdict match_sequence(const ParsedCandidate& candidate, const GoldAnswer& gold,
                            const ToolCatalog& catalog) {
  auto found = find_discrepancies(candidate, gold, catalog);
  if (found.empty()) return MatchVerdict::Correct();
  // Stable: among equal-priority discrepancies the first discovered wins.
  auto best = std::min_element(found.begin(), found.end(), [](const Discrepancy& a, const Discrepancy& b) {
    return priority_rank(a.cls) < priority_rank(b.cls);
  });
  return MatchVerdict::Incorrect(best->cls, best->detail);
}

ErrorClass classify_error(const ParsedCandidate& candidate, const GoldAnswer& gold,
                          const ToolCatalog& catalog) {
  MatchVerdict v = match_sequence(candidate, gold, catalog);
  if (v.correct) throw UsageError("classify_error: candidate matches gold");
  return v.error;
}

int fsm_score(const ParsedCandidate& candidate, const GoldAnswer& gold, const ToolCatalog& catalog) {
  return match_sequence(candidate, gold, catalog).correct ? 1 : 0;
}

std::size_t ErrorHistogram::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

namespace {

// Row order of the error-analysis table, followed by the two classes it omits.
constexpr ErrorClass kReportOrder[] = {
    ErrorClass::IncorrectParameterValue,  ErrorClass::IrrelevanceError,
    ErrorClass::IncorrectOutputFormat,    ErrorClass::IncorrectFunctionName,
    ErrorClass::MissingOptionalParameter, ErrorClass::IncorrectParameterType,
    ErrorClass::IncorrectNumberOfFunctions, ErrorClass::MissingRequiredParameter,
    ErrorClass::UnexpectedParameter,
};

}  // namespace

Json error_report_json(const ErrorHistogram& histogram) {
  Json j = Json::object();
  for (ErrorClass cls : kReportOrder) j[std::string(report_label(cls))] = histogram.count(cls);
  j["Total"] = histogram.total();
  return j;
}

std::string error_report_table(const ErrorHistogram& histogram) {
  std::ostringstream os;
  os << std::left << std::setw(28) << "Error type" << "Count\n";
  for (ErrorClass cls : kReportOrder) {
    os << std::left << std::setw(28) << report_label(cls) << histogram.count(cls) << "\n";
  }
  os << std::left << std::setw(28) << "Total" << histogram.total() << "\n";
  return os.str();
}

}  // namespace toolrm
