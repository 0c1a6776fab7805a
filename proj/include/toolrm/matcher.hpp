#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "toolrm/json.hpp"
#include "toolrm/types.hpp"

namespace toolrm {

struct MatchVerdict {
  bool correct = true;
  /// Meaningful only when !correct.
  ErrorClass error = ErrorClass::IncorrectParameterValue;
  /// Locates the first discrepancy of `error`; nonempty when !correct.
  std::string detail;

  static MatchVerdict Correct() { return {}; }
  static MatchVerdict Incorrect(ErrorClass cls, std::string detail) {
    return {false, cls, std::move(detail)};
  }
};

/// Classification priority, highest first. One sample yields one class.
inline constexpr std::array<ErrorClass, 9> kErrorPriority = {
    ErrorClass::IncorrectOutputFormat,     ErrorClass::IrrelevanceError,
    ErrorClass::IncorrectNumberOfFunctions, ErrorClass::IncorrectFunctionName,
    ErrorClass::MissingRequiredParameter,  ErrorClass::UnexpectedParameter,
    ErrorClass::IncorrectParameterType,    ErrorClass::IncorrectParameterValue,
    ErrorClass::MissingOptionalParameter,
};

/// One applicable error found while comparing candidate with gold.
struct Discrepancy {
  ErrorClass cls;
  std::string detail;
};

/// Every applicable discrepancy, in discovery order (call by call, gold
/// parameters first, then candidate-only parameters). Empty iff the candidate
/// matches gold. Calls are compared positionally; when counts differ no
/// per-call comparison is made.
std::vector<Discrepancy> find_discrepancies(const ParsedCandidate& candidate, const GoldAnswer& gold,
                                            const ToolCatalog& catalog);

/// Correct iff the candidate is wellformed, has gold's call count and each
/// call matches positionally: same name, every non-optional gold argument
/// present with an acceptable value, optional ones absent or acceptable, and
/// no argument outside the gold set. Numbers compare canonically; strings
/// compare exactly.
MatchVerdict match_sequence(const ParsedCandidate& candidate, const GoldAnswer& gold,
                            const ToolCatalog& catalog);

/// Highest-priority applicable class. Throws UsageError when the candidate
/// actually matches gold.
ErrorClass classify_error(const ParsedCandidate& candidate, const GoldAnswer& gold,
                          const ToolCatalog& catalog);

/// Full Sequence Matching: 1 iff match_sequence is Correct.
int fsm_score(const ParsedCandidate& candidate, const GoldAnswer& gold, const ToolCatalog& catalog);

/// Per-class error counts in report row order.
struct ErrorHistogram {
  std::array<std::size_t, 9> counts{};

  void add(ErrorClass cls) { ++counts[static_cast<std::size_t>(cls)]; }
  std::size_t count(ErrorClass cls) const { return counts[static_cast<std::size_t>(cls)]; }
  std::size_t total() const;
};

/// {"Incorrect Parameter Value": n, ..., "Total": n}, rows in the
/// downstream error-analysis table's order.
Json error_report_json(const ErrorHistogram& histogram);

/// Fixed-width text rendering of the same table.
std::string error_report_table(const ErrorHistogram& histogram);

}  // namespace toolrm
