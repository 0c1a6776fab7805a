#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "toolrm/json.hpp"
#include "toolrm/trainer.hpp"
#include "toolrm/types.hpp"

namespace toolrm {

/// Stable identity of a scoring context (catalog + conversation).
std::string context_fingerprint(const ScoringContext& context);

/// Canonical identity of a candidate: the canonical call list, or "raw:" + text.
std::string candidate_key(const ParsedCandidate& candidate);

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

struct RetryPolicy {
  /// Total attempts, including the first.
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
};

/// Caps concurrent requests; shared by every copy of a backend.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(std::size_t cap) : cap_(cap == 0 ? 1 : cap) {}

  class Guard {
   public:
    explicit Guard(InFlightLimiter& l) : limiter_(l) { limiter_.acquire(); }
    ~Guard() { limiter_.release(); }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    InFlightLimiter& limiter_;
  };

  std::size_t cap() const { return cap_; }
  std::size_t high_water() const;

 private:
  void acquire();
  void release();

  std::size_t cap_;
  std::size_t current_ = 0;
  std::size_t high_water_ = 0;
  mutable std::mutex mu_;
  std::condition_variable cv_;
};

struct HttpEndpoint {
  /// e.g. "http://127.0.0.1:8080"
  std::string origin;
  /// Path component of the URL without trailing slash; may be empty.
  std::string path;
};

/// Accepts http://host[:port][/path]. Throws UsageError otherwise.
HttpEndpoint parse_endpoint(const std::string& url);

struct HttpOptions {
  std::chrono::milliseconds timeout{30000};
  RetryPolicy retry;
  std::string bearer_token;
};

/// POSTs JSON and validates the reply with `accept` (which throws on a bad
/// body). Timeouts, connection failures, non-2xx statuses and rejected bodies
/// are retried with exponential backoff; the last cause surfaces as
/// ScoreUnavailable.
Json post_json(const HttpEndpoint& endpoint, const std::string& path, const Json& body,
               const HttpOptions& options, const std::function<void(const Json&)>& accept);

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

/// Gold answers looked up by context fingerprint.
class GoldTable {
 public:
  void add(const ScoringContext& context, GoldAnswer gold);
  const GoldAnswer* find(const ScoringContext& context) const;
  std::size_t size() const { return golds_.size(); }

  static GoldTable from_tasks(const std::vector<TaskRecord>& tasks);
  /// Each record's correct sequence becomes a singleton-valued gold.
  static GoldTable from_bench(const std::vector<BenchRecord>& records);

 private:
  std::map<std::string, GoldAnswer> golds_;
};

struct BuiltinBackend {
  std::shared_ptr<const RewardModel> model;
};

struct RemoteBackend {
  HttpEndpoint endpoint;
  HttpOptions http;
  std::shared_ptr<InFlightLimiter> limiter = std::make_shared<InFlightLimiter>(4);
};

struct OracleBackend {
  std::shared_ptr<const GoldTable> golds;
};

struct RandomBackend {
  std::uint64_t seed = 0;
};

struct JudgeBackend {
  HttpEndpoint endpoint;
  HttpOptions http;
  std::string template_id = "judge_pairwise_v1";
  std::string model;
  double temperature = 0.0;
  std::uint64_t seed = 0;
  std::shared_ptr<InFlightLimiter> limiter = std::make_shared<InFlightLimiter>(4);
};

using ScorerBackend = std::variant<BuiltinBackend, RemoteBackend, OracleBackend, RandomBackend, JudgeBackend>;

bool is_pairwise(const ScorerBackend& backend);

/// Descriptor mini-language: builtin:PATH | remote:URL | oracle:PATH |
/// random:SEED | judge:URL. Oracle paths may hold tasks or bench records.
/// An empty URL falls back to TOOLRM_REMOTE_URL / TOOLRM_JUDGE_URL, and
/// TOOLRM_BEARER_TOKEN supplies a token when `bearer_token` is empty.
struct BackendOptions {
  HttpOptions http;
  std::size_t max_in_flight = 4;
  std::string bearer_token;
  std::string judge_model;
  std::uint64_t judge_seed = 0;
};

ScorerBackend make_backend(const std::string& descriptor, const BackendOptions& options = {});

/// Scalar reward for one candidate. Throws ScoreUnavailable, UnknownQuery, or
/// UsageError for pairwise-only backends.
double score(const ScorerBackend& backend, const ScoringContext& context, const ParsedCandidate& candidate);

/// Body of a /score request: {"tools","messages","candidate"}. Malformed
/// candidates travel as their raw text string.
Json score_request_json(const ScoringContext& context, const ParsedCandidate& candidate);

/// Inverse of score_request_json; throws UsageError.
std::pair<ScoringContext, ParsedCandidate> score_request_from_json(const Json& body);

struct ScoreItem {
  std::reference_wrapper<const ScoringContext> context;
  std::reference_wrapper<const ParsedCandidate> candidate;
};

struct ItemError {
  std::size_t index = 0;
  std::string message;
};

struct BatchScores {
  /// Positionally aligned with the input; nullopt where scoring failed.
  std::vector<std::optional<double>> rewards;
  std::vector<ItemError> errors;
};

enum class FailureMode { Strict, Lenient };

/// Scores every item. Remote backends run up to the limiter's cap of
/// requests concurrently. Strict mode rethrows the first failure (by index);
/// lenient mode records it and continues.
BatchScores score_batch(const ScorerBackend& backend, const std::vector<ScoreItem>& items,
                        FailureMode mode = FailureMode::Strict);

// ---------------------------------------------------------------------------
// Pairwise judge
// ---------------------------------------------------------------------------

enum class Choice { A, B };

struct JudgeVerdict {
  /// Refers to the caller's argument order, after undoing any swap.
  Choice preferred = Choice::A;
  std::string raw_text;
  bool presentation_swapped = false;
};

/// Letter chosen after the last [VERDICT] tag: the earliest of [[A]] / [[B]].
/// Throws UnparseableVerdict.
Choice parse_verdict(const std::string& reply);

/// Seeded fair coin for (seed, context, a, b).
bool presentation_swap(std::uint64_t seed, const ScoringContext& context, const ParsedCandidate& a,
                       const ParsedCandidate& b);

JudgeVerdict judge_pair(const JudgeBackend& backend, const ScoringContext& context, const ParsedCandidate& a,
                        const ParsedCandidate& b);

/// Same as judge_pair with an explicit presentation order.
JudgeVerdict judge_pair_presented(const JudgeBackend& backend, const ScoringContext& context,
                                  const ParsedCandidate& a, const ParsedCandidate& b, bool swapped);

// ---------------------------------------------------------------------------
// Generation client
// ---------------------------------------------------------------------------

struct GeneratorEndpoint {
  HttpEndpoint endpoint;
  HttpOptions http;
  std::string model;
};

/// Chat messages sent to a generator: a system turn with the tool block and
/// output-format instructions, then the conversation.
Json generation_messages(const ScoringContext& context);

/// Returns exactly n completions in order of receipt. When the endpoint
/// returns fewer choices than asked, the remainder is requested again with
/// seed + request index. Throws ShortBatch when the endpoint stops producing.
std::vector<std::string> generate_candidates(const GeneratorEndpoint& endpoint, const ScoringContext& context,
                                             std::size_t n, double temperature, std::uint64_t seed);

}  // namespace toolrm
