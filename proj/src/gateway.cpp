#include "toolrm/gateway.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "toolrm/codec.hpp"
#include "toolrm/error.hpp"
#include "toolrm/matcher.hpp"
#include "toolrm/parse.hpp"
#include "toolrm/prompt.hpp"
#include "toolrm/records.hpp"
#include "toolrm/rng.hpp"

namespace toolrm {

std::string context_fingerprint(const ScoringContext& context) {
  Json j = Json::object();
  j["tools"] = catalog_to_json(context.catalog);
  j["conversation"] = conversation_to_json(context.conversation);
  const std::string text = canonical_dump(j);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return std::string(buf) + ":" + std::to_string(text.size());
}

std::string candidate_key(const ParsedCandidate& candidate) {
  return candidate.wellformed() ? canonical_key(candidate.sequence()) : "raw:" + candidate.malformed().raw_text;
}

// ---------------------------------------------------------------------------

void InFlightLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return current_ < cap_; });
  ++current_;
  high_water_ = std::max(high_water_, current_);
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --current_;
  }
  cv_.notify_one();
}

std::size_t InFlightLimiter::high_water() const {
  std::lock_guard lock(mu_);
  return high_water_;
}

HttpEndpoint parse_endpoint(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) throw UsageError("endpoint URL must start with http://: " + url);
  auto slash = url.find('/', scheme.size());
  HttpEndpoint ep;
  ep.origin = url.substr(0, slash);
  if (ep.origin.size() == scheme.size()) throw UsageError("endpoint URL has no host: " + url);
  if (slash != std::string::npos) {
    ep.path = url.substr(slash);
    while (!ep.path.empty() && ep.path.back() == '/') ep.path.pop_back();
  }
  return ep;
}

Json post_json(const HttpEndpoint& endpoint, const std::string& path, const Json& body,
               const HttpOptions& options, const std::function<void(const Json&)>& accept) {
  const std::string payload = body.dump();
  std::string cause = "no attempt made";
  auto backoff = options.retry.initial_backoff;
  const int attempts = std::max(1, options.retry.max_attempts);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(endpoint.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!options.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + options.bearer_token);

    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      cause = endpoint.origin + path + ": " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      cause = endpoint.origin + path + ": HTTP " + std::to_string(res->status) + " " + res->body;
      continue;
    }
    try {
      Json reply = Json::parse(res->body);
      accept(reply);
      return reply;
    } catch (const std::exception& e) {
      cause = endpoint.origin + path + ": malformed response: " + e.what();
    }
  }
  throw ScoreUnavailable(cause + " (after " + std::to_string(attempts) + " attempts)");
}

// ---------------------------------------------------------------------------

void GoldTable::add(const ScoringContext& context, GoldAnswer gold) {
  golds_.insert_or_assign(context_fingerprint(context), std::move(gold));
}

const GoldAnswer* GoldTable::find(const ScoringContext& context) const {
  auto it = golds_.find(context_fingerprint(context));
  return it == golds_.end() ? nullptr : &it->second;
}

GoldTable GoldTable::from_tasks(const std::vector<TaskRecord>& tasks) {
  GoldTable t;
  for (const auto& task : tasks) t.add(task.context, task.gold);
  return t;
}

GoldTable GoldTable::from_bench(const std::vector<BenchRecord>& records) {
  GoldTable t;
  for (const auto& r : records) t.add(r.context, gold_from_sequence(r.correct));
  return t;
}

bool is_pairwise(const ScorerBackend& backend) { return std::holds_alternative<JudgeBackend>(backend); }

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  if (!fallback.empty()) return fallback;
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid seed: " + text);
  }
}

GoldTable load_gold_table(const std::string& path) {
  auto lines = read_jsonl(path);
  GoldTable table;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      if (lines[i].contains("gold")) {
        auto t = task_from_json(lines[i]);
        table.add(t.context, t.gold);
      } else {
        auto b = bench_from_json(lines[i]);
        table.add(b.context, gold_from_sequence(b.correct));
      }
    } catch (const UsageError& e) {
      throw RecordError(path, i + 1, e.what());
    }
  }
  return table;
}

}  // namespace

ScorerBackend make_backend(const std::string& descriptor, const BackendOptions& options) {
  auto colon = descriptor.find(':');
  const std::string kind = descriptor.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : descriptor.substr(colon + 1);
  HttpOptions http = options.http;
  http.bearer_token = env_or("TOOLRM_BEARER_TOKEN", options.bearer_token);

  if (kind == "builtin") {
    if (arg.empty()) throw UsageError("builtin scorer needs a model path: builtin:PATH");
    auto model = std::make_shared<RewardModel>(load_model(arg));
    if (model->spec.version != kFeatureSpecVersion || model->weights.size() != kFeatureDimension) {
      throw UsageError("model " + arg + " was trained on features '" + model->spec.version + "', expected '" +
                       std::string(kFeatureSpecVersion) + "'");
    }
    return BuiltinBackend{std::move(model)};
  }
  if (kind == "remote") {
    const std::string url = env_or("TOOLRM_REMOTE_URL", arg);
    if (url.empty()) throw UsageError("remote scorer needs a URL: remote:URL");
    return RemoteBackend{parse_endpoint(url), http, std::make_shared<InFlightLimiter>(options.max_in_flight)};
  }
  if (kind == "oracle") {
    if (arg.empty()) throw UsageError("oracle scorer needs a gold file: oracle:PATH");
    return OracleBackend{std::make_shared<GoldTable>(load_gold_table(arg))};
  }
  if (kind == "random") {
    return RandomBackend{arg.empty() ? 0 : parse_seed(arg)};
  }
  if (kind == "judge") {
    const std::string url = env_or("TOOLRM_JUDGE_URL", arg);
    if (url.empty()) throw UsageError("judge scorer needs a URL: judge:URL");
    JudgeBackend j;
    j.endpoint = parse_endpoint(url);
    j.http = http;
    j.model = options.judge_model;
    j.seed = options.judge_seed;
    j.limiter = std::make_shared<InFlightLimiter>(options.max_in_flight);
    return j;
  }
  throw UsageError("unknown scorer descriptor '" + descriptor +
                   "' (expected builtin:PATH, remote:URL, oracle:PATH, random:SEED or judge:URL)");
}

Json score_request_json(const ScoringContext& context, const ParsedCandidate& candidate) {
  Json body = Json::object();
  body["tools"] = catalog_to_json(context.catalog);
  body["messages"] = conversation_to_json(context.conversation);
  body["candidate"] = candidate.wellformed() ? sequence_to_wire(candidate.sequence())
                                             : Json(candidate.malformed().raw_text);
  return body;
}

std::pair<ScoringContext, ParsedCandidate> score_request_from_json(const Json& body) {
  if (!body.is_object()) throw UsageError("request body must be a JSON object");
  for (const char* f : {"tools", "messages", "candidate"}) {
    if (!body.contains(f)) throw UsageError(std::string("missing \"") + f + "\"");
  }
  auto context = make_context(catalog_from_json(body.at("tools")), conversation_from_json(body.at("messages")));
  const Json& cand = body.at("candidate");
  ParsedCandidate candidate = cand.is_string() ? parse_tool_calls(cand.get<std::string>())
                                               : ParsedCandidate(sequence_from_json(cand));
  return {std::move(context), std::move(candidate)};
}

namespace {

struct ScoreVisitor {
  const ScoringContext& context;
  const ParsedCandidate& candidate;

  double operator()(const BuiltinBackend& b) const { return b.model->score(context, candidate); }

  double operator()(const RemoteBackend& b) const {
    InFlightLimiter::Guard guard(*b.limiter);
    Json reply = post_json(b.endpoint, b.endpoint.path + "/score", score_request_json(context, candidate), b.http,
                           [](const Json& r) {
                             if (!r.is_object() || !r.contains("reward") || !r.at("reward").is_number() ||
                                 !std::isfinite(r.at("reward").get<double>())) {
                               throw std::runtime_error("expected {\"reward\": <finite number>}");
                             }
                           });
    return reply.at("reward").get<double>();
  }

  double operator()(const OracleBackend& b) const {
    const GoldAnswer* gold = b.golds->find(context);
    if (!gold) throw UnknownQuery("context " + context_fingerprint(context));
    return match_sequence(candidate, *gold, context.catalog).correct ? 1.0 : 0.0;
  }

  double operator()(const RandomBackend& b) const {
    SplitMix64 rng(combine_seed(b.seed, context_fingerprint(context) + "\x1f" + candidate_key(candidate)));
    return rng.uniform01();
  }

  double operator()(const JudgeBackend&) const {
    throw UsageError("judge scorer compares pairs and cannot score a single candidate");
  }
};

}  // namespace

double score(const ScorerBackend& backend, const ScoringContext& context, const ParsedCandidate& candidate) {
  return std::visit(ScoreVisitor{context, candidate}, backend);
}

BatchScores score_batch(const ScorerBackend& backend, const std::vector<ScoreItem>& items, FailureMode mode) {
  BatchScores out;
  out.rewards.assign(items.size(), std::nullopt);
  std::vector<std::string> failures(items.size());
  std::vector<std::exception_ptr> raised(items.size());

  auto run_one = [&](std::size_t i) {
    try {
      out.rewards[i] = score(backend, items[i].context.get(), items[i].candidate.get());
    } catch (const std::exception& e) {
      failures[i] = e.what();
      raised[i] = std::current_exception();
    }
  };

  if (const auto* remote = std::get_if<RemoteBackend>(&backend); remote && items.size() > 1) {
    const std::size_t workers = std::min(remote->limiter->cap(), items.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          if (mode == FailureMode::Strict && stop.load()) return;
          const std::size_t i = next.fetch_add(1);
          if (i >= items.size()) return;
          run_one(i);
          if (raised[i]) stop.store(true);
        }
      });
    }
    for (auto& t : pool) t.join();
  } else {
    for (std::size_t i = 0; i < items.size(); ++i) {
      run_one(i);
      if (raised[i] && mode == FailureMode::Strict) break;
    }
  }

  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!raised[i]) continue;
    if (mode == FailureMode::Strict) std::rethrow_exception(raised[i]);
    out.errors.push_back({i, failures[i]});
  }
  return out;
}

// ---------------------------------------------------------------------------

Choice parse_verdict(const std::string& reply) {
  auto tag = reply.rfind("[VERDICT]");
  if (tag == std::string::npos) throw UnparseableVerdict("no [VERDICT] tag");
  const std::string tail = reply.substr(tag + 9);
  auto a = tail.find("[[A]]");
  auto b = tail.find("[[B]]");
  if (a == std::string::npos && b == std::string::npos) throw UnparseableVerdict("no [[A]] or [[B]] after [VERDICT]");
  return a < b ? Choice::A : Choice::B;
}

bool presentation_swap(std::uint64_t seed, const ScoringContext& context, const ParsedCandidate& a,
                       const ParsedCandidate& b) {
  SplitMix64 rng(combine_seed(seed, "judge\x1f" + context_fingerprint(context) + "\x1f" + candidate_key(a) + "\x1f" +
                                        candidate_key(b)));
  return (rng.next() >> 63) != 0;
}

JudgeVerdict judge_pair_presented(const JudgeBackend& backend, const ScoringContext& context,
                                  const ParsedCandidate& a, const ParsedCandidate& b, bool swapped) {
  if (backend.template_id != kJudgeTemplateId) throw UsageError("unknown judge template " + backend.template_id);
  const std::string prompt = swapped ? render_judge_prompt(context, b, a) : render_judge_prompt(context, a, b);
  Json body = Json::object();
  if (!backend.model.empty()) body["model"] = backend.model;
  Json msg = Json::object();
  msg["role"] = "user";
  msg["content"] = prompt;
  body["messages"] = Json::array({msg});
  body["temperature"] = backend.temperature;
  body["n"] = 1;
  body["seed"] = backend.seed;

  const std::string path = backend.endpoint.path.empty() ? "/v1/chat/completions" : backend.endpoint.path;
  InFlightLimiter::Guard guard(*backend.limiter);
  Json reply = post_json(backend.endpoint, path, body, backend.http, [](const Json& r) {
    if (!r.contains("choices") || !r.at("choices").is_array() || r.at("choices").empty() ||
        !r.at("choices")[0].contains("message") || !r.at("choices")[0].at("message").contains("content") ||
        !r.at("choices")[0].at("message").at("content").is_string()) {
      throw std::runtime_error("expected chat completion with choices[0].message.content");
    }
  });
  JudgeVerdict v;
  v.raw_text = reply.at("choices")[0].at("message").at("content").get<std::string>();
  v.presentation_swapped = swapped;
  Choice shown = parse_verdict(v.raw_text);
  v.preferred = swapped ? (shown == Choice::A ? Choice::B : Choice::A) : shown;
  return v;
}

JudgeVerdict judge_pair(const JudgeBackend& backend, const ScoringContext& context, const ParsedCandidate& a,
                        const ParsedCandidate& b) {
  return judge_pair_presented(backend, context, a, b, presentation_swap(backend.seed, context, a, b));
}

// ---------------------------------------------------------------------------

Json generation_messages(const ScoringContext& context) {
  Json messages = Json::array();
  Json sys = Json::object();
  sys["role"] = "system";
  sys["content"] = "You have the following tools available:\n\n" + render_tool_block(context.catalog) +
                   "\n\nRespond with the tool calls that fulfill the request as a JSON list in a ```json block, "
                   "each call written as {\"function_name\": {\"argument\": value}}. "
                   "Respond with [] if no tool can fulfill the request.";
  messages.push_back(std::move(sys));
  for (const auto& m : conversation_to_json(context.conversation)) messages.push_back(m);
  return messages;
}

std::vector<std::string> generate_candidates(const GeneratorEndpoint& endpoint, const ScoringContext& context,
                                             std::size_t n, double temperature, std::uint64_t seed) {
  if (n == 0) throw UsageError("generate_candidates: n must be >= 1");
  const std::string path = endpoint.endpoint.path.empty() ? "/v1/chat/completions" : endpoint.endpoint.path;
  const Json messages = generation_messages(context);
  std::vector<std::string> texts;
  texts.reserve(n);
  for (std::uint64_t request = 0; texts.size() < n; ++request) {
    Json body = Json::object();
    if (!endpoint.model.empty()) body["model"] = endpoint.model;
    body["messages"] = messages;
    body["n"] = n - texts.size();
    body["temperature"] = temperature;
    body["seed"] = seed + request;
    Json reply;
    try {
      reply = post_json(endpoint.endpoint, path, body, endpoint.http, [](const Json& r) {
        if (!r.contains("choices") || !r.at("choices").is_array() || r.at("choices").empty()) {
          throw std::runtime_error("expected a nonempty \"choices\" array");
        }
        for (const auto& c : r.at("choices")) {
          if (!c.contains("message") || !c.at("message").contains("content") ||
              !c.at("message").at("content").is_string()) {
            throw std::runtime_error("choice without message.content string");
          }
        }
      });
    } catch (const ScoreUnavailable&) {
      throw ShortBatch(texts.size(), n);
    }
    for (const auto& c : reply.at("choices")) {
      if (texts.size() == n) break;
      texts.push_back(c.at("message").at("content").get<std::string>());
    }
  }
  return texts;
}

}  // namespace toolrm
