#include "toolrm/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "toolrm/codec.hpp"
#include "toolrm/error.hpp"
#include "toolrm/evalsuite.hpp"
#include "toolrm/gateway.hpp"
#include "toolrm/matcher.hpp"
#include "toolrm/obfuscator.hpp"
#include "toolrm/pairgen.hpp"
#include "toolrm/parse.hpp"
#include "toolrm/prompt.hpp"
#include "toolrm/records.hpp"
#include "toolrm/reranker.hpp"
#include "toolrm/rng.hpp"
#include "toolrm/serve.hpp"
#include "toolrm/trainer.hpp"

namespace toolrm {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// --config handling: the JSON file is turned into extra flags, skipping any
// flag already given on the command line.
// ---------------------------------------------------------------------------

struct ConfigSplit {
  std::vector<std::string> args;
  std::string config_path;
};

ConfigSplit extract_config(const std::vector<std::string>& args) {
  ConfigSplit out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file argument");
      out.config_path = args[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      out.config_path = a.substr(9);
    } else {
      out.args.push_back(a);
    }
  }
  return out;
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

bool given_explicitly(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw UsageError("config values must be strings, numbers, booleans or arrays of those");
}

void append_config_value(std::vector<std::string>& extra, const std::string& flag, const Json& v,
                         const CLI::Option* opt) {
  if (v.is_null()) return;
  if (opt->get_expected_max() == 0) {
    if (!v.is_boolean()) throw UsageError("config key for flag " + flag + " must be a boolean");
    if (v.get<bool>()) extra.push_back(flag);
    return;
  }
  if (v.is_array()) {
    for (const auto& e : v) {
      extra.push_back(flag);
      extra.push_back(scalar_text(e));
    }
    return;
  }
  extra.push_back(flag);
  extra.push_back(scalar_text(v));
}

/// Top-level keys apply to the chosen subcommand when it has such a flag;
/// keys under a section named after the subcommand must all be valid flags.
std::vector<std::string> merge_config(const std::vector<std::string>& args, const std::string& path,
                                      CLI::App& app) {
  if (path.empty()) return args;
  Json cfg = Json::parse(read_file(path), nullptr, false);
  if (cfg.is_discarded() || !cfg.is_object()) throw UsageError("config file " + path + " is not a JSON object");

  CLI::App* sub = nullptr;
  std::size_t sub_pos = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!args[i].empty() && args[i][0] != '-') {
      sub = app.get_subcommand_no_throw(args[i]);
      sub_pos = i;
      break;
    }
  }
  if (!sub) return args;

  std::vector<std::string> extra;
  auto apply = [&](const std::string& key, const Json& v, bool strict) {
    const std::string flag = flag_name(key);
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt) {
      if (strict) throw UsageError("config key \"" + key + "\" is not an option of " + sub->get_name());
      return;
    }
    if (given_explicitly(args, flag)) return;
    append_config_value(extra, flag, v, opt);
  };
  for (const auto& [key, v] : cfg.items()) {
    if (key == sub->get_name() || app.get_subcommand_no_throw(key)) continue;
    apply(key, v, false);
  }
  if (auto it = cfg.find(sub->get_name()); it != cfg.end()) {
    if (!it->is_object()) throw UsageError("config section \"" + sub->get_name() + "\" must be an object");
    for (const auto& [key, v] : it->items()) apply(key, v, true);
  }
  std::vector<std::string> merged(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1);
  merged.insert(merged.end(), extra.begin(), extra.end());
  merged.insert(merged.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, args.end());
  return merged;
}

/// Effective option values as a config section that --config accepts back.
Json effective_config(const CLI::App& sub) {
  Json section = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    if (name == "token") {
      // Never persist credentials.
      if (opt->count() > 0) section[name] = "<redacted>";
      continue;
    }
    if (opt->get_expected_max() == 0) {
      section[name] = opt->count() > 0;
      continue;
    }
    std::string value;
    if (!opt->results().empty()) {
      value = opt->results().back();
    } else {
      value = opt->get_default_str();
    }
    if (value.empty()) continue;
    const Json number = Json::parse(value, nullptr, false);
    section[name] = !number.is_discarded() && number.is_number() ? number : Json(value);
  }
  Json cfg = Json::object();
  cfg[sub.get_name()] = std::move(section);
  return cfg;
}

// ---------------------------------------------------------------------------
// Shared pieces
// ---------------------------------------------------------------------------

struct Globals {
  bool lenient = false;
  std::string meta;
  std::uint64_t seed = 0;
};

struct ScorerFlags {
  std::string descriptor;
  std::size_t max_in_flight = 4;
  int timeout_ms = 30000;
  int attempts = 3;
  std::string token;
  std::string judge_model;
  std::uint64_t judge_seed = 0;
};

void add_scorer_flags(CLI::App* sub, ScorerFlags& f, bool required) {
  auto* opt = sub->add_option("--scorer", f.descriptor,
                              "Scorer: builtin:MODEL.json | remote:URL | oracle:GOLD.jsonl | random:SEED | judge:URL");
  if (required) opt->required();
  sub->add_option("--max-in-flight", f.max_in_flight, "Concurrent requests to remote scorers")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--timeout-ms", f.timeout_ms, "Per-request timeout for remote scorers")->capture_default_str();
  sub->add_option("--attempts", f.attempts, "Total attempts per remote request")->capture_default_str();
  sub->add_option("--token", f.token, "Bearer token for remote scorers")->envname("TOOLRM_BEARER_TOKEN");
  sub->add_option("--judge-model", f.judge_model, "Model name sent to a judge endpoint");
  sub->add_option("--judge-seed", f.judge_seed, "Seed for the judge's presentation-order coin")
      ->capture_default_str();
}

ScorerBackend build_scorer(const ScorerFlags& f) {
  BackendOptions o;
  o.http.timeout = std::chrono::milliseconds(f.timeout_ms);
  o.http.retry.max_attempts = f.attempts;
  o.max_in_flight = f.max_in_flight;
  o.bearer_token = f.token;
  o.judge_model = f.judge_model;
  o.judge_seed = f.judge_seed;
  return make_backend(f.descriptor, o);
}

void add_globals(CLI::App* sub, Globals& g, bool seeded) {
  sub->add_flag("--lenient", g.lenient, "Skip bad records and failed scores instead of stopping");
  sub->add_option("--meta", g.meta, "Run metadata file (default: OUT.meta.json)");
  if (seeded) sub->add_option("--seed", g.seed, "Random seed (default 0)")->capture_default_str();
}

FailureMode failure_mode(const Globals& g) { return g.lenient ? FailureMode::Lenient : FailureMode::Strict; }
LoadMode load_mode(const Globals& g) { return g.lenient ? LoadMode::Lenient : LoadMode::Strict; }

template <class R>
std::vector<R> take(LoadResult<R>&& loaded, const std::string& path, std::ostream& err) {
  for (const auto& d : loaded.skipped) err << "warning: " << path << ':' << d.line << ": skipped: " << d.reason << '\n';
  return std::move(loaded.records);
}

struct RunInfo {
  std::string command;
  std::vector<std::string> argv;
  Json config;
  std::string started_at;
  std::chrono::steady_clock::time_point t0;
};

void write_meta(const RunInfo& info, const Globals& g, const std::string& out_path, const Json& summary) {
  Json meta = Json::object();
  meta["tool"] = "toolrm";
  meta["version"] = kVersion;
  meta["command"] = info.command;
  std::vector<std::string> argv = info.argv;
  for (std::size_t i = 0; i < argv.size(); ++i) {
    if (argv[i] == "--token" && i + 1 < argv.size()) argv[++i] = "<redacted>";
    else if (argv[i].rfind("--token=", 0) == 0) argv[i] = "--token=<redacted>";
  }
  meta["argv"] = argv;
  meta["config"] = info.config;
  meta["started_at"] = info.started_at;
  meta["finished_at"] = utc_now();
  meta["elapsed_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - info.t0).count();
  meta["summary"] = summary;
  const std::string path = g.meta.empty() ? out_path + ".meta.json" : g.meta;
  write_file_atomic(path, meta.dump(2) + "\n");
}

void write_json(const std::string& path, const Json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

std::optional<RecordFormat> parse_format(const std::string& name) {
  if (name == "auto") return std::nullopt;
  auto f = record_format_from_string(name);
  if (!f) throw UsageError("unknown record format '" + name + "'");
  return f;
}

RecordFormat line_format(const Json& j, std::optional<RecordFormat> forced) {
  if (forced) return *forced;
  auto f = detect_format(j);
  if (!f) throw UsageError("cannot tell record kind (expected bench, pairs, generations or tasks fields)");
  return *f;
}

// ---------------------------------------------------------------------------
// obfuscate
// ---------------------------------------------------------------------------

struct ObfuscateFlags {
  std::string in, out, map, format = "auto";
  bool shuffle_tools = false;
  bool invert = false;
};

ToolCallSequence gold_names(const GoldAnswer& gold) {
  ToolCallSequence seq;
  for (const auto& c : gold.calls) {
    Json args = Json::object();
    for (const auto& [k, _] : c.arguments) args[k] = nullptr;
    seq.calls.push_back({c.name, std::move(args)});
  }
  return seq;
}

/// Decodes one record, maps it, and re-encodes it. `make` builds the map for
/// the record from its catalog and referenced sequences.
Json transform_record(const Json& line, RecordFormat format,
                      const std::function<ObfuscationMap(const std::string&, const ToolCatalog&,
                                                         const std::vector<ToolCallSequence>&)>& make) {
  switch (format) {
    case RecordFormat::Bench: {
      BenchRecord r = bench_from_json(line);
      const ObfuscationMap m = make(r.id, r.context.catalog, {r.correct, r.incorrect});
      ObfuscationSample s = apply_map(ObfuscationSample{r.context, {r.correct, r.incorrect}, {}}, m);
      r.context = std::move(s.context);
      r.correct = std::move(s.sequences[0]);
      r.incorrect = std::move(s.sequences[1]);
      return bench_to_json(r);
    }
    case RecordFormat::Pairs: {
      PreferencePair p = pair_from_json(line);
      std::vector<ToolCallSequence> seqs{p.chosen};
      if (p.rejected.wellformed()) seqs.push_back(p.rejected.sequence());
      const ObfuscationMap m = make(p.query_id, p.context.catalog, seqs);
      ObfuscationSample s = apply_map(ObfuscationSample{p.context, seqs, {}}, m);
      p.context = std::move(s.context);
      p.chosen = std::move(s.sequences[0]);
      if (p.rejected.wellformed()) p.rejected = ParsedCandidate(std::move(s.sequences[1]));
      return pair_to_json(p);
    }
    case RecordFormat::Generations: {
      GenerationRecord g = generation_from_json(line);
      std::vector<ToolCallSequence> seqs;
      for (const auto& o : g.outputs) {
        if (o.candidate.wellformed()) seqs.push_back(o.candidate.sequence());
      }
      std::vector<ToolCallSequence> referenced = seqs;
      std::vector<GoldAnswer> golds;
      if (g.gold) {
        referenced.push_back(gold_names(*g.gold));
        golds.push_back(*g.gold);
      }
      const ObfuscationMap m = make(g.query_id, g.context.catalog, referenced);
      ObfuscationSample s = apply_map(ObfuscationSample{g.context, seqs, golds}, m);
      g.context = std::move(s.context);
      std::size_t k = 0;
      for (auto& o : g.outputs) {
        if (o.candidate.wellformed()) o.candidate = ParsedCandidate(std::move(s.sequences[k++]));
      }
      if (g.gold) g.gold = std::move(s.golds[0]);
      return generation_to_json(g);
    }
    case RecordFormat::Tasks: {
      TaskRecord t = task_from_json(line);
      const ObfuscationMap m = make(t.id, t.context.catalog, {gold_names(t.gold)});
      ObfuscationSample s = apply_map(ObfuscationSample{t.context, {}, {t.gold}}, m);
      t.context = std::move(s.context);
      t.gold = std::move(s.golds[0]);
      return task_to_json(t);
    }
  }
  throw UsageError("unknown record format");
}

std::string record_id(const Json& line) {
  auto it = line.find("id");
  if (it == line.end()) throw UsageError("record has no \"id\"");
  return it->is_string() ? it->get<std::string>() : it->dump();
}

int cmd_obfuscate(const ObfuscateFlags& f, const Globals& g, const RunInfo& info, std::ostream& out,
                  std::ostream& err) {
  const auto forced = parse_format(f.format);
  const auto lines = read_jsonl(f.in);
  std::vector<Json> result;
  result.reserve(lines.size());
  std::size_t skipped = 0;

  if (f.invert) {
    Json doc = Json::parse(read_file(f.map), nullptr, false);
    if (doc.is_discarded() || !doc.contains("maps")) throw UsageError("map file " + f.map + " is not an obfuscation map");
    std::map<std::string, ObfuscationMap> inverse;
    for (const auto& e : doc.at("maps")) inverse[e.at("id").get<std::string>()] = invert_map(map_from_json(e.at("map")));
    for (std::size_t i = 0; i < lines.size(); ++i) {
      try {
        result.push_back(transform_record(lines[i], line_format(lines[i], forced),
                                          [&](const std::string& id, const ToolCatalog&,
                                              const std::vector<ToolCallSequence>&) {
                                            auto it = inverse.find(id);
                                            if (it == inverse.end()) throw UsageError("no map for record " + id);
                                            return it->second;
                                          }));
      } catch (const UsageError& e) {
        if (!g.lenient) throw RecordError(f.in, i + 1, e.what());
        err << "warning: " << f.in << ':' << i + 1 << ": skipped: " << e.what() << '\n';
        ++skipped;
      }
    }
    write_jsonl_atomic(f.out, result);
  } else {
    Json maps = Json::array();
    const ObfuscationOptions options{f.shuffle_tools};
    for (std::size_t i = 0; i < lines.size(); ++i) {
      try {
        Json map_json;
        Json rec = transform_record(lines[i], line_format(lines[i], forced),
                                    [&](const std::string& id, const ToolCatalog& catalog,
                                        const std::vector<ToolCallSequence>& referenced) {
                                      ObfuscationMap m =
                                          build_map(catalog, combine_seed(g.seed, id), referenced, options);
                                      map_json = map_to_json(m);
                                      return m;
                                    });
        Json entry = Json::object();
        entry["id"] = record_id(lines[i]);
        entry["map"] = std::move(map_json);
        maps.push_back(std::move(entry));
        result.push_back(std::move(rec));
      } catch (const UsageError& e) {
        if (!g.lenient) throw RecordError(f.in, i + 1, e.what());
        err << "warning: " << f.in << ':' << i + 1 << ": skipped: " << e.what() << '\n';
        ++skipped;
      }
    }
    Json doc = Json::object();
    doc["seed"] = g.seed;
    doc["shuffle_tools"] = f.shuffle_tools;
    doc["maps"] = std::move(maps);
    write_jsonl_atomic(f.out, result);
    write_json(f.map, doc);
  }
  out << (f.invert ? "restored " : "obfuscated ") << result.size() << " records";
  if (skipped) out << " (" << skipped << " skipped)";
  out << '\n';
  Json summary = Json::object();
  summary["records"] = result.size();
  summary["skipped"] = skipped;
  write_meta(info, g, f.out, summary);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// pairs
// ---------------------------------------------------------------------------

struct PairsFlags {
  std::string in, out, mix;
};

int cmd_pairs(const PairsFlags& f, const Globals& g, const RunInfo& info, std::ostream& out, std::ostream& err) {
  auto records = take(load_generations(f.in, load_mode(g)), f.in, err);
  const auto pool = harvest(records);
  const auto chosen = subsample_per_query(pool, g.seed);
  auto pairs = build_pairs(chosen, records);

  std::map<std::string, const GenerationRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.query_id, &r);
  SlicedPairs sliced;
  for (const auto& p : pairs) sliced[infer_slice(*by_id.at(p.query_id))].push_back(p);

  if (!f.mix.empty()) {
    const MixtureSpec spec = parse_mixture(f.mix);
    pairs = compose_mixture(sliced, spec, g.seed);
  }

  std::vector<Json> lines;
  lines.reserve(pairs.size());
  for (const auto& p : pairs) lines.push_back(pair_to_json(p));
  write_jsonl_atomic(f.out, lines);

  Json summary = Json::object();
  summary["records"] = records.size();
  summary["incorrect_outputs"] = pool.size();
  summary["pairs"] = pairs.size();
  Json per_slice = Json::object();
  for (const auto& p : pairs) {
    const std::string s(to_string(infer_slice(*by_id.at(p.query_id))));
    per_slice[s] = per_slice.value(s, 0) + 1;
  }
  summary["per_slice"] = per_slice;
  out << "records " << records.size() << ", incorrect outputs " << pool.size() << ", pairs " << pairs.size()
      << '\n';
  for (const auto& [s, n] : per_slice.items()) out << "  " << s << ": " << n.get<int>() << '\n';
  write_meta(info, g, f.out, summary);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainFlags {
  std::string pairs, out, report, scope = "batch";
  TrainerConfig config;
};

int cmd_train(TrainFlags f, const Globals& g, const RunInfo& info, std::ostream& out, std::ostream& err) {
  auto pairs = take(load_pairs(f.pairs, load_mode(g)), f.pairs, err);
  if (pairs.empty()) throw UsageError("no training pairs in " + f.pairs);
  f.config.seed = g.seed;
  if (f.scope == "batch") {
    f.config.centering_scope = CenteringScope::Batch;
  } else if (f.scope == "epoch") {
    f.config.centering_scope = CenteringScope::Epoch;
  } else {
    throw UsageError("--centering-scope must be batch or epoch");
  }
  f.config.validate();
  TrainingResult result = train(pairs, f.config);

  write_json(f.out, model_to_json(result.model));
  Json report = Json::object();
  report["pairs"] = pairs.size();
  report["config"] = config_to_json(f.config);
  report["training"] = report_to_json(result.report);
  const std::string report_path = f.report.empty() ? f.out + ".report.json" : f.report;
  write_json(report_path, report);

  out << "trained on " << pairs.size() << " pairs, " << result.report.steps << " steps\n"
      << "  loss " << fmt(result.report.initial_loss) << " -> " << fmt(result.report.final_loss)
      << ", train accuracy " << fmt(result.report.train_accuracy) << '\n';
  Json summary = Json::object();
  summary["report"] = report_path;
  write_meta(info, g, f.out, summary);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval-bench
// ---------------------------------------------------------------------------

struct EvalBenchFlags {
  std::string in, out;
  ScorerFlags scorer;
};

int cmd_eval_bench(const EvalBenchFlags& f, const Globals& g, const RunInfo& info, std::ostream& out,
                   std::ostream& err) {
  auto records = take(load_bench(f.in, load_mode(g)), f.in, err);
  const ScorerBackend backend = build_scorer(f.scorer);
  const BenchResult result = eval_bench(records, backend, failure_mode(g));
  write_json(f.out, bench_result_to_json(result));

  std::size_t wins = 0;
  for (const auto& r : result.rows) wins += r.win ? 1 : 0;
  out << "records   " << result.rows.size() << '\n'
      << "wins      " << wins << '\n'
      << "failures  " << result.failures << '\n'
      << "accuracy  " << fmt(result.accuracy) << '\n';
  for (const auto& r : result.rows) {
    if (!r.error.empty()) err << "warning: " << r.id << ": " << r.error << '\n';
  }
  Json summary = Json::object();
  summary["accuracy"] = result.accuracy;
  write_meta(info, g, f.out, summary);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// rerank / eval-downstream
// ---------------------------------------------------------------------------

struct RerankFlags {
  std::string in, out, tasks, strategy = "best_of_n";
  std::size_t n = 32;
  ScorerFlags scorer;
};

Strategy parse_strategy(const std::string& s) {
  auto st = strategy_from_string(s);
  if (!st) throw UsageError("--strategy must be best_of_n, majority or greedy");
  return *st;
}

std::optional<ScorerBackend> scorer_for(Strategy strategy, const ScorerFlags& flags) {
  if (strategy != Strategy::BestOfN) return std::nullopt;
  if (flags.descriptor.empty()) throw UsageError("best_of_n needs --scorer");
  return build_scorer(flags);
}

int cmd_rerank(const RerankFlags& f, const Globals& g, const RunInfo& info, std::ostream& out, std::ostream& err) {
  const Strategy strategy = parse_strategy(f.strategy);
  if (f.n == 0) throw UsageError("--n must be >= 1");
  auto records = take(load_generations(f.in, load_mode(g)), f.in, err);
  const auto backend = scorer_for(strategy, f.scorer);

  std::vector<Json> lines;
  for (const auto& r : records) {
    std::vector<ParsedCandidate> cands;
    for (const auto& o : r.outputs) cands.push_back(o.candidate);
    if (cands.size() < f.n && !g.lenient) {
      throw ShortCandidateSet("record " + r.query_id + " has " + std::to_string(cands.size()) + " candidates, " +
                              std::to_string(f.n) + " required");
    }
    cands.resize(std::min(cands.size(), f.n));
    Json line = Json::object();
    line["id"] = r.query_id;
    line["strategy"] = to_string(strategy);
    if (cands.empty()) {
      line["chosen_index"] = nullptr;
      line["candidate"] = nullptr;
      lines.push_back(std::move(line));
      continue;
    }
    std::size_t index = 0;
    Json rewards = nullptr;
    switch (strategy) {
      case Strategy::BestOfN: {
        BestOfNChoice c = best_of_n(cands, *backend, r.context, failure_mode(g));
        index = c.index;
        if (!c.rewards.empty()) {
          rewards = Json::array();
          for (const auto& v : c.rewards) rewards.push_back(v ? Json(*v) : Json(nullptr));
        }
        for (const auto& e : c.errors) err << "warning: " << r.query_id << '[' << e.index << "]: " << e.message << '\n';
        break;
      }
      case Strategy::Majority: index = majority_vote(cands); break;
      case Strategy::Greedy: index = greedy(cands); break;
    }
    line["chosen_index"] = index;
    line["candidate"] = candidate_to_json(cands[index]);
    if (!rewards.is_null()) line["rewards"] = std::move(rewards);
    lines.push_back(std::move(line));
  }
  write_jsonl_atomic(f.out, lines);
  out << "reranked " << lines.size() << " records with " << to_string(strategy) << " (n=" << f.n << ")\n";
  Json summary = Json::object();
  summary["records"] = lines.size();
  write_meta(info, g, f.out, summary);
  return kExitOk;
}

int cmd_eval_downstream(const RerankFlags& f, const Globals& g, const RunInfo& info, std::ostream& out,
                        std::ostream& err) {
  RerankConfig config;
  config.strategy = parse_strategy(f.strategy);
  config.n = f.n;
  config.failure_mode = failure_mode(g);
  auto generations = take(load_generations(f.in, load_mode(g)), f.in, err);

  std::vector<TaskRecord> tasks;
  if (!f.tasks.empty()) {
    tasks = take(load_tasks(f.tasks, load_mode(g)), f.tasks, err);
  } else {
    for (const auto& r : generations) {
      if (!r.gold) throw UsageError("generation " + r.query_id + " has no gold; pass --tasks");
      tasks.push_back({r.query_id, r.context, *r.gold});
    }
  }
  const auto backend = scorer_for(config.strategy, f.scorer);
  const ScorerBackend none = RandomBackend{};
  const DownstreamResult result = eval_downstream(join_tasks(tasks, generations), backend ? *backend : none, config);

  Json report = downstream_result_to_json(result);
  report["strategy"] = to_string(config.strategy);
  report["n"] = config.n;
  write_json(f.out, report);
  out << "tasks     " << result.rows.size() << '\n'
      << "correct   " << result.correct << '\n'
      << "accuracy  " << fmt(result.accuracy) << "\n\n"
      << error_report_table(result.histogram);
  Json summary = Json::object();
  summary["accuracy"] = result.accuracy;
  write_meta(info, g, f.out, summary);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// correlate
// ---------------------------------------------------------------------------

struct CorrelateFlags {
  std::string bench, downstream, out;
};

int cmd_correlate(const CorrelateFlags& f, const Globals& g, const RunInfo& info, std::ostream& out) {
  Json bench = Json::parse(read_file(f.bench), nullptr, false);
  Json down = Json::parse(read_file(f.downstream), nullptr, false);
  if (bench.is_discarded()) throw UsageError(f.bench + " is not valid JSON");
  if (down.is_discarded()) throw UsageError(f.downstream + " is not valid JSON");

  std::map<std::string, double> bench_scores;
  if (bench.is_object()) {
    for (const auto& [rm, acc] : bench.items()) bench_scores[rm] = acc.get<double>();
  } else if (bench.is_array()) {
    for (const auto& e : bench) bench_scores[e.at("rm").get<std::string>()] = e.at("accuracy").get<double>();
  } else {
    throw UsageError(f.bench + ": expected {RM: accuracy} or [{rm, accuracy}]");
  }
  if (!down.is_array()) throw UsageError(f.downstream + ": expected [{generator, benchmark, rm, accuracy}]");
  std::map<CellKey, double> downstream;
  for (const auto& e : down) {
    downstream[{e.at("generator").get<std::string>(), e.at("benchmark").get<std::string>(),
                e.at("rm").get<std::string>()}] = e.at("accuracy").get<double>();
  }
  const CorrelationTable table = correlation_matrix(bench_scores, downstream);
  write_json(f.out, correlation_to_json(table));

  out << std::left << std::setw(24) << "generator" << std::setw(20) << "benchmark" << "r\n";
  for (const auto& c : table.cells) {
    out << std::left << std::setw(24) << c.generator << std::setw(20) << c.benchmark
        << (c.r ? fmt(*c.r, 3) : "n/a (" + c.error + ")") << '\n';
  }
  for (const auto& [gen, avg] : table.generator_average) out << "avg " << gen << ": " << fmt(avg, 3) << '\n';
  if (table.overall_average) out << "avg correlation: " << fmt(*table.overall_average, 3) << '\n';
  Json summary = Json::object();
  summary["cells"] = table.cells.size();
  write_meta(info, g, f.out, summary);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// filter
// ---------------------------------------------------------------------------

struct FilterFlags {
  std::string in, out, manifest, format = "auto";
  double keep = 0.5;
  ScorerFlags scorer;
};

FilterSample filter_sample(const Json& line, RecordFormat format) {
  switch (format) {
    case RecordFormat::Pairs: {
      PreferencePair p = pair_from_json(line);
      return {p.query_id, p.context, ParsedCandidate(p.chosen)};
    }
    case RecordFormat::Tasks: {
      TaskRecord t = task_from_json(line);
      return {t.id, t.context, ParsedCandidate(materialize_gold(t.gold))};
    }
    case RecordFormat::Bench: {
      BenchRecord b = bench_from_json(line);
      return {b.id, b.context, ParsedCandidate(b.correct)};
    }
    case RecordFormat::Generations: {
      GenerationRecord g = generation_from_json(line);
      if (g.outputs.size() != 1) throw UsageError("filtering generations needs exactly one candidate per record");
      return {g.query_id, g.context, g.outputs.front().candidate};
    }
  }
  throw UsageError("unknown record format");
}

int cmd_filter(const FilterFlags& f, const Globals& g, const RunInfo& info, std::ostream& out, std::ostream& err) {
  const auto forced = parse_format(f.format);
  const auto lines = read_jsonl(f.in);
  std::vector<FilterSample> samples;
  std::vector<std::size_t> source_line;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      samples.push_back(filter_sample(lines[i], line_format(lines[i], forced)));
      source_line.push_back(i);
    } catch (const UsageError& e) {
      if (!g.lenient) throw RecordError(f.in, i + 1, e.what());
      err << "warning: " << f.in << ':' << i + 1 << ": skipped: " << e.what() << '\n';
    }
  }
  const ScorerBackend backend = build_scorer(f.scorer);
  const FilterResult result = filter_topk(samples, backend, f.keep);

  std::vector<Json> kept;
  for (std::size_t idx : result.kept) kept.push_back(lines[source_line[idx]]);
  write_jsonl_atomic(f.out, kept);
  const std::string manifest_path = f.manifest.empty() ? f.out + ".manifest.json" : f.manifest;
  Json manifest = filter_manifest_to_json(result);
  manifest["keep_fraction"] = f.keep;
  write_json(manifest_path, manifest);

  for (const auto& r : result.manifest) {
    if (!r.error.empty()) err << "warning: " << r.id << ": " << r.error << '\n';
  }
  out << "kept " << result.kept.size() << " of " << samples.size() << " samples";
  if (result.failures) out << " (" << result.failures << " failed to score)";
  out << '\n';
  Json summary = Json::object();
  summary["kept"] = result.kept.size();
  summary["manifest"] = manifest_path;
  write_meta(info, g, f.out, summary);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateFlags {
  std::string url, model, in, out, source;
  std::size_t n = 32;
  double temperature = 1.0;
  bool greedy = false;
  int timeout_ms = 60000;
  std::string token;
};

int cmd_generate(const GenerateFlags& f, const Globals& g, const RunInfo& info, std::ostream& out,
                 std::ostream& err) {
  if (f.url.empty()) throw UsageError("--url is required (or set TOOLRM_GENERATOR_URL)");
  auto tasks = take(load_tasks(f.in, load_mode(g)), f.in, err);
  GeneratorEndpoint ep;
  ep.endpoint = parse_endpoint(f.url);
  ep.http.timeout = std::chrono::milliseconds(f.timeout_ms);
  ep.http.bearer_token = f.token;
  ep.model = f.model;
  const std::size_t n = f.greedy ? 1 : f.n;
  const double temperature = f.greedy ? 0.0 : f.temperature;
  const std::string source = f.source.empty() ? f.model : f.source;

  std::vector<Json> lines;
  for (const auto& t : tasks) {
    GenerationRecord r;
    r.query_id = t.id;
    r.context = t.context;
    r.gold = t.gold;
    for (auto& text : generate_candidates(ep, t.context, n, temperature, combine_seed(g.seed, t.id))) {
      GenerationOutput o;
      o.source_model = source;
      o.candidate = parse_tool_calls(text);
      o.raw_text = std::move(text);
      r.outputs.push_back(std::move(o));
    }
    lines.push_back(generation_to_json(r));
  }
  write_jsonl_atomic(f.out, lines);
  out << "generated " << n << " candidates for " << lines.size() << " tasks\n";
  Json summary = Json::object();
  summary["tasks"] = lines.size();
  write_meta(info, g, f.out, summary);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// render-prompt
// ---------------------------------------------------------------------------

struct RenderFlags {
  std::string in, out, templ = "reward", format = "auto";
};

int cmd_render(const RenderFlags& f, const Globals& g, const RunInfo& info, std::ostream& out) {
  if (f.templ != "reward" && f.templ != "judge") throw UsageError("--template must be reward or judge");
  const bool judge = f.templ == "judge";
  const auto forced = parse_format(f.format);
  std::vector<Json> result;
  auto emit = [&](const std::string& id, const std::string& which, std::string prompt) {
    Json j = Json::object();
    j["id"] = id;
    j["candidate"] = which;
    j["template"] = std::string(judge ? kJudgeTemplateId : kRewardTemplateId);
    j["prompt"] = std::move(prompt);
    result.push_back(std::move(j));
  };
  const auto lines = read_jsonl(f.in);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      const RecordFormat format = line_format(lines[i], forced);
      if (judge && format != RecordFormat::Bench && format != RecordFormat::Pairs) {
        throw UsageError("judge prompts need bench or pairs records");
      }
      switch (format) {
        case RecordFormat::Bench: {
          const BenchRecord b = bench_from_json(lines[i]);
          const ParsedCandidate c(b.correct), w(b.incorrect);
          if (judge) {
            emit(b.id, "correct,incorrect", render_judge_prompt(b.context, c, w));
          } else {
            emit(b.id, "correct", render_reward_prompt(b.context, c));
            emit(b.id, "incorrect", render_reward_prompt(b.context, w));
          }
          break;
        }
        case RecordFormat::Pairs: {
          const PreferencePair p = pair_from_json(lines[i]);
          const ParsedCandidate c(p.chosen);
          if (judge) {
            emit(p.query_id, "chosen,rejected", render_judge_prompt(p.context, c, p.rejected));
          } else {
            emit(p.query_id, "chosen", render_reward_prompt(p.context, c));
            emit(p.query_id, "rejected", render_reward_prompt(p.context, p.rejected));
          }
          break;
        }
        case RecordFormat::Generations: {
          const GenerationRecord r = generation_from_json(lines[i]);
          for (std::size_t k = 0; k < r.outputs.size(); ++k) {
            emit(r.query_id, std::to_string(k), render_reward_prompt(r.context, r.outputs[k].candidate));
          }
          break;
        }
        case RecordFormat::Tasks: {
          const TaskRecord t = task_from_json(lines[i]);
          emit(t.id, "gold", render_reward_prompt(t.context, ParsedCandidate(materialize_gold(t.gold))));
          break;
        }
      }
    } catch (const UsageError& e) {
      if (!g.lenient) throw RecordError(f.in, i + 1, e.what());
    }
  }
  write_jsonl_atomic(f.out, result);
  out << "rendered " << result.size() << " prompts\n";
  Json summary = Json::object();
  summary["prompts"] = result.size();
  write_meta(info, g, f.out, summary);
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run_impl(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Outcome reward modeling toolkit for tool-calling language models", "toolrm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.footer(
      "Every subcommand accepts --config FILE.json; its values fill in flags not given on the command line.\n"
      "Top-level keys apply to any subcommand with a matching flag; a section named after the subcommand\n"
      "applies to it alone. Environment: TOOLRM_REMOTE_URL, TOOLRM_JUDGE_URL, TOOLRM_BEARER_TOKEN,\n"
      "TOOLRM_GENERATOR_URL. Exit status: 0 success, 1 operational failure, 2 usage or input error.");

  Globals g;
  std::string config_doc;
  auto config_flag = [&](CLI::App* sub) {
    sub->add_option("--config", config_doc, "JSON file supplying defaults for this command's flags");
  };

  ObfuscateFlags ob;
  auto* obfuscate = app.add_subcommand("obfuscate", "Rename functions and parameters and reorder schema keys");
  obfuscate->add_option("--in", ob.in, "Input JSONL (bench, pairs, generations or tasks)")->required();
  obfuscate->add_option("--out", ob.out, "Output JSONL")->required();
  obfuscate->add_option("--map", ob.map, "Map file: written, or read with --invert")->required();
  obfuscate->add_option("--format", ob.format, "Record kind: auto|bench|pairs|generations|tasks")
      ->capture_default_str();
  obfuscate->add_flag("--shuffle-tools", ob.shuffle_tools, "Also shuffle the order of tools in each catalog");
  obfuscate->add_flag("--invert", ob.invert, "Undo a previous obfuscation using --map");
  add_globals(obfuscate, g, true);
  config_flag(obfuscate);

  PairsFlags pf;
  auto* pairs = app.add_subcommand("pairs", "Build preference pairs from generations with gold answers");
  pairs->add_option("--in", pf.in, "Generations JSONL")->required();
  pairs->add_option("--out", pf.out, "Pairs JSONL")->required();
  pairs->add_option("--mix", pf.mix, "Mixture, e.g. single=100,multi=100,irrel=20 (decimals mean ratios)");
  add_globals(pairs, g, true);
  config_flag(pairs);

  TrainFlags tf;
  auto* trainc = app.add_subcommand("train", "Train the linear reward model on preference pairs");
  trainc->add_option("--pairs", tf.pairs, "Pairs JSONL")->required();
  trainc->add_option("--out", tf.out, "Model JSON")->required();
  trainc->add_option("--report", tf.report, "Training report (default: OUT.report.json)");
  trainc->add_option("--eta", tf.config.centering, "Reward-centering coefficient")->capture_default_str();
  trainc->add_option("--epochs", tf.config.epochs, "Epochs")->capture_default_str();
  trainc->add_option("--lr", tf.config.learning_rate, "Peak learning rate")->capture_default_str();
  trainc->add_option("--batch-size", tf.config.batch_size, "Pairs per step")->capture_default_str();
  trainc->add_option("--warmup", tf.config.warmup_fraction, "Warmup fraction of total steps")->capture_default_str();
  trainc->add_option("--centering-scope", tf.scope, "Centering penalty scope: batch|epoch")->capture_default_str();
  add_globals(trainc, g, true);
  config_flag(trainc);

  EvalBenchFlags eb;
  auto* evalb = app.add_subcommand("eval-bench", "Pairwise benchmark accuracy of a scorer");
  evalb->add_option("--in", eb.in, "Bench JSONL")->required();
  evalb->add_option("--out", eb.out, "Report JSON")->required();
  add_scorer_flags(evalb, eb.scorer, true);
  add_globals(evalb, g, false);
  config_flag(evalb);

  RerankFlags rf;
  auto* rerank = app.add_subcommand("rerank", "Pick one candidate per query");
  rerank->add_option("--in", rf.in, "Generations JSONL")->required();
  rerank->add_option("--out", rf.out, "Choices JSONL")->required();
  rerank->add_option("--strategy", rf.strategy, "best_of_n|majority|greedy")->capture_default_str();
  rerank->add_option("--n", rf.n, "Candidates considered per query")->capture_default_str();
  add_scorer_flags(rerank, rf.scorer, false);
  add_globals(rerank, g, false);
  config_flag(rerank);

  RerankFlags df;
  auto* evald = app.add_subcommand("eval-downstream", "Full-sequence accuracy of reranked generations");
  evald->add_option("--in", df.in, "Generations JSONL")->required();
  evald->add_option("--tasks", df.tasks, "Tasks JSONL with gold (default: gold inside generations)");
  evald->add_option("--out", df.out, "Report JSON")->required();
  evald->add_option("--strategy", df.strategy, "best_of_n|majority|greedy")->capture_default_str();
  evald->add_option("--n", df.n, "Candidates considered per task")->capture_default_str();
  add_scorer_flags(evald, df.scorer, false);
  add_globals(evald, g, false);
  config_flag(evald);

  CorrelateFlags cf;
  auto* correlate = app.add_subcommand("correlate", "Correlate benchmark and downstream accuracy across reward models");
  correlate->add_option("--bench", cf.bench, "JSON {RM: accuracy}")->required();
  correlate->add_option("--downstream", cf.downstream, "JSON [{generator, benchmark, rm, accuracy}]")->required();
  correlate->add_option("--out", cf.out, "Report JSON")->required();
  add_globals(correlate, g, false);
  config_flag(correlate);

  FilterFlags ff;
  auto* filter = app.add_subcommand("filter", "Keep the top-scoring fraction of samples");
  filter->add_option("--in", ff.in, "Samples JSONL (pairs, tasks, bench or single-candidate generations)")->required();
  filter->add_option("--out", ff.out, "Kept samples JSONL")->required();
  filter->add_option("--manifest", ff.manifest, "Score manifest (default: OUT.manifest.json)");
  filter->add_option("--keep", ff.keep, "Fraction kept, in (0, 1]")->capture_default_str();
  filter->add_option("--format", ff.format, "Record kind: auto|bench|pairs|generations|tasks")->capture_default_str();
  add_scorer_flags(filter, ff.scorer, true);
  add_globals(filter, g, false);
  config_flag(filter);

  std::string serve_model, serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::size_t serve_threads = 8;
  auto* serve = app.add_subcommand("serve", "Serve a trained model over the /score protocol");
  serve->add_option("--model", serve_model, "Model JSON")->required();
  serve->add_option("--host", serve_host, "Bind address")->capture_default_str();
  serve->add_option("--port", serve_port, "Port (0 picks a free one)")->capture_default_str();
  serve->add_option("--threads", serve_threads, "Worker threads")->capture_default_str();
  config_flag(serve);

  GenerateFlags gf;
  auto* generate = app.add_subcommand("generate", "Sample candidates from a chat-completions endpoint");
  generate->add_option("--url", gf.url, "Endpoint URL")->envname("TOOLRM_GENERATOR_URL");
  generate->add_option("--model", gf.model, "Model name sent to the endpoint");
  generate->add_option("--source", gf.source, "source_model label (default: --model)");
  generate->add_option("--in", gf.in, "Tasks JSONL")->required();
  generate->add_option("--out", gf.out, "Generations JSONL")->required();
  generate->add_option("--n", gf.n, "Candidates per task")->capture_default_str();
  generate->add_option("--temperature", gf.temperature, "Sampling temperature")->capture_default_str();
  generate->add_flag("--greedy", gf.greedy, "One candidate at temperature 0");
  generate->add_option("--timeout-ms", gf.timeout_ms, "Per-request timeout")->capture_default_str();
  generate->add_option("--token", gf.token, "Bearer token")->envname("TOOLRM_BEARER_TOKEN");
  add_globals(generate, g, true);
  config_flag(generate);

  RenderFlags rd;
  auto* render = app.add_subcommand("render-prompt", "Render reward or judge prompts for records");
  render->add_option("--in", rd.in, "Input JSONL")->required();
  render->add_option("--out", rd.out, "Prompts JSONL")->required();
  render->add_option("--template", rd.templ, "reward|judge")->capture_default_str();
  render->add_option("--format", rd.format, "Record kind: auto|bench|pairs|generations|tasks")->capture_default_str();
  add_globals(render, g, false);
  config_flag(render);

  const ConfigSplit split = extract_config(raw_args);
  std::vector<std::string> args = merge_config(split.args, split.config_path, app);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  RunInfo info{sub->get_name(), args, effective_config(*sub), utc_now(), std::chrono::steady_clock::now()};

  if (sub == obfuscate) return cmd_obfuscate(ob, g, info, out, err);
  if (sub == pairs) return cmd_pairs(pf, g, info, out, err);
  if (sub == trainc) return cmd_train(tf, g, info, out, err);
  if (sub == evalb) return cmd_eval_bench(eb, g, info, out, err);
  if (sub == rerank) return cmd_rerank(rf, g, info, out, err);
  if (sub == evald) return cmd_eval_downstream(df, g, info, out, err);
  if (sub == correlate) return cmd_correlate(cf, g, info, out);
  if (sub == filter) return cmd_filter(ff, g, info, out, err);
  if (sub == serve) return serve_score(serve_model, serve_host, serve_port, serve_threads);
  if (sub == generate) return cmd_generate(gf, g, info, out, err);
  if (sub == render) return cmd_render(rd, g, info, out);
  throw UsageError("unknown command");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run_impl(args, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.category() == ErrorCategory::Usage ? kExitUsage : kExitOperational;
  } catch (const Json::exception& e) {
    err << "error: invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitOperational;
  }
}

int run(const std::vector<std::string>& args) { return run(args, std::cout, std::cerr); }

}  // namespace toolrm
