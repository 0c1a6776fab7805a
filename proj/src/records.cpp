#include "toolrm/records.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "toolrm/codec.hpp"
#include "toolrm/error.hpp"
#include "toolrm/parse.hpp"

namespace toolrm {

namespace fs = std::filesystem;

namespace {

const Json& field(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw UsageError(std::string("missing \"") + name + "\"");
  return *it;
}

std::string string_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  throw UsageError(std::string("\"") + name + "\" must be a string");
}

ScoringContext context_from(const Json& j) {
  return make_context(catalog_from_json(field(j, "tools")),
                      conversation_from_json(field(j, "conversation")));
}

void put_context(Json& j, const ScoringContext& ctx) {
  j["tools"] = catalog_to_json(ctx.catalog);
  j["conversation"] = conversation_to_json(ctx.conversation);
}

std::optional<ErrorClass> error_field(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw UsageError(std::string("\"") + name + "\" must be a string");
  auto cls = error_class_from_string(it->get<std::string>());
  if (!cls) throw UsageError("unknown error class \"" + it->get<std::string>() + "\"");
  return cls;
}

// Generation candidates: a call array, a raw string, or an object carrying
// "source_model" plus either "text" or "calls".
GenerationOutput output_from_json(const Json& j) {
  GenerationOutput out;
  const Json* body = &j;
  if (j.is_object()) {
    out.source_model = j.value("source_model", std::string());
    if (auto t = j.find("text"); t != j.end()) {
      body = &*t;
    } else if (auto c = j.find("calls"); c != j.end()) {
      body = &*c;
    } else {
      throw UsageError("candidate object needs \"text\" or \"calls\"");
    }
  }
  if (body->is_string()) {
    out.raw_text = body->get<std::string>();
    out.candidate = parse_tool_calls(out.raw_text);
  } else {
    out.candidate = sequence_from_json(*body);
    out.raw_text = body->dump();
  }
  return out;
}

template <class Record, class Decode>
LoadResult<Record> load_with(const fs::path& path, LoadMode mode, Decode decode) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file: " + path.string());
  LoadResult<Record> result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Json j = Json::parse(line);
      if (!j.is_object()) throw UsageError("line is not a JSON object");
      result.records.push_back(decode(j));
    } catch (const std::exception& e) {
      std::string reason = e.what();
      if (mode == LoadMode::Strict) throw RecordError(path.string(), lineno, reason);
      result.skipped.push_back({lineno, std::move(reason)});
    }
  }
  if (in.bad()) throw IoError("read failure: " + path.string());
  return result;
}

}  // namespace

std::optional<RecordFormat> detect_format(const Json& j) {
  if (!j.is_object()) return std::nullopt;
  if (j.contains("correct")) return RecordFormat::Bench;
  if (j.contains("chosen")) return RecordFormat::Pairs;
  if (j.contains("candidates")) return RecordFormat::Generations;
  if (j.contains("gold")) return RecordFormat::Tasks;
  return std::nullopt;
}

std::optional<RecordFormat> record_format_from_string(const std::string& name) {
  if (name == "bench") return RecordFormat::Bench;
  if (name == "pairs") return RecordFormat::Pairs;
  if (name == "generations") return RecordFormat::Generations;
  if (name == "tasks") return RecordFormat::Tasks;
  return std::nullopt;
}

std::string to_string(RecordFormat format) {
  switch (format) {
    case RecordFormat::Bench: return "bench";
    case RecordFormat::Pairs: return "pairs";
    case RecordFormat::Generations: return "generations";
    case RecordFormat::Tasks: return "tasks";
  }
  return "bench";
}

BenchRecord bench_from_json(const Json& j) {
  BenchRecord r;
  r.id = string_field(j, "id");
  r.context = context_from(j);
  r.correct = sequence_from_json(field(j, "correct"));
  r.incorrect = sequence_from_json(field(j, "incorrect"));
  if (canonical_equal(r.correct, r.incorrect)) {
    throw UsageError("\"correct\" and \"incorrect\" are canonically equal");
  }
  r.error_type = error_field(j, "error_type");
  if (auto it = j.find("source_model"); it != j.end() && it->is_string()) {
    r.source_model = it->get<std::string>();
  }
  return r;
}

Json bench_to_json(const BenchRecord& r) {
  Json j = Json::object();
  j["id"] = r.id;
  put_context(j, r.context);
  j["correct"] = sequence_to_json(r.correct);
  j["incorrect"] = sequence_to_json(r.incorrect);
  if (r.error_type) j["error_type"] = std::string(to_string(*r.error_type));
  if (r.source_model) j["source_model"] = *r.source_model;
  return j;
}

PreferencePair pair_from_json(const Json& j) {
  PreferencePair p;
  p.query_id = string_field(j, "id");
  p.context = context_from(j);
  p.chosen = sequence_from_json(field(j, "chosen"));
  p.rejected = candidate_from_json(field(j, "rejected"));
  if (p.rejected.wellformed() && canonical_equal(p.chosen, p.rejected.sequence())) {
    throw UsageError("\"chosen\" and \"rejected\" are canonically equal");
  }
  p.rejected_error = error_field(j, "rejected_error");
  p.source_model = j.value("source_model", std::string());
  return p;
}

Json pair_to_json(const PreferencePair& p) {
  Json j = Json::object();
  j["id"] = p.query_id;
  put_context(j, p.context);
  j["chosen"] = sequence_to_json(p.chosen);
  j["rejected"] = candidate_to_json(p.rejected);
  if (p.rejected_error) j["rejected_error"] = std::string(to_string(*p.rejected_error));
  if (!p.source_model.empty()) j["source_model"] = p.source_model;
  return j;
}

GenerationRecord generation_from_json(const Json& j) {
  GenerationRecord g;
  g.query_id = string_field(j, "id");
  g.context = context_from(j);
  const Json& cands = field(j, "candidates");
  if (!cands.is_array()) throw UsageError("\"candidates\" must be an array");
  for (const auto& c : cands) g.outputs.push_back(output_from_json(c));
  if (auto it = j.find("gold"); it != j.end() && !it->is_null()) g.gold = gold_from_json(*it);
  if (auto it = j.find("slice"); it != j.end() && !it->is_null()) {
    auto s = it->is_string() ? slice_from_string(it->get<std::string>()) : std::nullopt;
    if (!s) throw UsageError("unknown slice " + it->dump());
    g.slice = s;
  }
  return g;
}

Json generation_to_json(const GenerationRecord& g) {
  Json j = Json::object();
  j["id"] = g.query_id;
  put_context(j, g.context);
  Json cands = Json::array();
  for (const auto& o : g.outputs) {
    Json body = candidate_to_json(o.candidate);
    if (o.source_model.empty()) {
      cands.push_back(std::move(body));
    } else {
      Json c = Json::object();
      c["source_model"] = o.source_model;
      c[o.candidate.wellformed() ? "calls" : "text"] = std::move(body);
      cands.push_back(std::move(c));
    }
  }
  j["candidates"] = std::move(cands);
  if (g.gold) j["gold"] = gold_to_json(*g.gold);
  if (g.slice) j["slice"] = std::string(to_string(*g.slice));
  return j;
}

TaskRecord task_from_json(const Json& j) {
  TaskRecord t;
  t.id = string_field(j, "id");
  t.context = context_from(j);
  t.gold = gold_from_json(field(j, "gold"));
  return t;
}

Json task_to_json(const TaskRecord& t) {
  Json j = Json::object();
  j["id"] = t.id;
  put_context(j, t.context);
  j["gold"] = gold_to_json(t.gold);
  return j;
}

LoadResult<BenchRecord> load_bench(const fs::path& path, LoadMode mode) {
  return load_with<BenchRecord>(path, mode, bench_from_json);
}

LoadResult<PreferencePair> load_pairs(const fs::path& path, LoadMode mode) {
  return load_with<PreferencePair>(path, mode, pair_from_json);
}

LoadResult<GenerationRecord> load_generations(const fs::path& path, LoadMode mode) {
  return load_with<GenerationRecord>(path, mode, generation_from_json);
}

LoadResult<TaskRecord> load_tasks(const fs::path& path, LoadMode mode) {
  return load_with<TaskRecord>(path, mode, task_from_json);
}

AnyRecords load_records(const fs::path& path, RecordFormat format, LoadMode mode) {
  switch (format) {
    case RecordFormat::Bench: return load_bench(path, mode);
    case RecordFormat::Pairs: return load_pairs(path, mode);
    case RecordFormat::Generations: return load_generations(path, mode);
    case RecordFormat::Tasks: return load_tasks(path, mode);
  }
  throw UsageError("unknown record format");
}

std::vector<Json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file: " + path.string());
  std::vector<Json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw RecordError(path.string(), lineno, e.what());
    }
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write output file: " + path.string());
    out << contents;
    out.flush();
    if (!out) throw IoError("write failure: " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename into place: " + path.string() + ": " + ec.message());
  }
}

void write_jsonl_atomic(const fs::path& path, const std::vector<Json>& lines) {
  std::string contents;
  for (const auto& j : lines) {
    contents += j.dump();
    contents += '\n';
  }
  write_file_atomic(path, contents);
}

}  // namespace toolrm
