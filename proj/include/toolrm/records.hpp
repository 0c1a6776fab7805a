#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "toolrm/json.hpp"
#include "toolrm/types.hpp"

namespace toolrm {

enum class RecordFormat { Bench, Pairs, Generations, Tasks };

enum class LoadMode { Strict, Lenient };

struct LineDiagnostic {
  std::size_t line = 0;
  std::string reason;
};

template <class Record>
struct LoadResult {
  std::vector<Record> records;
  /// Lines rejected in lenient mode, with 1-based line numbers.
  std::vector<LineDiagnostic> skipped;
};

using AnyRecords = std::variant<LoadResult<BenchRecord>, LoadResult<PreferencePair>,
                                LoadResult<GenerationRecord>, LoadResult<TaskRecord>>;

// Per-line record decoders. Throw UsageError naming the offending field.
/// Guesses the record kind from its fields: "correct" (bench), "chosen"
/// (pairs), "candidates" (generations), otherwise "gold" (tasks).
std::optional<RecordFormat> detect_format(const Json& j);
std::optional<RecordFormat> record_format_from_string(const std::string& name);
std::string to_string(RecordFormat format);

BenchRecord bench_from_json(const Json& j);
PreferencePair pair_from_json(const Json& j);
GenerationRecord generation_from_json(const Json& j);
TaskRecord task_from_json(const Json& j);

Json bench_to_json(const BenchRecord& r);
Json pair_to_json(const PreferencePair& p);
Json generation_to_json(const GenerationRecord& g);
Json task_to_json(const TaskRecord& t);

/// Reads a JSONL file; blank lines are ignored. Strict mode throws RecordError
/// at the first bad line; lenient mode skips and records it. A missing or
/// unreadable file throws IoError naming the path.
LoadResult<BenchRecord> load_bench(const std::filesystem::path& path, LoadMode mode = LoadMode::Strict);
LoadResult<PreferencePair> load_pairs(const std::filesystem::path& path, LoadMode mode = LoadMode::Strict);
LoadResult<GenerationRecord> load_generations(const std::filesystem::path& path,
                                              LoadMode mode = LoadMode::Strict);
LoadResult<TaskRecord> load_tasks(const std::filesystem::path& path, LoadMode mode = LoadMode::Strict);

AnyRecords load_records(const std::filesystem::path& path, RecordFormat format,
                        LoadMode mode = LoadMode::Strict);

std::vector<Json> read_jsonl(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, so readers never observe a
/// partially written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
void write_jsonl_atomic(const std::filesystem::path& path, const std::vector<Json>& lines);

std::string read_file(const std::filesystem::path& path);

}  // namespace toolrm
