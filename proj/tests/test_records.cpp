#include <doctest.h>

#include <fstream>

#include "support.hpp"
#include "toolrm/error.hpp"
#include "toolrm/records.hpp"

using namespace toolrm;

namespace {

const char* kBenchLine =
    R"({"id": "%s", "tools": [], "conversation": [{"role": "user", "content": "hi"}], "correct": [], "incorrect": [{"f": {}}]})";

std::string bench_line(const std::string& id) {
  std::string s = kBenchLine;
  return s.replace(s.find("%s"), 2, id);
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("loads a well-formed file") {
  testing::TempDir dir;
  write(dir.file("b.jsonl"), bench_line("a") + "\n" + bench_line("b") + "\n\n" + bench_line("c") + "\n");
  auto r = load_bench(dir.file("b.jsonl"));
  CHECK(r.records.size() == 3);
  CHECK(r.skipped.empty());
  CHECK(r.records[1].id == "b");
}

TEST_CASE("strict mode names the bad line, lenient mode skips it") {
  testing::TempDir dir;
  std::string bad = R"({"id": "x", "tools": [], "conversation": [{"role": "user", "content": "hi"}], "incorrect": []})";
  write(dir.file("b.jsonl"), bench_line("a") + "\n" + bad + "\n" + bench_line("c") + "\n");
  try {
    load_bench(dir.file("b.jsonl"));
    FAIL("expected RecordError");
  } catch (const RecordError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("correct") != std::string::npos);
  }
  auto r = load_bench(dir.file("b.jsonl"), LoadMode::Lenient);
  CHECK(r.records.size() == 2);
  REQUIRE(r.skipped.size() == 1);
  CHECK(r.skipped[0].line == 2);
}

TEST_CASE("bench records reject canonically equal sequences") {
  CHECK_THROWS_AS(bench_from_json(Json::parse(
                      R"({"id": "x", "tools": [], "conversation": [{"role": "user", "content": "hi"}],
                          "correct": [{"f": {"a": 1}}], "incorrect": [{"f": {"a": 1.0}}]})")),
                  UsageError);
}

TEST_CASE("missing file is an IoError with the path") {
  try {
    load_tasks("/definitely/not/here.jsonl");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/definitely/not/here.jsonl") != std::string::npos);
  }
}

TEST_CASE("record round trips") {
  for (const auto& j : read_jsonl(testing::fixture("smoke_generations.jsonl"))) {
    auto g = generation_from_json(j);
    CHECK(generation_to_json(generation_from_json(generation_to_json(g))) == generation_to_json(g));
  }
  for (const auto& j : read_jsonl(testing::fixture("smoke_tasks.jsonl"))) {
    auto t = task_from_json(j);
    CHECK(task_to_json(task_from_json(task_to_json(t))) == task_to_json(t));
  }
  for (const auto& j : read_jsonl(testing::fixture("bench200.jsonl"))) {
    auto b = bench_from_json(j);
    CHECK(bench_to_json(bench_from_json(bench_to_json(b))) == bench_to_json(b));
  }
}

TEST_CASE("format detection") {
  CHECK(detect_format(Json::parse(bench_line("a"))) == RecordFormat::Bench);
  CHECK(detect_format(Json::parse(R"({"chosen": []})")) == RecordFormat::Pairs);
  CHECK(detect_format(Json::parse(R"({"candidates": []})")) == RecordFormat::Generations);
  CHECK(detect_format(Json::parse(R"({"gold": []})")) == RecordFormat::Tasks);
  CHECK_FALSE(detect_format(Json::parse(R"({"x": 1})")).has_value());
}

TEST_CASE("atomic write replaces the file and leaves no temp") {
  testing::TempDir dir;
  write_file_atomic(dir.file("o.txt"), "one");
  write_file_atomic(dir.file("o.txt"), "two");
  CHECK(read_file(dir.file("o.txt")) == "two");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path)) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS_AS(write_file_atomic(dir.file("missing/o.txt"), "x"), IoError);
}
