#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "toolrm/cli.hpp"
#include "toolrm/trainer.hpp"

using namespace toolrm;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = toolrm::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fx(const char* name) { return testing::fixture(name).string(); }

/// Re-serializes a fixture through the record codec so byte comparisons see canonical lines.
std::string normalized_generations(const testing::TempDir& dir) {
  const auto path = dir.file("norm.jsonl");
  std::vector<Json> lines;
  for (const auto& g : load_generations(fx("smoke_generations.jsonl")).records) lines.push_back(generation_to_json(g));
  write_jsonl_atomic(path, lines);
  return path;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run_cli({"--help"}).code == kExitOk);
  CHECK(run_cli({"obfuscate", "--help"}).code == kExitOk);
  CHECK(run_cli({}).code == kExitUsage);
  CHECK(run_cli({"frobnicate"}).code == kExitUsage);
  CHECK(run_cli({"obfuscate", "--in", "x"}).code == kExitUsage);
  testing::TempDir dir;
  const auto missing = run_cli({"eval-bench", "--in", dir.file("none.jsonl"), "--out", dir.file("o.json"),
                                "--scorer", "random:1"});
  CHECK(missing.code == kExitUsage);
  CHECK(missing.err.find("none.jsonl") != std::string::npos);
  CHECK(run_cli({"eval-bench", "--in", fx("bench200.jsonl"), "--out", dir.file("o.json"), "--scorer", "nope:1"}).code ==
        kExitUsage);
  CHECK(run_cli({"filter", "--in", fx("smoke_tasks.jsonl"), "--out", dir.file("f.jsonl"), "--scorer", "random:1",
                 "--keep", "1.5"})
            .code == kExitUsage);
}

TEST_CASE("unreachable remote scorer is an operational failure") {
  testing::TempDir dir;
  const auto r = run_cli({"eval-bench", "--in", fx("bench200.jsonl"), "--out", dir.file("o.json"), "--scorer",
                          "remote:http://127.0.0.1:1", "--attempts", "1", "--timeout-ms", "200"});
  CHECK(r.code == kExitOperational);
}

TEST_CASE("metadata never records bearer tokens") {
  testing::TempDir dir;
  REQUIRE(run_cli({"eval-bench", "--in", fx("bench200.jsonl"), "--out", dir.file("o.json"), "--scorer", "random:1",
                   "--token", "s3cret"})
              .code == 0);
  const auto meta = read_file(dir.file("o.json.meta.json"));
  CHECK(meta.find("s3cret") == std::string::npos);
  CHECK(read_file(dir.file("o.json")).find("s3cret") == std::string::npos);
}

TEST_CASE("bad lines stop strict runs and are skipped leniently") {
  testing::TempDir dir;
  auto text = read_file(fx("bench200.jsonl"));
  text = text.substr(0, text.find('\n') + 1) + "{\"id\": \"broken\"}\n" + text.substr(text.find('\n') + 1);
  write_file_atomic(dir.file("bad.jsonl"), text);
  const auto strict = run_cli({"eval-bench", "--in", dir.file("bad.jsonl"), "--out", dir.file("o.json"), "--scorer", "random:1"});
  CHECK(strict.code == kExitUsage);
  CHECK(strict.err.find(":2:") != std::string::npos);
  const auto lenient = run_cli(
      {"eval-bench", "--in", dir.file("bad.jsonl"), "--out", dir.file("o.json"), "--scorer", "random:1", "--lenient"});
  CHECK(lenient.code == kExitOk);
  CHECK(Json::parse(read_file(dir.file("o.json"))).at("records") == 200);
}

TEST_CASE("obfuscation is deterministic and invertible through the CLI") {
  testing::TempDir dir;
  const auto in = normalized_generations(dir);
  auto obf = [&](const std::string& tag, const std::string& seed) {
    return run_cli({"obfuscate", "--in", in, "--out", dir.file(tag + ".jsonl"), "--map", dir.file(tag + ".map.json"),
                    "--seed", seed, "--shuffle-tools"});
  };
  REQUIRE(obf("a", "7").code == 0);
  REQUIRE(obf("b", "7").code == 0);
  REQUIRE(obf("c", "8").code == 0);
  CHECK(read_file(dir.file("a.jsonl")) == read_file(dir.file("b.jsonl")));
  CHECK(read_file(dir.file("a.map.json")) == read_file(dir.file("b.map.json")));
  CHECK(read_file(dir.file("a.jsonl")) != read_file(dir.file("c.jsonl")));
  CHECK(read_file(dir.file("a.jsonl")) != read_file(in));

  REQUIRE(run_cli({"obfuscate", "--in", dir.file("a.jsonl"), "--out", dir.file("back.jsonl"), "--map",
                   dir.file("a.map.json"), "--invert"})
              .code == 0);
  CHECK(read_file(dir.file("back.jsonl")) == read_file(in));

  const auto meta = Json::parse(read_file(dir.file("a.jsonl.meta.json")));
  CHECK(meta.at("command") == "obfuscate");
  CHECK(meta.contains("started_at"));
  CHECK(meta.at("config").at("obfuscate").at("seed") == 7);
}

TEST_CASE("config files supply defaults and flags override them") {
  testing::TempDir dir;
  const auto in = normalized_generations(dir);
  write_file_atomic(dir.file("cfg.json"), R"({"seed": 7, "shuffle_tools": true})");
  write_file_atomic(dir.file("scoped.json"), R"({"obfuscate": {"seed": 8, "shuffle-tools": true}})");
  auto obf = [&](const std::string& tag, std::vector<std::string> extra) {
    std::vector<std::string> args{"obfuscate", "--in", in, "--out", dir.file(tag + ".jsonl"), "--map",
                                  dir.file(tag + ".map.json")};
    args.insert(args.end(), extra.begin(), extra.end());
    return run_cli(args).code;
  };
  REQUIRE(obf("flags7", {"--seed", "7", "--shuffle-tools"}) == 0);
  REQUIRE(obf("flags8", {"--seed", "8", "--shuffle-tools"}) == 0);
  REQUIRE(obf("cfg", {"--config", dir.file("cfg.json")}) == 0);
  REQUIRE(obf("override", {"--config", dir.file("cfg.json"), "--seed", "8"}) == 0);
  REQUIRE(obf("scoped", {"--config", dir.file("scoped.json")}) == 0);
  CHECK(read_file(dir.file("cfg.jsonl")) == read_file(dir.file("flags7.jsonl")));
  CHECK(read_file(dir.file("override.jsonl")) == read_file(dir.file("flags8.jsonl")));
  CHECK(read_file(dir.file("scoped.jsonl")) == read_file(dir.file("flags8.jsonl")));

  write_file_atomic(dir.file("typo.json"), R"({"obfuscate": {"sede": 8}})");
  CHECK(obf("typo", {"--config", dir.file("typo.json")}) == kExitUsage);
  CHECK(obf("nocfg", {"--config", dir.file("absent.json")}) == kExitUsage);
}

TEST_CASE("pairs, train and evaluate end to end") {
  testing::TempDir dir;
  REQUIRE(run_cli({"pairs", "--in", fx("smoke_generations.jsonl"), "--out", dir.file("pairs.jsonl"), "--seed", "3"}).code == 0);
  const auto pairs = load_pairs(dir.file("pairs.jsonl")).records;
  CHECK(pairs.size() == 80);
  REQUIRE(run_cli({"pairs", "--in", fx("smoke_generations.jsonl"), "--out", dir.file("mix.jsonl"), "--seed", "3",
                   "--mix", "single=10,multi=10,irrel=5"})
              .code == 0);
  CHECK(load_pairs(dir.file("mix.jsonl")).records.size() == 25);
  CHECK(run_cli({"pairs", "--in", fx("smoke_generations.jsonl"), "--out", dir.file("big.jsonl"), "--mix",
                 "single=1000"})
            .code == kExitUsage);

  REQUIRE(run_cli({"train", "--pairs", dir.file("pairs.jsonl"), "--out", dir.file("m1.json"), "--epochs", "3",
                   "--batch-size", "16", "--seed", "1"})
              .code == 0);
  REQUIRE(run_cli({"train", "--pairs", dir.file("pairs.jsonl"), "--out", dir.file("m2.json"), "--epochs", "3",
                   "--batch-size", "16", "--seed", "1"})
              .code == 0);
  CHECK(read_file(dir.file("m1.json")) == read_file(dir.file("m2.json")));
  const auto report = Json::parse(read_file(dir.file("m1.json.report.json")));
  CHECK(report.at("pairs") == 80);
  CHECK(report.at("training").at("final_loss").get<double>() < report.at("training").at("initial_loss").get<double>());
  CHECK(load_model(dir.file("m1.json")).weights.size() == 16);

  REQUIRE(run_cli({"eval-bench", "--in", fx("bench200.jsonl"), "--out", dir.file("bench.json"), "--scorer",
                   "builtin:" + dir.file("m1.json")})
              .code == 0);
  const double acc = Json::parse(read_file(dir.file("bench.json"))).at("accuracy");
  CHECK(acc > 0.5);
}

TEST_CASE("rerank, downstream, filter, correlate and render") {
  testing::TempDir dir;
  const std::string oracle = "oracle:" + fx("smoke_tasks.jsonl");
  REQUIRE(run_cli({"rerank", "--in", fx("smoke_generations.jsonl"), "--out", dir.file("choices.jsonl"), "--scorer",
                   oracle, "--n", "6"})
              .code == 0);
  const auto choices = read_jsonl(dir.file("choices.jsonl"));
  CHECK(choices.size() == 80);
  CHECK(run_cli({"rerank", "--in", fx("smoke_generations.jsonl"), "--out", dir.file("x.jsonl"), "--n", "6"}).code ==
        kExitUsage);
  REQUIRE(run_cli({"rerank", "--in", fx("smoke_generations.jsonl"), "--out", dir.file("maj.jsonl"), "--strategy",
                   "majority", "--n", "6"})
              .code == 0);

  REQUIRE(run_cli({"eval-downstream", "--in", fx("smoke_generations.jsonl"), "--tasks", fx("smoke_tasks.jsonl"),
                   "--out", dir.file("down.json"), "--scorer", oracle, "--n", "6"})
              .code == 0);
  const auto down = Json::parse(read_file(dir.file("down.json")));
  CHECK(down.at("tasks") == 80);
  CHECK(down.at("errors").contains("Total"));
  CHECK(run_cli({"eval-downstream", "--in", fx("smoke_generations.jsonl"), "--out", dir.file("d.json"), "--scorer",
                 oracle, "--n", "7"})
            .code == kExitUsage);

  REQUIRE(run_cli({"filter", "--in", fx("smoke_tasks.jsonl"), "--out", dir.file("kept.jsonl"), "--scorer",
                   "random:4", "--keep", "0.25"})
              .code == 0);
  CHECK(read_jsonl(dir.file("kept.jsonl")).size() == 20);
  CHECK(Json::parse(read_file(dir.file("kept.jsonl.manifest.json"))).at("rows").size() == 80);

  write_file_atomic(dir.file("bench.json"), R"({"rm1": 0.6, "rm2": 0.7, "rm3": 0.9})");
  write_file_atomic(dir.file("down_acc.json"), R"([
    {"generator": "g", "benchmark": "b", "rm": "rm1", "accuracy": 0.3},
    {"generator": "g", "benchmark": "b", "rm": "rm2", "accuracy": 0.4},
    {"generator": "g", "benchmark": "b", "rm": "rm3", "accuracy": 0.6}])");
  REQUIRE(run_cli({"correlate", "--bench", dir.file("bench.json"), "--downstream", dir.file("down_acc.json"), "--out",
                   dir.file("corr.json")})
              .code == 0);
  CHECK(Json::parse(read_file(dir.file("corr.json"))).at("cells")[0].at("r").get<double>() == doctest::Approx(1.0));

  REQUIRE(run_cli({"render-prompt", "--in", fx("bench200.jsonl"), "--out", dir.file("prompts.jsonl")}).code == 0);
  const auto prompts = read_jsonl(dir.file("prompts.jsonl"));
  CHECK(!prompts.empty());
  CHECK(prompts[0].dump().find("<|im_start|>system") != std::string::npos);
  REQUIRE(run_cli({"render-prompt", "--in", fx("bench200.jsonl"), "--out", dir.file("judge.jsonl"), "--template",
                   "judge"})
              .code == 0);
  CHECK(read_jsonl(dir.file("judge.jsonl"))[0].dump().find("[VERDICT]") != std::string::npos);
}
