#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "sentsel/corpus.hpp"
#include "sentsel/io.hpp"
#include "support.hpp"

using namespace sentsel;
using sentsel::testing::TempDir;
using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "sentsel");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::vector<std::vector<std::string>> pipeline(const std::string& d) {
  return {
      {"synth", "--out-dir", d + "/raw", "--documents", "24", "--distractors", "20", "--seed", "3"},
      {"ingest", "--assessments", d + "/raw/assessments.csv", "--texts", d + "/raw/texts",
       "--output", d + "/ingested.jsonl"},
      {"align", "--corpus", d + "/ingested.jsonl", "--assessments", d + "/raw/assessments.csv",
       "--output", d + "/corpus.jsonl", "--report", d + "/alignment.jsonl"},
      {"split", "--corpus", d + "/corpus.jsonl", "--output", d + "/split.json", "--ratios",
       "0.5,0,0.5", "--seed", "1"},
      {"train-ref", "--corpus", d + "/corpus.jsonl", "--split", d + "/split.json", "--output",
       d + "/doc.bin", "--epochs", "5"},
      {"score", "--corpus", d + "/corpus.jsonl", "--output", d + "/entropy.jsonl", "--signal",
       "entropy", "--model", d + "/doc.bin"},
      {"derive", "--corpus", d + "/corpus.jsonl", "--source", "entropy", "--signals",
       d + "/entropy.jsonl", "--split", d + "/split.json", "--output", d + "/examples.jsonl"},
      {"train-ref", "--examples", d + "/examples.jsonl", "--output", d + "/selector.bin",
       "--epochs", "5"},
      {"rank", "--corpus", d + "/corpus.jsonl", "--split", d + "/split.json", "--selector-model",
       d + "/selector.bin", "--output", d + "/rankings.jsonl"},
      {"--workers", "2", "classify", "--corpus", d + "/corpus.jsonl", "--split", d + "/split.json",
       "--rankings", d + "/rankings.jsonl", "--model", d + "/doc.bin", "--mode", "randomized",
       "--k", "5", "--pool", "10", "--output", d + "/predictions.jsonl"},
      {"eval", "--predictions", d + "/predictions.jsonl", "--corpus", d + "/corpus.jsonl",
       "--output", d + "/eval.json"},
      {"agree", "--selector", "trained=" + d + "/rankings.jsonl", "--evidence-truth",
       "human=" + d + "/corpus.jsonl", "--split", d + "/split.json", "--output",
       d + "/agree.json", "--csv", d + "/agree.csv"},
      {"bench", "--corpus", d + "/corpus.jsonl", "--split", d + "/split.json", "--rankings",
       d + "/rankings.jsonl", "--model", d + "/doc.bin", "--k", "5", "--repetitions", "1",
       "--exclude-timings", "--output", d + "/bench.json"},
  };
}

}  // namespace

TEST_CASE("help and usage errors") {
  auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("classify") != std::string::npos);

  auto none = run({});
  CHECK(none.code == 1);
  auto err = Json::parse(none.err);
  CHECK(err["kind"] == "usage");
  CHECK(err["exit_code"] == 1);

  auto unknown = run({"split", "--corpus", "x", "--output", "y", "--bogus"});
  CHECK(unknown.code == 1);
  CHECK(Json::parse(unknown.err)["kind"] == "usage");

  auto ratios = run({"split", "--corpus", "x", "--output", "y", "--ratios", "0.5,0.5"});
  CHECK(ratios.code == 1);
}

TEST_CASE("data and backend errors map to exit codes") {
  TempDir dir;
  auto missing = run({"eval", "--predictions", dir / "p.jsonl", "--corpus", dir / "c.jsonl",
                      "--output", dir / "r.json"});
  CHECK(missing.code == 2);
  auto err = Json::parse(missing.err);
  CHECK(err["kind"] == "data");
  CHECK(err["error"] == "IoError");

  REQUIRE(run({"synth", "--out-dir", dir.path().string(), "--documents", "4", "--distractors", "5"})
              .code == 0);
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  auto backend = run({"classify", "--corpus", dir / "corpus.jsonl", "--output", dir / "p.jsonl",
                      "--url", "http://127.0.0.1:" + std::to_string(port), "--timeout-ms", "300",
                      "--retries", "0"});
  CHECK(backend.code == 3);
  CHECK(Json::parse(backend.err)["kind"] == "backend");

  write_file(dir / "bad.jsonl", "{\"format\":\"sentsel-corpus\",\"version\":1}\n{oops\n");
  auto schema = run({"split", "--corpus", dir / "bad.jsonl", "--output", dir / "s.json"});
  CHECK(schema.code == 2);
  CHECK(Json::parse(schema.err)["message"].get<std::string>().find("line 2") != std::string::npos);
}

TEST_CASE("config files and precedence") {
  TempDir dir;
  REQUIRE(run({"synth", "--out-dir", dir.path().string(), "--documents", "40", "--distractors", "3"})
              .code == 0);
  auto split = [&](std::vector<std::string> extra, const std::string& name) {
    std::vector<std::string> args = {"split", "--corpus", dir / "corpus.jsonl", "--output", dir / name};
    args.insert(args.end(), extra.begin(), extra.end());
    auto r = run(args);
    REQUIRE(r.code == 0);
    return slurp(dir / name);
  };
  write_file(dir / "cfg.toml", "[split]\nseed = 5\nratios = \"0.5,0.25,0.25\"\n");
  auto from_config = split({"--config", dir / "cfg.toml"}, "a.json");
  auto from_flags = split({"--seed", "5", "--ratios", "0.5,0.25,0.25"}, "b.json");
  CHECK(from_config == from_flags);
  auto overridden = split({"--config", dir / "cfg.toml", "--seed", "6"}, "c.json");
  auto flags6 = split({"--seed", "6", "--ratios", "0.5,0.25,0.25"}, "d.json");
  CHECK(overridden == flags6);
  CHECK(overridden != from_config);

  write_file(dir / "bad.toml", "[split]\nbogus = 1\n");
  auto bad = run({"--config", dir / "bad.toml", "split", "--corpus", dir / "corpus.jsonl",
                  "--output", dir / "e.json"});
  CHECK(bad.code == 1);
}

TEST_CASE("pipeline is byte-identical on rerun") {
  TempDir a, b;
  for (auto* dir : {&a, &b}) {
    for (const auto& args : pipeline(dir->path().string())) {
      auto r = run(args);
      INFO(args[0], " ", r.err);
      REQUIRE(r.code == 0);
    }
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file()) continue;
    auto rel = fs::relative(entry.path(), a.path());
    INFO(rel.string());
    CHECK(slurp(entry.path().string()) == slurp((b.path() / rel).string()));
    ++compared;
  }
  CHECK(compared > 20);

  auto report = Json::parse(slurp(a / "eval.json"));
  CHECK(report["macro_f1"].get<double>() >= 0.0);
  auto bench = Json::parse(slurp(a / "bench.json"));
  REQUIRE(bench.size() == 2);
  CHECK(bench[1]["reduction_ratio"].get<double>() < 1.0);
  CHECK_FALSE(bench[0].contains("seconds"));
  auto corpus = load_corpus(a / "corpus.jsonl");
  CHECK(corpus.size() == 24);
  for (const auto& doc : corpus) CHECK(doc.evidence_indices.has_value());
}

TEST_CASE("eval of gold predictions and randomized llm classification") {
  TempDir dir;
  REQUIRE(run({"synth", "--out-dir", dir.path().string(), "--documents", "12", "--distractors", "10"})
              .code == 0);
  auto corpus = load_corpus(dir / "corpus.jsonl");
  std::vector<Prediction> golds;
  for (const auto& doc : corpus) {
    Prediction p;
    p.doc_id = doc.doc_id;
    p.category = *doc.label;
    golds.push_back(p);
  }
  {
    std::ofstream out(dir / "gold.jsonl");
    io::write_predictions(out, golds);
  }
  REQUIRE(run({"eval", "--predictions", dir / "gold.jsonl", "--corpus", dir / "corpus.jsonl",
               "--output", dir / "eval.json"})
              .code == 0);
  auto report = Json::parse(slurp(dir / "eval.json"));
  CHECK(report["macro_f1"] == 1.0);
  CHECK(report["micro_f1"] == 1.0);

  golds.back().doc_id = "not-in-corpus";
  {
    std::ofstream out(dir / "short.jsonl");
    io::write_predictions(out, golds);
  }
  CHECK(run({"eval", "--predictions", dir / "short.jsonl", "--corpus", dir / "corpus.jsonl",
             "--output", dir / "eval2.json"})
            .code == 2);

  REQUIRE(run({"rank", "--corpus", dir / "corpus.jsonl", "--evidence", "--output",
               dir / "rank.jsonl"})
              .code == 0);
  auto r = run({"classify", "--corpus", dir / "corpus.jsonl", "--rankings", dir / "rank.jsonl",
                "--echo-client", "--mode", "randomized", "--k", "15", "--pool", "30",
                "--samples", "10", "--seed", "7", "--output", dir / "pred.jsonl"});
  REQUIRE(r.code == 0);
  std::istringstream lines(slurp(dir / "pred.jsonl"));
  auto preds = io::read_predictions(lines);
  REQUIRE(preds.size() == 12);
  for (const auto& p : preds) {
    CHECK(p.sample_inputs_used == 10);
    std::size_t votes = 0;
    for (const auto& [_, n] : p.votes) votes += n;
    CHECK(votes + p.abstentions == 10);
  }
}
