#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sentsel/error.hpp"
#include "sentsel/io.hpp"
#include "support.hpp"

using namespace sentsel;
using sentsel::testing::make_doc;

namespace {

template <typename Fn>
void expect_schema_line(const std::string& text, std::size_t line, Fn&& read) {
  std::istringstream in(text);
  try {
    read(in);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == line);
  }
}

}  // namespace

TEST_CASE("rankings round trip") {
  std::vector<SentenceRanking> rankings = {make_ranking("a", {0.1, 0.7, 0.3}),
                                           make_ranking("b", {1.0})};
  std::stringstream buffer;
  io::write_rankings(buffer, rankings);
  auto set = io::read_rankings(buffer);
  REQUIRE(set.size() == 2);
  CHECK(set.at("a") == rankings[0]);
  CHECK(set.at("b") == rankings[1]);

  auto read = [](std::istream& in) { return io::read_rankings(in); };
  expect_schema_line("{\"doc_id\":\"a\",\"scores\":[1,2],\"order\":[0,0]}\n", 1, read);
  expect_schema_line("{\"doc_id\":\"a\",\"scores\":[1],\"order\":[0]}\n"
                     "{\"doc_id\":\"a\",\"scores\":[1],\"order\":[0]}\n",
                     2, read);
  expect_schema_line("\n{\"doc_id\":\"a\",\"scores\":[1,2],\"order\":[0]}\n", 2, read);
  expect_schema_line("{\"doc_id\":3,\"scores\":[1],\"order\":[0]}\n", 1, read);
  expect_schema_line("[1]\n", 1, read);
}

TEST_CASE("scores round trip") {
  std::map<std::string, std::vector<double>> scores = {{"a", {-0.5, -1.25}}, {"b", {0.0}}};
  std::stringstream buffer;
  io::write_scores(buffer, "entropy", scores);
  CHECK(buffer.str().find("\"signal\":\"entropy\"") != std::string::npos);
  CHECK(io::read_scores(buffer) == scores);
}

TEST_CASE("llm labels") {
  std::istringstream in(
      "{\"doc_id\":\"a\",\"labels\":[\"Not Useful\",\"Highly Useful\",\"Slightly Useful\"]}\n");
  auto labels = io::read_llm_labels(in);
  auto gains = io::llm_label_gains(labels);
  CHECK(gains.at("a") == std::vector<double>{0.0, 2.0, 1.0});
  expect_schema_line("{\"doc_id\":\"a\",\"labels\":[\"Useful\"]}\n", 1,
                     [](std::istream& s) { return io::read_llm_labels(s); });
}

TEST_CASE("selector examples round trip") {
  auto doc = make_doc({"One.", "Two [SEP] x.", "Three."});
  std::vector<SelectorExample> examples = {
      build_selector_example(doc, 0, SignalSource::kEvidence, 1),
      build_selector_example(doc, 1, SignalSource::kImportance, 2)};
  std::stringstream buffer;
  io::write_examples(buffer, examples);
  CHECK(io::read_examples(buffer) == examples);

  auto read = [](std::istream& s) { return io::read_examples(s); };
  expect_schema_line(
      "{\"doc_id\":\"d\",\"sentence_index\":0,\"input_text\":\"x\",\"species\":\"S\",\"label\":2,"
      "\"source\":\"evidence\"}\n",
      1, read);
  expect_schema_line(
      "{\"doc_id\":\"d\",\"sentence_index\":0,\"input_text\":\"x\",\"species\":\"S\",\"label\":0,"
      "\"source\":\"oracle\"}\n",
      1, read);
  expect_schema_line(
      "{\"doc_id\":\"d\",\"sentence_index\":-1,\"input_text\":\"x\",\"species\":\"S\",\"label\":0,"
      "\"source\":\"llm\"}\n",
      1, read);
}

TEST_CASE("predictions round trip") {
  Prediction a;
  a.doc_id = "a";
  a.category = ImpactCategory::kModerate;
  a.votes = {{ImpactCategory::kModerate, 6}, {ImpactCategory::kMinor, 4}};
  a.summary = "Some summary.";
  a.sample_inputs_used = 10;
  Prediction b;
  b.doc_id = "b";
  b.all_abstained = true;
  b.abstentions = 3;
  b.sample_inputs_used = 3;
  std::stringstream buffer;
  io::write_predictions(buffer, {a, b});
  const std::string text = buffer.str();
  CHECK(text.find("\"votes\":{\"Minor\":4,\"Moderate\":6}") != std::string::npos);
  CHECK(text.find("\"all_abstained\":true") != std::string::npos);
  auto back = io::read_predictions(buffer);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == a);
  CHECK(back[1] == b);

  expect_schema_line("{\"doc_id\":\"a\",\"category\":\"Severe\",\"sample_inputs_used\":1}\n", 1,
                     [](std::istream& s) { return io::read_predictions(s); });
}

TEST_CASE("report serialisation") {
  std::vector<ImpactCategory> g = {ImpactCategory::kMinor, ImpactCategory::kMajor};
  auto report = compute_f1(g, g);
  auto j = io::to_json(report);
  CHECK(j["macro_f1"] == 1.0);
  CHECK(j["n"] == 2);
  CHECK(j["per_class"]["Minor"]["support"] == 1);
  CHECK(j["labels"].size() == 6);
  CHECK(j["confusion"][1][1] == 1);

  AgreementMatrix m;
  m.selectors = {"sel"};
  m.truths = {"human", "llm"};
  m.values = {{0.5, std::nan("")}};
  m.documents = {{3, 0}};
  auto mj = io::to_json(m);
  CHECK(mj["ndcg"][0][0] == 0.5);
  CHECK(mj["ndcg"][0][1].is_null());
  std::ostringstream csv;
  io::write_agreement_csv(csv, m);
  CHECK(csv.str() == "selector,human,llm\nsel,0.500000,\n");

  BenchmarkReport b;
  b.variant = "full";
  b.seconds.total = 1.5;
  CHECK(io::to_json(b).contains("seconds"));
  CHECK_FALSE(io::to_json(b, false).contains("seconds"));
  CHECK_FALSE(io::to_json(b, false).contains("documents_per_second"));
}

TEST_CASE("text files") {
  testing::TempDir dir;
  {
    std::ofstream out(dir / "t.txt", std::ios::binary);
    out << "line\r\nbytes";
  }
  CHECK(io::read_text_file(dir / "t.txt") == "line\r\nbytes");
  CHECK_THROWS_AS(io::read_text_file(dir / "missing.txt"), IoError);
}
