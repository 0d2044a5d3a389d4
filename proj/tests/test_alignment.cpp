#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "sentsel/alignment.hpp"
#include "sentsel/error.hpp"
#include "sentsel/rng.hpp"
#include "support.hpp"

using namespace sentsel;
using sentsel::testing::make_doc;
using Tokens = std::vector<std::string>;

namespace {

std::vector<std::string> filler(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("Sampling took place in " + std::to_string(i) + " regions.");
  return out;
}

std::size_t brute_lcs(const Tokens& a, const Tokens& b, std::size_t i = 0, std::size_t j = 0) {
  if (i == a.size() || j == b.size()) return 0;
  if (a[i] == b[j]) return 1 + brute_lcs(a, b, i + 1, j + 1);
  return std::max(brute_lcs(a, b, i + 1, j), brute_lcs(a, b, i, j + 1));
}

}  // namespace

TEST_CASE("normalization for matching") {
  CHECK(normalize_for_match("The Fish, eats!") == Tokens{"the", "fish", "eats"});
  CHECK(normalize_for_match("").empty());
  CHECK(normalize_for_match("co-occurring  species’ decline") ==
        Tokens{"co-occurring", "species", "decline"});
  CHECK(normalize_for_match("“Quoted” – text here ﬁsh") ==
        Tokens{"quoted", "text", "here", "fish"});
  CHECK(normalize_for_match("( ) , .").empty());
}

TEST_CASE("match score") {
  Tokens ten = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
  CHECK(match_score(ten, ten) == 1.0);
  CHECK(match_score(Tokens{"a", "b"}, Tokens{"c", "d"}) == 0.0);
  Tokens a = {"x", "y", "z", "w"};
  Tokens b = {"x", "z", "w", "q", "r"};
  CHECK(lcs_length(a, b) == 3);
  CHECK(match_score(a, b) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(match_score(Tokens{}, b) == 0.0);
  CHECK(match_score(a, Tokens{}) == 0.0);
}

TEST_CASE("lcs agrees with a recursive oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 400; ++trial) {
    Tokens a(rng.below(9)), b(rng.below(9));
    for (auto& t : a) t = std::string(1, static_cast<char>('a' + rng.below(4)));
    for (auto& t : b) t = std::string(1, static_cast<char>('a' + rng.below(4)));
    CHECK(lcs_length(a, b) == brute_lcs(a, b));
    CHECK(lcs_length(a, b) == lcs_length(b, a));
  }
}

TEST_CASE("exact match to a single sentence") {
  auto sentences = filler(10);
  sentences[7] = "Crayfish removed most macrophytes from the pond.";
  auto doc = make_doc(sentences);
  std::vector<std::string> evidence = {"Crayfish removed most macrophytes from the pond."};
  auto r = align_evidence(doc, evidence);
  REQUIRE(r.size() == 1);
  CHECK(r[0].evidence_id == 0);
  CHECK(r[0].matched_indices == std::vector<std::size_t>{7});
  CHECK(r[0].score == 1.0);
  CHECK(r[0].status == MatchStatus::kExact);
}

TEST_CASE("evidence split across two sentences") {
  auto sentences = filler(8);
  sentences[3] = "Predation by the invasive perch reduced cichlid";
  sentences[4] = "diversity in the lake within two decades.";
  auto doc = make_doc(sentences);
  std::vector<std::string> evidence = {
      "Predation by the invasive perch reduced cichlid diversity in the lake within two decades."};
  auto r = align_evidence(doc, evidence);
  CHECK(r[0].matched_indices == std::vector<std::size_t>{3, 4});
  CHECK(r[0].score == 1.0);
  CHECK(r[0].status == MatchStatus::kExact);
}

TEST_CASE("fuzzy match at the threshold") {
  auto sentences = filler(11);
  sentences[9] =
      "Native crayfish populations declined sharply after the invasive species reached the "
      "northern lake basin quickly.";
  auto doc = make_doc(sentences);
  std::vector<std::string> evidence = {
      "Native crayfish numbers declined sharply after the alien species reached the southern "
      "lake basin quickly."};
  auto r = align_evidence(doc, evidence, AlignmentConfig{0.80, 0.65, reject_all});
  CHECK(r[0].matched_indices == std::vector<std::size_t>{9});
  CHECK(r[0].score == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(r[0].status == MatchStatus::kFuzzy);

  auto strict = align_evidence(doc, evidence, AlignmentConfig{0.81, 0.65, reject_all});
  CHECK(strict[0].status == MatchStatus::kUnmatched);
  CHECK(strict[0].matched_indices.empty());
}

TEST_CASE("borderline cases go to the adjudicator") {
  auto sentences = filler(4);
  sentences[1] = "one two three four five six seven eight nine ten";
  auto doc = make_doc(sentences);
  std::vector<std::string> evidence = {"one two three four five six seven x y z"};

  auto rejected = align_evidence(doc, evidence);
  CHECK(rejected[0].status == MatchStatus::kUnmatched);
  CHECK(rejected[0].matched_indices.empty());

  std::size_t asked = 0;
  AlignmentConfig cfg;
  cfg.adjudicator = [&](const BorderlineCase& c) {
    ++asked;
    CHECK(c.score == doctest::Approx(0.7));
    CHECK(c.candidate_text == sentences[1]);
    return true;
  };
  auto accepted = align_evidence(doc, evidence, cfg);
  CHECK(asked == 1);
  CHECK(accepted[0].status == MatchStatus::kBorderline);
  CHECK(accepted[0].matched_indices == std::vector<std::size_t>{1});

  testing::ScriptedClient yes([](const std::string& prompt) {
    CHECK(prompt.find("one two three") != std::string::npos);
    return std::string("Yes, they match.");
  });
  cfg.adjudicator = make_llm_adjudicator(yes);
  CHECK(align_evidence(doc, evidence, cfg)[0].status == MatchStatus::kBorderline);
  testing::ScriptedClient no([](const std::string&) { return std::string("No."); });
  cfg.adjudicator = make_llm_adjudicator(no);
  CHECK(align_evidence(doc, evidence, cfg)[0].status == MatchStatus::kUnmatched);

  auto summary = summarize(accepted);
  CHECK(summary == AlignmentSummary{1, 0, 1, 0});
}

TEST_CASE("ties prefer single sentences and early indices") {
  auto doc = make_doc({"alpha beta gamma.", "—", "alpha beta gamma.", "delta."});
  std::vector<std::string> evidence = {"Alpha beta gamma"};
  auto r = align_evidence(doc, evidence);
  CHECK(r[0].matched_indices == std::vector<std::size_t>{0});
  CHECK(r[0].status == MatchStatus::kExact);
}

TEST_CASE("invalid thresholds") {
  auto doc = make_doc({"a b."});
  std::vector<std::string> ev = {"a b"};
  CHECK_THROWS_AS(align_evidence(doc, ev, AlignmentConfig{0.6, 0.7, reject_all}), InvalidThresholds);
  CHECK_THROWS_AS(align_evidence(doc, ev, AlignmentConfig{0.8, 0.0, reject_all}), InvalidThresholds);
  CHECK_THROWS_AS(align_evidence(doc, ev, AlignmentConfig{1.1, 0.5, reject_all}), InvalidThresholds);
  CHECK_NOTHROW(align_evidence(doc, ev, AlignmentConfig{1.0, 0.5, reject_all}));
}

TEST_CASE("self alignment is exact everywhere") {
  auto sentences = filler(6);
  sentences.push_back("A distinct final remark.");
  auto doc = make_doc(sentences);
  std::vector<std::string> evidence;
  for (const auto& s : doc.sentences) evidence.push_back(s.text);
  auto r = align_evidence(doc, evidence);
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(r[i].status == MatchStatus::kExact);
    CHECK(r[i].matched_indices == std::vector<std::size_t>{i});
  }
  CHECK(matched_sentence_indices(r) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6});
}

TEST_CASE("raising t_match never creates matches") {
  Rng rng(3);
  const Tokens vocab = {"fish", "lake", "perch", "decline", "native", "species", "the", "in"};
  auto random_text = [&](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + vocab[rng.below(vocab.size())];
    return s;
  };
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> sentences;
    for (int i = 0; i < 6; ++i) sentences.push_back(random_text(3 + rng.below(6)));
    auto doc = make_doc(sentences);
    std::vector<std::string> evidence = {random_text(6), random_text(4)};
    auto low = align_evidence(doc, evidence, AlignmentConfig{0.7, 0.6, reject_all});
    auto high = align_evidence(doc, evidence, AlignmentConfig{0.9, 0.6, reject_all});
    for (std::size_t i = 0; i < evidence.size(); ++i) {
      if (low[i].status == MatchStatus::kUnmatched) CHECK(high[i].status == MatchStatus::kUnmatched);
      if (high[i].status != MatchStatus::kUnmatched) CHECK(high[i].score >= 0.9);
      if (high[i].matched_indices.size() == 2) {
        CHECK(high[i].matched_indices[1] == high[i].matched_indices[0] + 1);
      }
    }
  }
}

TEST_CASE("alignment report lines") {
  auto doc = make_doc({"a b c.", "d e f."});
  std::vector<std::string> evidence = {"a b c", "zzz"};
  auto r = align_evidence(doc, evidence);
  std::ostringstream out;
  write_alignment_records(out, "doc-1", r);
  write_alignment_summary(out, summarize(r));
  std::istringstream in(out.str());
  std::string line;
  std::vector<nlohmann::json> records;
  while (std::getline(in, line)) records.push_back(nlohmann::json::parse(line));
  REQUIRE(records.size() == 3);
  CHECK(records[0]["doc_id"] == "doc-1");
  CHECK(records[0]["status"] == "exact");
  CHECK(records[1]["status"] == "unmatched");
  CHECK(records[2]["summary"]["total_evidence"] == 2);
  CHECK(records[2]["summary"]["matched"] == 1);
  CHECK(records[2]["summary"]["unmatched"] == 1);
}
