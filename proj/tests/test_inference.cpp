#include <atomic>
#include <stdexcept>

#include "doctest.h"
#include "sentsel/error.hpp"
#include "sentsel/inference.hpp"
#include "support.hpp"

using namespace sentsel;
using sentsel::testing::FunctionBackend;
using sentsel::testing::keyword_counts;
using sentsel::testing::make_doc;
using sentsel::testing::ScriptedClient;

namespace {

std::size_t occurrences(const std::string& text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

Document twelve_sentences() {
  std::vector<std::string> s;
  for (int i = 0; i < 12; ++i) s.push_back("Sentence " + std::to_string(i) + " about minor effects.");
  return make_doc(s, "doc-7", "Lates niloticus", ImpactCategory::kMinor);
}

}  // namespace

TEST_CASE("prompt layout") {
  auto full = build_llm_prompt("Body text here.", "Lates niloticus", PromptMode::kFullText);
  CHECK(full.find("Summary:") != std::string::npos);
  CHECK(full.find("Answer:") != std::string::npos);
  CHECK(full.find("Body text here.") != std::string::npos);
  CHECK(full.find("Lates niloticus") != std::string::npos);
  CHECK(full.find(kExtractionNotice) == std::string::npos);
  for (std::string_view label : {"Minimal", "Minor", "Moderate", "Major", "Massive", "Data Deficient"}) {
    CHECK(full.find(label) != std::string::npos);
  }
  CHECK(full.ends_with("END."));

  auto extracted = build_llm_prompt("s0 [...] s4", "Lates niloticus", PromptMode::kExtracted);
  CHECK(extracted.starts_with(kExtractionNotice));
  CHECK(occurrences(extracted, std::string(kExtractionNotice)) == 1);

  auto no_summary = build_llm_prompt("x", "S", PromptMode::kFullText, false);
  CHECK(no_summary.find("Summary:") == std::string::npos);
  CHECK(no_summary.find("Answer:") != std::string::npos);

  CHECK_THROWS_AS(build_llm_prompt("x", "  ", PromptMode::kFullText), EmptySpecies);
}

TEST_CASE("prompt slots are filled once and never rescanned") {
  auto a = build_llm_prompt("{species} and {text}", "Sus scrofa", PromptMode::kFullText);
  CHECK(a.find("{species} and {text}") != std::string::npos);
  auto b = build_llm_prompt("plain", "Sus scrofa", PromptMode::kFullText);
  CHECK(a.size() - b.size() == std::string("{species} and {text}").size() - 5);
  auto c = build_llm_prompt("plain", "Sus scrofa", PromptMode::kFullText);
  CHECK(b == c);
}

TEST_CASE("answer parsing") {
  auto p = parse_llm_answer("Summary: Causes declines.\nAnswer: Moderate\nEND.");
  CHECK(p.summary == "Causes declines.");
  CHECK(p.category == ImpactCategory::kModerate);
  CHECK(parse_llm_answer("Answer: moderate.").category == ImpactCategory::kModerate);
  CHECK(parse_llm_answer("Answer: \"Data Deficient\"").category == ImpactCategory::kDataDeficient);
  CHECK(parse_llm_answer("answer: data   deficient").category == ImpactCategory::kDataDeficient);
  CHECK(parse_llm_answer("**Answer:** Major END.").category == ImpactCategory::kMajor);
  CHECK(parse_llm_answer("**Summary:** Fewer nests.\n**Answer:** Minor").summary == "Fewer nests.");
  CHECK(parse_llm_answer("Summary: x\r\nAnswer:\r\n\r\nMassive\r\n").category ==
        ImpactCategory::kMassive);
  CHECK(parse_llm_answer("Answer: Minimal\nAnswer: Major").category == ImpactCategory::kMinimalConcern);
  CHECK(parse_llm_answer("Answer: Minor").summary.empty());

  CHECK_THROWS_AS(parse_llm_answer("Answer: Catastrophic"), UnknownLabel);
  CHECK_THROWS_AS(parse_llm_answer("Answer:"), UnknownLabel);
  CHECK_THROWS_AS(parse_llm_answer("The impact is Major."), MalformedResponse);
  CHECK_THROWS_AS(parse_llm_answer(""), MalformedResponse);
}

TEST_CASE("parser never crashes on random input") {
  Rng rng(21);
  const std::string alphabet = "Answer:Summary MinorMajor\n\r *.\"\x01\xff";
  for (int trial = 0; trial < 5000; ++trial) {
    std::string text;
    std::size_t n = rng.below(200);
    for (std::size_t i = 0; i < n; ++i) text += alphabet[rng.below(alphabet.size())];
    try {
      parse_llm_answer(text);
    } catch (const MalformedResponse&) {
    } catch (const UnknownLabel&) {
    }
  }
}

TEST_CASE("majority vote") {
  std::vector<Vote> votes;
  for (int i = 0; i < 6; ++i) votes.push_back({ImpactCategory::kModerate, std::nullopt});
  for (int i = 0; i < 4; ++i) votes.push_back({ImpactCategory::kMinor, std::nullopt});
  CHECK(majority_vote(votes) == ImpactCategory::kModerate);
  auto counts = count_votes(votes);
  CHECK(counts[ImpactCategory::kModerate] == 6);
  CHECK(counts[ImpactCategory::kMinor] == 4);

  // 5/5 tie; mean confidences 0.61 (Moderate) and 0.55 (Minor).
  std::vector<Vote> tied;
  for (double c : {0.60, 0.62, 0.61, 0.59, 0.63}) tied.push_back({ImpactCategory::kModerate, c});
  for (double c : {0.50, 0.60, 0.55, 0.52, 0.58}) tied.push_back({ImpactCategory::kMinor, c});
  CHECK(majority_vote(tied) == ImpactCategory::kModerate);
  for (auto& v : tied) v.confidence = v.category == ImpactCategory::kMinor ? 0.9 : 0.1;
  CHECK(majority_vote(tied) == ImpactCategory::kMinor);

  std::vector<Vote> unscored = {{ImpactCategory::kMajor, std::nullopt},
                                {ImpactCategory::kMinor, std::nullopt}};
  CHECK(majority_vote(unscored) == ImpactCategory::kMinor);
  CHECK_THROWS(majority_vote(std::vector<Vote>{}));
}

TEST_CASE("classifier prediction modes") {
  auto doc = twelve_sentences();
  doc.sentences[11].text = "A major major major event.";
  FunctionBackend counts(keyword_counts);
  auto ranking = make_ranking(doc.doc_id, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 0});

  PredictionConfig full;
  auto pf = predict_with_classifier(doc, nullptr, full, counts);
  CHECK(pf.category == ImpactCategory::kMinor);
  CHECK(pf.votes.empty());
  CHECK(pf.sample_inputs_used == 1);

  PredictionConfig det;
  det.selection = SelectionConfig{};
  det.selection->k = 1;
  det.selection->pool = 1;
  auto ranking_major = make_ranking(doc.doc_id, std::vector<double>{0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1});
  CHECK(predict_with_classifier(doc, &ranking_major, det, counts).category == ImpactCategory::kMajor);
  CHECK(predict_with_classifier(doc, &ranking, det, counts).category == ImpactCategory::kMinor);
  CHECK_THROWS_AS(predict_with_classifier(doc, nullptr, det, counts), InvalidSelectionConfig);

  PredictionConfig rnd;
  rnd.selection = SelectionConfig{};
  rnd.selection->mode = SelectionMode::kRandomized;
  rnd.selection->k = 3;
  rnd.selection->pool = 12;
  auto pr = predict_with_classifier(doc, &ranking, rnd, counts);
  CHECK(pr.sample_inputs_used == 10);
  std::size_t total = 0;
  for (const auto& [_, n] : pr.votes) total += n;
  CHECK(total == 10);
  CHECK(pr == predict_with_classifier(doc, &ranking, rnd, counts));
  rnd.aggregation = SampleAggregation::kMeanLogits;
  CHECK(predict_with_classifier(doc, &ranking, rnd, counts).sample_inputs_used == 10);
}

TEST_CASE("llm prediction") {
  auto doc = twelve_sentences();
  auto ranking = make_ranking(doc.doc_id, std::vector<double>(12, 0.5));
  PredictionConfig rnd;
  rnd.selection = SelectionConfig{};
  rnd.selection->mode = SelectionMode::kRandomized;
  rnd.selection->k = 3;
  rnd.selection->pool = 12;

  ScriptedClient minor([](const std::string& prompt) {
    CHECK(prompt.starts_with(kExtractionNotice));
    CHECK(prompt.find("[...]") != std::string::npos);
    return std::string("Summary: Few effects.\nAnswer: Minor\nEND.");
  });
  auto p = predict_with_llm(doc, &ranking, rnd, minor);
  CHECK(p.category == ImpactCategory::kMinor);
  CHECK(p.votes == VoteCounts{{ImpactCategory::kMinor, 10}});
  CHECK(p.summary == "Few effects.");
  CHECK(p.abstentions == 0);

  std::atomic<int> call{0};
  ScriptedClient flaky([&](const std::string&) {
    int i = call++;
    if (i % 10 < 3) return std::string("I cannot decide.");
    return std::string(i % 10 < 7 ? "Answer: Major" : "Answer: Minor");
  });
  auto q = predict_with_llm(doc, &ranking, rnd, flaky);
  CHECK(q.abstentions == 3);
  CHECK(q.votes == VoteCounts{{ImpactCategory::kMajor, 4}, {ImpactCategory::kMinor, 3}});
  CHECK(q.category == ImpactCategory::kMajor);
  CHECK(q.sample_inputs_used == 10);

  ScriptedClient junk([](const std::string&) { return std::string("???"); });
  auto r = predict_with_llm(doc, &ranking, rnd, junk);
  CHECK(r.all_abstained);
  CHECK(r.abstentions == 10);
  CHECK(r.category == ImpactCategory::kDataDeficient);

  ScriptedClient broken([](const std::string&) -> std::string { throw std::runtime_error("down"); });
  CHECK_THROWS_AS(predict_with_llm(doc, &ranking, rnd, broken), ClientError);

  PredictionConfig full;
  full.include_summary = false;
  ScriptedClient check_full([](const std::string& prompt) {
    CHECK(prompt.find(kExtractionNotice) == std::string::npos);
    CHECK(prompt.find("Summary:") == std::string::npos);
    return std::string("Answer: Moderate");
  });
  auto f = predict_with_llm(doc, nullptr, full, check_full);
  CHECK(f.category == ImpactCategory::kModerate);
  CHECK(f.votes.empty());
  CHECK_FALSE(f.summary.has_value());
}

TEST_CASE("keyword echo client") {
  KeywordEchoClient echo;
  auto prompt = build_llm_prompt("A major loss. Another major one. A minor note.", "S",
                                 PromptMode::kFullText);
  auto answer = parse_llm_answer(echo.generate(prompt, 96));
  CHECK(answer.category == ImpactCategory::kMajor);
  auto none = build_llm_prompt("Nothing relevant.", "S", PromptMode::kFullText);
  CHECK(parse_llm_answer(echo.generate(none, 96)).category == ImpactCategory::kDataDeficient);
  auto tie = build_llm_prompt("massive or minor", "S", PromptMode::kFullText);
  CHECK(parse_llm_answer(echo.generate(tie, 96)).category == ImpactCategory::kMinor);
  CHECK(echo.generate(prompt, 96) == echo.generate(prompt, 96));
}
