#include "doctest.h"
#include "sentsel/error.hpp"
#include "sentsel/rng.hpp"
#include "sentsel/text.hpp"

using namespace sentsel;

namespace {

std::vector<std::string> texts(const std::vector<Sentence>& sentences) {
  std::vector<std::string> out;
  for (const auto& s : sentences) out.push_back(s.text);
  return out;
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string w;
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
      if (!w.empty()) out.push_back(std::move(w));
      w.clear();
    } else {
      w += c;
    }
  }
  if (!w.empty()) out.push_back(w);
  return out;
}

}  // namespace

TEST_CASE("two terminal periods give two sentences") {
  auto s = segment_sentences("A cat. B dog.");
  CHECK(texts(s) == std::vector<std::string>{"A cat.", "B dog."});
  CHECK(s[0].index == 0);
  CHECK(s[1].index == 1);
  CHECK(s[1].token_count == 3);
}

TEST_CASE("stoplist suppresses a split") {
  CHECK(segment_sentences("Seen in Fig. 2 often.").size() == 1);
  CHECK(segment_sentences("As shown by Smith et al. Populations fell.").size() == 1);
  CHECK(segment_sentences("Many spp. Were found. Then more.").size() == 2);
}

TEST_CASE("three paragraphs with ten periods and two abbreviations") {
  const char* text =
      "Invasive crayfish spread quickly. Populations in Fig. 3 doubled within a decade. "
      "Native snails declined.\n\n"
      "Smith et al. Reported similar trends in lakes. The effect was strongest in shallow "
      "water. Juveniles were most affected.\n\n"
      "Predation was observed directly. Control measures remain costly.";
  auto s = segment_sentences(text);
  REQUIRE(s.size() == 8);
  CHECK(s[1].text == "Populations in Fig. 3 doubled within a decade.");
  CHECK(s[3].text == "Smith et al. Reported similar trends in lakes.");
  CHECK(s[7].text == "Control measures remain costly.");
}

TEST_CASE("lowercase continuation and closing quotes") {
  CHECK(segment_sentences("It ended. then it went on.").size() == 1);
  auto s = segment_sentences("He said \"stop.\" Then left! Why? Because.");
  CHECK(texts(s) == std::vector<std::string>{"He said \"stop.\"", "Then left!", "Why?", "Because."});
  CHECK(segment_sentences("Counts rose. (Table 2) shows it.").size() == 2);
  CHECK(segment_sentences("Counts rose. (see below) it.").size() == 1);
  CHECK(segment_sentences("Counts rose. \"Large\" numbers followed.").size() == 2);
}

TEST_CASE("line breaks are collapsed") {
  auto s = segment_sentences("A first\nline. Second\r\n\tline.");
  CHECK(texts(s) == std::vector<std::string>{"A first line.", "Second line."});
  for (const auto& sentence : s) CHECK(sentence.text.find('\n') == std::string::npos);
}

TEST_CASE("whitespace-only input is rejected") {
  CHECK_THROWS_AS(segment_sentences(""), EmptyInput);
  CHECK_THROWS_AS(segment_sentences(" \n\t "), EmptyInput);
}

TEST_CASE("stoplist contents") {
  auto list = abbreviation_stoplist();
  auto has = [&](std::string_view s) {
    return std::find(list.begin(), list.end(), s) != list.end();
  };
  CHECK(has("e.g."));
  CHECK(has("et al."));
  CHECK(has("Fig."));
  CHECK(has("sp."));
  CHECK(has("spp."));
}

TEST_CASE("segmentation keeps every word exactly once") {
  Rng rng(11);
  const std::vector<std::string> vocab = {"The", "fish", "ate.", "Fig.", "2", "e.g.", "we",
                                          "saw", "it!", "Why?", "al.", "et", "Data",
                                          "\"end.\"", "(see", "below)."};
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    std::size_t n = 1 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      text += vocab[rng.below(vocab.size())];
      text += rng.below(5) == 0 ? "\n" : " ";
    }
    auto s = segment_sentences(text);
    std::vector<std::string> joined;
    for (const auto& sentence : s) {
      CHECK(!sentence.text.empty());
      for (auto& w : words(sentence.text)) joined.push_back(w);
    }
    CHECK(joined == words(text));
  }
}

TEST_CASE("reference tokenizer") {
  CHECK(reference_tokenize("impact.") == std::vector<std::string>{"impact", "."});
  CHECK(reference_tokenize("").empty());
  CHECK(reference_tokenize("Lates niloticus (Nile perch)!") ==
        std::vector<std::string>{"Lates", "niloticus", "(", "Nile", "perch", ")", "!"});
  CHECK(reference_tokenize("co-occurring 3.5 \"x\"") ==
        std::vector<std::string>{"co-occurring", "3.5", "\"", "x", "\""});
  CHECK(reference_tokenize("...") == std::vector<std::string>{".", ".", "."});
  CHECK(reference_token_count("A (b).") == 5);
}

TEST_CASE("tokenizer is idempotent on its own output") {
  Rng rng(5);
  const std::string alphabet = "ab.,;()!?\"' -";
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    std::size_t n = rng.below(30);
    for (std::size_t i = 0; i < n; ++i) text += alphabet[rng.below(alphabet.size())];
    auto tokens = reference_tokenize(text);
    CHECK(reference_tokenize(detokenize(tokens)) == tokens);
  }
}

TEST_CASE("string helpers") {
  CHECK(to_lower_ascii("AbC") == "abc");
  CHECK(trim("  x y \n") == "x y");
  CHECK(collapse_whitespace(" a \n\t b  ") == "a b");
}
