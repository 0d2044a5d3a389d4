#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sentsel {

struct Sentence {
  std::size_t index = 0;
  std::string text;
  std::size_t token_count = 0;

  bool operator==(const Sentence&) const = default;
};

// Rule-based segmenter. Whitespace (including line breaks) is collapsed to
// single spaces. A boundary follows a word ending in '.', '!' or '?' (optionally
// followed by closing quotes/brackets) when the next word starts with an
// uppercase letter or digit, unless the word is on the abbreviation stoplist.
// Throws EmptyInput for whitespace-only input.
std::vector<Sentence> segment_sentences(std::string_view raw_text);

// The abbreviations that never end a sentence. Multi-word entries ("et al.")
// are matched against the trailing words of the running sentence.
std::span<const std::string_view> abbreviation_stoplist();

// Whitespace split, then leading/trailing ASCII punctuation peeled off into
// single-character tokens.
std::vector<std::string> reference_tokenize(std::string_view text);

std::size_t reference_token_count(std::string_view text);

// Joins tokens with single spaces.
std::string detokenize(std::span<const std::string> tokens);

std::string join_sentences(std::span<const Sentence> sentences);

// ASCII helpers shared by the parsers.
std::string to_lower_ascii(std::string_view text);
std::string_view trim(std::string_view text);
std::string collapse_whitespace(std::string_view text);

}  // namespace sentsel
