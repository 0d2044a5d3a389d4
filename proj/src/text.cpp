#include "sentsel/text.hpp"

#include <array>
#include <cctype>

#include "sentsel/error.hpp"

namespace sentsel {

namespace {

constexpr std::array<std::string_view, 27> kStoplist = {
    "e.g.",  "i.e.",  "et al.", "Fig.",  "Figs.",  "sp.",   "spp.",
    "ssp.",  "subsp.", "var.",  "cf.",   "ca.",    "approx.", "vs.",
    "No.",   "Eq.",   "Tab.",   "Ref.",  "Refs.",  "Vol.",  "pp.",
    "Dr.",   "Prof.", "St.",    "Mt.",   "resp.",  "Suppl.",
};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

bool is_closer(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}';
}

bool is_opener(char c) {
  return c == '"' || c == '\'' || c == '(' || c == '[' || c == '{';
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

std::string_view strip_closers(std::string_view word) {
  while (!word.empty() && is_closer(word.back())) word.remove_suffix(1);
  return word;
}

bool starts_sentence(std::string_view word) {
  while (!word.empty() && is_opener(word.front())) word.remove_prefix(1);
  if (word.empty()) return false;
  auto c = static_cast<unsigned char>(word.front());
  return std::isupper(c) || std::isdigit(c);
}

bool is_abbreviation(std::string_view previous, std::string_view core) {
  std::string lowered = to_lower_ascii(core);
  std::string pair = previous.empty()
                         ? std::string()
                         : to_lower_ascii(previous) + " " + lowered;
  for (auto entry : kStoplist) {
    std::string abbrev = to_lower_ascii(entry);
    if (abbrev == lowered || (!pair.empty() && abbrev == pair)) return true;
  }
  return false;
}

bool ends_sentence(std::string_view previous, std::string_view word) {
  std::string_view core = strip_closers(word);
  if (core.empty()) return false;
  char last = core.back();
  if (last == '!' || last == '?') return true;
  if (last != '.') return false;
  return !is_abbreviation(previous, core);
}

}  // namespace

std::span<const std::string_view> abbreviation_stoplist() { return kStoplist; }

std::vector<Sentence> segment_sentences(std::string_view raw_text) {
  auto words = split_words(raw_text);
  if (words.empty()) throw EmptyInput("input text is empty or whitespace-only");

  std::vector<Sentence> sentences;
  std::string current;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!current.empty()) current += ' ';
    current += words[i];
    bool last = i + 1 == words.size();
    std::string_view previous = i > 0 ? words[i - 1] : std::string_view();
    if (last || (ends_sentence(previous, words[i]) &&
                 starts_sentence(words[i + 1]))) {
      Sentence s;
      s.index = sentences.size();
      s.token_count = reference_token_count(current);
      s.text = std::move(current);
      sentences.push_back(std::move(s));
      current.clear();
    }
  }
  return sentences;
}

std::vector<std::string> reference_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  for (std::string_view word : split_words(text)) {
    std::size_t begin = 0;
    std::size_t end = word.size();
    while (begin < end && is_punct(word[begin])) {
      tokens.emplace_back(1, word[begin]);
      ++begin;
    }
    std::size_t trail = end;
    while (trail > begin && is_punct(word[trail - 1])) --trail;
    if (trail > begin) tokens.emplace_back(word.substr(begin, trail - begin));
    for (std::size_t i = trail; i < end; ++i) tokens.emplace_back(1, word[i]);
  }
  return tokens;
}

std::size_t reference_token_count(std::string_view text) {
  std::size_t count = 0;
  for (std::string_view word : split_words(text)) {
    std::size_t begin = 0;
    std::size_t end = word.size();
    while (begin < end && is_punct(word[begin])) {
      ++count;
      ++begin;
    }
    std::size_t trail = end;
    while (trail > begin && is_punct(word[trail - 1])) --trail;
    if (trail > begin) ++count;
    count += end - trail;
  }
  return count;
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& token : tokens) {
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

std::string join_sentences(std::span<const Sentence> sentences) {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out += ' ';
    out += s.text;
  }
  return out;
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  for (std::string_view word : split_words(text)) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

}  // namespace sentsel
