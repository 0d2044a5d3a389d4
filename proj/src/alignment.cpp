#include "sentsel/alignment.hpp"

#include <algorithm>
#include <cctype>

#include "json.hpp"
#include "sentsel/error.hpp"
#include "sentsel/inference.hpp"

namespace sentsel {

namespace {

struct Fold {
  std::string_view from;
  std::string_view to;
};

// UTF-8 sequences commonly introduced by PDF-to-text conversion.
constexpr Fold kFolds[] = {
    {"\xE2\x80\x98", "'"},   {"\xE2\x80\x99", "'"},   {"\xE2\x80\x9A", "'"},
    {"\xE2\x80\x9C", "\""},  {"\xE2\x80\x9D", "\""},  {"\xE2\x80\x9E", "\""},
    {"\xE2\x80\x90", "-"},   {"\xE2\x80\x91", "-"},   {"\xE2\x80\x92", "-"},
    {"\xE2\x80\x93", "-"},   {"\xE2\x80\x94", "-"},   {"\xE2\x88\x92", "-"},
    {"\xC2\xA0", " "},       {"\xE2\x80\x89", " "},   {"\xE2\x80\xAF", " "},
    {"\xE2\x80\x8B", ""},    {"\xC2\xAD", ""},        {"\xE2\x80\xA6", "..."},
    {"\xEF\xAC\x80", "ff"},  {"\xEF\xAC\x81", "fi"},  {"\xEF\xAC\x82", "fl"},
    {"\xEF\xAC\x83", "ffi"}, {"\xEF\xAC\x84", "ffl"},
};

std::string fold_unicode(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool folded = false;
    if (static_cast<unsigned char>(text[i]) >= 0x80) {
      for (const auto& fold : kFolds) {
        if (text.substr(i, fold.from.size()) == fold.from) {
          out += fold.to;
          i += fold.from.size();
          folded = true;
          break;
        }
      }
    }
    if (!folded) out += text[i++];
  }
  return out;
}

bool is_ascii_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

struct Candidate {
  std::size_t start = 0;
  bool pair = false;
  double score = -1.0;
};

// True when `a` should win over `b`.
bool better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.pair != b.pair) return !a.pair;
  return a.start < b.start;
}

std::string candidate_text(const Document& doc, const Candidate& c) {
  std::string text = doc.sentences[c.start].text;
  if (c.pair) text += " " + doc.sentences[c.start + 1].text;
  return text;
}

}  // namespace

std::string_view to_string(MatchStatus status) {
  switch (status) {
    case MatchStatus::kExact: return "exact";
    case MatchStatus::kFuzzy: return "fuzzy";
    case MatchStatus::kBorderline: return "borderline";
    case MatchStatus::kUnmatched: return "unmatched";
  }
  return "unmatched";
}

bool reject_all(const BorderlineCase&) { return false; }

Adjudicator make_llm_adjudicator(const GenerationClient& client,
                                 int max_new_tokens) {
  return [&client, max_new_tokens](const BorderlineCase& c) {
    std::string prompt =
        "Sentence A: " + std::string(c.evidence_text) +
        "\n\nSentence B: " + std::string(c.candidate_text) +
        "\n\nSentence A was copied from a scientific paper, and sentence B was "
        "extracted from a possibly different version of that paper, with "
        "possible text-extraction errors. Is sentence B the same sentence as "
        "sentence A? Answer with Yes or No.\n\nAnswer:";
    std::string reply = to_lower_ascii(trim(client.generate(prompt, max_new_tokens)));
    return reply.rfind("yes", 0) == 0;
  };
}

std::vector<std::string> normalize_for_match(std::string_view text) {
  std::string folded = to_lower_ascii(fold_unicode(text));
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < folded.size()) {
    while (i < folded.size() && std::isspace(static_cast<unsigned char>(folded[i]))) ++i;
    std::size_t start = i;
    while (i < folded.size() && !std::isspace(static_cast<unsigned char>(folded[i]))) ++i;
    std::string_view word(folded.data() + start, i - start);
    while (!word.empty() && is_ascii_punct(word.front())) word.remove_prefix(1);
    while (!word.empty() && is_ascii_punct(word.back())) word.remove_suffix(1);
    if (!word.empty()) tokens.emplace_back(word);
  }
  return tokens;
}

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> curr(b.size() + 1, 0);
  for (const auto& x : a) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      curr[j + 1] = x == b[j] ? prev[j] + 1 : std::max(prev[j + 1], curr[j]);
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

double match_score(std::span<const std::string> a,
                   std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0.0;
  return static_cast<double>(lcs_length(a, b)) /
         static_cast<double>(std::max(a.size(), b.size()));
}

std::vector<MatchResult> align_evidence(const Document& doc,
                                        std::span<const std::string> evidence_texts,
                                        const AlignmentConfig& cfg) {
  if (!(cfg.t_borderline > 0.0 && cfg.t_borderline < cfg.t_match &&
        cfg.t_match <= 1.0)) {
    throw InvalidThresholds("thresholds must satisfy 0 < t_borderline < t_match <= 1");
  }

  std::vector<std::vector<std::string>> singles;
  singles.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) singles.push_back(normalize_for_match(s.text));
  std::vector<std::vector<std::string>> pairs;
  for (std::size_t i = 0; i + 1 < singles.size(); ++i) {
    std::vector<std::string> joined = singles[i];
    joined.insert(joined.end(), singles[i + 1].begin(), singles[i + 1].end());
    pairs.push_back(std::move(joined));
  }

  std::vector<MatchResult> results;
  results.reserve(evidence_texts.size());
  for (std::size_t e = 0; e < evidence_texts.size(); ++e) {
    auto evidence = normalize_for_match(evidence_texts[e]);
    Candidate best;
    for (std::size_t i = 0; i < singles.size(); ++i) {
      Candidate c{i, false, match_score(evidence, singles[i])};
      if (better(c, best)) best = c;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      Candidate c{i, true, match_score(evidence, pairs[i])};
      if (better(c, best)) best = c;
    }

    MatchResult result;
    result.evidence_id = e;
    result.score = std::max(best.score, 0.0);
    auto indices = [&] {
      std::vector<std::size_t> out{best.start};
      if (best.pair) out.push_back(best.start + 1);
      return out;
    };
    if (best.score < 0.0 || result.score < cfg.t_borderline) {
      result.status = MatchStatus::kUnmatched;
    } else if (result.score == 1.0) {
      result.status = MatchStatus::kExact;
      result.matched_indices = indices();
    } else if (result.score >= cfg.t_match) {
      result.status = MatchStatus::kFuzzy;
      result.matched_indices = indices();
    } else {
      std::string text = candidate_text(doc, best);
      if (cfg.adjudicator &&
          cfg.adjudicator(BorderlineCase{evidence_texts[e], text, result.score})) {
        result.status = MatchStatus::kBorderline;
        result.matched_indices = indices();
      } else {
        result.status = MatchStatus::kUnmatched;
      }
    }
    results.push_back(std::move(result));
  }
  return results;
}

std::vector<std::size_t> matched_sentence_indices(
    std::span<const MatchResult> results) {
  std::vector<std::size_t> out;
  for (const auto& r : results) {
    out.insert(out.end(), r.matched_indices.begin(), r.matched_indices.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

AlignmentSummary summarize(std::span<const MatchResult> results) {
  AlignmentSummary summary;
  summary.total_evidence = results.size();
  for (const auto& r : results) {
    switch (r.status) {
      case MatchStatus::kExact:
      case MatchStatus::kFuzzy: ++summary.matched; break;
      case MatchStatus::kBorderline: ++summary.borderline_accepted; break;
      case MatchStatus::kUnmatched: ++summary.unmatched; break;
    }
  }
  return summary;
}

void write_alignment_records(std::ostream& out, const std::string& doc_id,
                             std::span<const MatchResult> results) {
  for (const auto& r : results) {
    nlohmann::ordered_json j;
    j["doc_id"] = doc_id;
    j["evidence_id"] = r.evidence_id;
    j["matched_indices"] = r.matched_indices;
    j["score"] = r.score;
    j["status"] = std::string(to_string(r.status));
    out << j.dump() << '\n';
  }
}

void write_alignment_summary(std::ostream& out, const AlignmentSummary& summary) {
  nlohmann::ordered_json j;
  j["summary"] = {{"total_evidence", summary.total_evidence},
                  {"matched", summary.matched},
                  {"borderline_accepted", summary.borderline_accepted},
                  {"unmatched", summary.unmatched}};
  out << j.dump() << '\n';
}

}  // namespace sentsel
