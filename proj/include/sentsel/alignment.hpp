#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentsel/corpus.hpp"

namespace sentsel {

class GenerationClient;

enum class MatchStatus : std::uint8_t { kExact, kFuzzy, kBorderline, kUnmatched };

std::string_view to_string(MatchStatus status);

struct MatchResult {
  std::size_t evidence_id = 0;
  // Empty, one index, or two adjacent indices.
  std::vector<std::size_t> matched_indices;
  double score = 0.0;
  MatchStatus status = MatchStatus::kUnmatched;

  bool operator==(const MatchResult&) const = default;
};

// What the adjudicator sees for a score in [t_borderline, t_match).
struct BorderlineCase {
  std::string_view evidence_text;
  std::string_view candidate_text;
  double score = 0.0;
};

using Adjudicator = std::function<bool(const BorderlineCase&)>;

// Rejects every borderline candidate.
bool reject_all(const BorderlineCase&);

// Asks a generation backend whether the two sentences match; accepts when the
// reply starts with "yes" (case-insensitive).
Adjudicator make_llm_adjudicator(const GenerationClient& client,
                                 int max_new_tokens = 8);

struct AlignmentConfig {
  double t_match = 0.80;
  double t_borderline = 0.65;
  Adjudicator adjudicator = reject_all;
};

// Lowercased word tokens with punctuation removed. Typographic quotes, dashes,
// ligatures and non-breaking spaces are first folded to ASCII.
std::vector<std::string> normalize_for_match(std::string_view text);

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b);

// |LCS(a, b)| / max(|a|, |b|); 0 when either side is empty.
double match_score(std::span<const std::string> a,
                   std::span<const std::string> b);

// Best candidate among single sentences and adjacent sentence pairs for every
// evidence text. Ties prefer a single sentence, then the earliest index.
std::vector<MatchResult> align_evidence(const Document& doc,
                                        std::span<const std::string> evidence_texts,
                                        const AlignmentConfig& cfg = {});

// Sorted union of the indices of all accepted matches.
std::vector<std::size_t> matched_sentence_indices(
    std::span<const MatchResult> results);

struct AlignmentSummary {
  std::size_t total_evidence = 0;
  std::size_t matched = 0;  // exact + fuzzy
  std::size_t borderline_accepted = 0;
  std::size_t unmatched = 0;

  bool operator==(const AlignmentSummary&) const = default;
};

AlignmentSummary summarize(std::span<const MatchResult> results);

// One JSON line per result, tagged with its doc_id.
void write_alignment_records(std::ostream& out, const std::string& doc_id,
                             std::span<const MatchResult> results);
void write_alignment_summary(std::ostream& out, const AlignmentSummary& summary);

}  // namespace sentsel
