#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentsel/corpus.hpp"
#include "sentsel/scoring.hpp"

namespace sentsel {

inline constexpr std::string_view kSepMarker = "[SEP]";
inline constexpr std::string_view kGapMarker = "[...]";
inline constexpr std::size_t kContextWindow = 3;

enum class SignalSource : std::uint8_t { kEvidence, kLlm, kEntropy, kImportance };

std::string_view to_string(SignalSource source);
std::optional<SignalSource> parse_signal_source(std::string_view text);

// Number of selector classes a source produces (2 for evidence, else 3).
std::size_t class_count(SignalSource source);

struct SelectorExample {
  std::string doc_id;
  std::size_t sentence_index = 0;
  std::string input_text;
  std::string species;
  std::size_t label = 0;
  SignalSource source = SignalSource::kEvidence;

  bool operator==(const SelectorExample&) const = default;
};

struct SentenceRanking {
  std::string doc_id;
  std::vector<double> scores;
  std::vector<std::size_t> order;  // best first

  bool operator==(const SentenceRanking&) const = default;
};

enum class SelectionMode : std::uint8_t { kDeterministic, kRandomized };
enum class Weighting : std::uint8_t { kLinearRank, kInverseRank };

struct SelectionConfig {
  std::size_t k = 15;
  std::size_t pool = 30;
  SelectionMode mode = SelectionMode::kDeterministic;
  std::size_t num_samples = 10;
  std::uint64_t seed = 0;
  Weighting weighting = Weighting::kLinearRank;

  // Throws InvalidSelectionConfig unless 1 <= k <= pool and num_samples >= 1.
  void validate() const;
};

// Within-document quantile classes: the top ceil(0.2n) scores get 2, the next
// ceil(0.3n) get 1, the rest 0. Ranks are by descending score, ties by index.
std::vector<std::size_t> discretize_scores(std::span<const double> scores);

// Replaces literal "[SEP]" occurrences so that markers only delimit the
// target sentence.
std::string scrub_separator(std::string_view text);

// "<species>\n<up to 3 preceding> [SEP] <target> [SEP] <up to 3 following>",
// with empty context sides omitted.
SelectorExample build_selector_example(const Document& doc, std::size_t idx,
                                       SignalSource source, std::size_t label);

// Maps "Not Useful" / "Slightly Useful" / "Highly Useful" to 0 / 1 / 2.
std::optional<std::size_t> parse_usefulness_label(std::string_view text);

// Per-document inputs for the non-evidence sources, keyed by doc_id.
struct SignalInputs {
  std::map<std::string, std::vector<std::string>> llm_labels;
  std::map<std::string, std::vector<double>> scores;  // entropy or importance
};

// One example per sentence of every document. Throws MissingSignal when a
// document lacks the inputs the source needs.
std::vector<SelectorExample> derive_training_data(const std::vector<Document>& corpus,
                                                  SignalSource source,
                                                  const SignalInputs& signals);

// Orders sentences by descending score, ties by ascending index.
SentenceRanking make_ranking(std::string doc_id, std::vector<double> scores);

// sum_c c * p(c).
double expected_class(std::span<const double> probabilities);

// Scores every sentence with the expected class under the selector's softmax
// output.
SentenceRanking rank_sentences(const Document& doc, const ScorerBackend& selector);

// Uniformly random scores; the baseline "random selector".
SentenceRanking random_ranking(const Document& doc, std::uint64_t seed);

// Ranking whose scores are the given per-sentence gains (e.g. evidence
// membership).
SentenceRanking evidence_ranking(const Document& doc);

// The first min(k, n) entries of the order, in ascending document position.
std::vector<std::size_t> select_top_k(const SentenceRanking& ranking, std::size_t k);

// Sampling weight for 1-based pool rank r.
double rank_weight(Weighting weighting, std::size_t rank, std::size_t pool_size);

// Randomized mode: sequential weighted draws without replacement from the
// top-`pool` sentences, seeded by (seed, doc_id, sample_index). Deterministic
// mode returns select_top_k. Output in ascending document position.
std::vector<std::size_t> sample_selection(const SentenceRanking& ranking,
                                          const SelectionConfig& cfg,
                                          std::size_t sample_index);

enum class AssemblyStyle : std::uint8_t { kConcatenated, kGapMarked };

// Selected sentence texts joined by spaces; gap-marked style inserts "[...]"
// for every run of omitted sentences, including at either end.
std::string assemble_input(const Document& doc, std::span<const std::size_t> indices,
                           AssemblyStyle style);

}  // namespace sentsel
