#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "sentsel/corpus.hpp"
#include "sentsel/scoring.hpp"
#include "sentsel/selection.hpp"

namespace sentsel {

// Text generation with deterministic (greedy) decoding: identical prompts
// must yield identical outputs for a fixed backend state.
class GenerationClient {
 public:
  virtual ~GenerationClient() = default;
  virtual std::string generate(const std::string& prompt, int max_new_tokens) const = 0;
};

inline constexpr int kDefaultMaxNewTokens = 96;

// ---------------------------------------------------------------------------
// Prompt

enum class PromptMode : std::uint8_t { kFullText, kExtracted };

inline constexpr std::string_view kExtractionNotice =
    "The following text consists of sentences extracted from a scientific "
    "paper, with left-out sentences indicated by \"[...]\".";

// The classification prompt with the category descriptions asset. Body and
// species are inserted into their slots only; body text is never rescanned.
// Throws EmptySpecies.
std::string build_llm_prompt(std::string_view body_text, std::string_view species,
                             PromptMode mode, bool include_summary = true);

struct ParsedAnswer {
  std::string summary;
  ImpactCategory category = ImpactCategory::kDataDeficient;

  bool operator==(const ParsedAnswer&) const = default;
};

// Reads the "Summary:" and "Answer:" lines. Throws MalformedResponse when no
// answer line is present and UnknownLabel when the answer is not one of the
// six labels.
ParsedAnswer parse_llm_answer(std::string_view response);

// ---------------------------------------------------------------------------
// Voting

struct Vote {
  ImpactCategory category = ImpactCategory::kDataDeficient;
  // Softmax probability of `category` (classifier path only).
  std::optional<double> confidence;
};

using VoteCounts = std::map<ImpactCategory, std::size_t>;

VoteCounts count_votes(std::span<const Vote> votes);

// Most frequent category. Ties go to the highest mean confidence among the
// tied classes' votes, then to the less severe category (enum order).
// Requires at least one vote.
ImpactCategory majority_vote(std::span<const Vote> votes);

// ---------------------------------------------------------------------------
// Prediction

struct Prediction {
  std::string doc_id;
  ImpactCategory category = ImpactCategory::kDataDeficient;
  VoteCounts votes;  // empty for single-pass predictions
  std::optional<std::string> summary;
  std::size_t sample_inputs_used = 1;
  std::size_t abstentions = 0;
  // Every generation was malformed; category defaulted to Data Deficient.
  bool all_abstained = false;

  bool operator==(const Prediction&) const = default;
};

enum class SampleAggregation : std::uint8_t { kVote, kMeanLogits };

struct PredictionConfig {
  // nullopt: the complete document is the input.
  std::optional<SelectionConfig> selection;
  std::size_t overlap = kDefaultOverlap;
  SampleAggregation aggregation = SampleAggregation::kVote;
  int max_new_tokens = kDefaultMaxNewTokens;
  bool include_summary = true;
};

// Full input: argmax of the chunk-averaged logits. Deterministic selection:
// argmax over the top-k input. Randomized: one argmax per sampled input and a
// majority vote. `ranking` is required whenever selection is configured.
Prediction predict_with_classifier(const Document& doc, const SentenceRanking* ranking,
                                   const PredictionConfig& cfg,
                                   const ScorerBackend& backend);

// Same input construction with gap-marked assembly and the LLM prompt.
// Unparseable generations abstain; ClientError propagates.
Prediction predict_with_llm(const Document& doc, const SentenceRanking* ranking,
                            const PredictionConfig& cfg, const GenerationClient& client);

// Deterministic offline client: answers with the category label mentioned most
// often in the prompt's body slot (ties to the less severe label), or Data
// Deficient when none is mentioned.
class KeywordEchoClient final : public GenerationClient {
 public:
  std::string generate(const std::string& prompt, int max_new_tokens) const override;
};

}  // namespace sentsel
