#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sentsel/corpus.hpp"
#include "sentsel/evaluation.hpp"
#include "sentsel/inference.hpp"
#include "sentsel/scoring.hpp"

namespace sentsel {

// One pipeline configuration to time. Exactly one of `classifier` / `client`
// must be set. When `k` is set, sentences are ranked (by `selector`, or taken
// from `rankings`) and the top k are kept; otherwise the full text is used.
struct BenchmarkVariant {
  std::string name;
  std::optional<std::size_t> k;
  const ScorerBackend* selector = nullptr;
  const RankingSet* rankings = nullptr;
  const ScorerBackend* classifier = nullptr;
  const GenerationClient* client = nullptr;
  std::size_t overlap = kDefaultOverlap;
};

struct StageSeconds {
  double ranking = 0.0;
  double selection = 0.0;
  double inference = 0.0;
  double parsing = 0.0;
  double total = 0.0;
};

struct StageTokens {
  std::size_t ranking = 0;    // selector input tokens
  std::size_t inference = 0;  // model input tokens (chunks or prompts)
  std::size_t parsing = 0;    // generated tokens
};

struct BenchmarkReport {
  std::string variant;
  std::size_t documents = 0;
  std::size_t repetitions = 0;
  std::size_t workers = 1;
  StageSeconds seconds;  // median over repetitions
  StageTokens tokens_processed;
  std::size_t full_text_tokens = 0;
  std::size_t input_tokens = 0;  // document tokens kept as model input
  double documents_per_second = 0.0;
  // input_tokens / full_text_tokens.
  double reduction_ratio = 1.0;
  // Categories of the last repetition, in corpus order.
  std::vector<ImpactCategory> predictions;
};

// Times every variant on the corpus with a monotonic clock. Token counts use
// the reference tokenizer and are identical across repetitions for
// deterministic pipelines.
std::vector<BenchmarkReport> run_benchmark(const std::vector<Document>& corpus,
                                           std::span<const BenchmarkVariant> variants,
                                           std::size_t repetitions,
                                           std::size_t workers = 1);

}  // namespace sentsel
