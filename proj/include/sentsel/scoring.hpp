#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sentsel/corpus.hpp"

namespace sentsel {

using Logits = std::vector<double>;

struct BackendCapabilities {
  std::size_t max_tokens = 512;
  std::size_t batch_size = 16;
  std::size_t class_count = kCategoryCount;
};

// A text classifier. classify must return one logit vector of length
// capabilities().class_count per input text, deterministically for a fixed
// backend state, and must be safe to call concurrently.
class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;
  virtual BackendCapabilities capabilities() const = 0;
  virtual std::vector<Logits> classify(std::span<const std::string> texts) const = 0;
};

// Document-level scores over the six impact categories.
struct ClassScores {
  std::array<double, kCategoryCount> logits{};

  bool operator==(const ClassScores&) const = default;

  std::array<double, kCategoryCount> probabilities() const;
  ImpactCategory argmax() const;
};

// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

// Shannon entropy in nats; 0 * log 0 := 0.
double entropy(std::span<const double> distribution);

// Index of the first maximum.
std::size_t argmax(std::span<const double> values);

// ---------------------------------------------------------------------------
// Chunking

inline constexpr std::size_t kDefaultMaxTokens = 512;
inline constexpr std::size_t kDefaultOverlap = 50;

struct Chunk {
  std::size_t token_start = 0;
  std::size_t token_end = 0;  // exclusive
  std::string text;

  bool operator==(const Chunk&) const = default;
};

// Token ranges only: chunk i starts at i * (max_tokens - overlap), the last
// chunk ends at n. Throws InvalidChunkConfig unless 0 <= overlap < max_tokens.
std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(
    std::size_t n, std::size_t max_tokens = kDefaultMaxTokens,
    std::size_t overlap = kDefaultOverlap);

std::vector<Chunk> chunk_text(std::span<const std::string> tokens,
                              std::size_t max_tokens = kDefaultMaxTokens,
                              std::size_t overlap = kDefaultOverlap);

// Texts within the backend's max_tokens are sent verbatim. Longer texts are
// split into chunks of max_tokens reference tokens; the result is the
// element-wise mean of the chunk logits, summed in chunk order.
Logits classify_text(const std::string& text, const ScorerBackend& backend,
                     std::size_t overlap = kDefaultOverlap);

// classify_text for many texts. Texts that fit into one chunk are sent in
// batches of the backend's batch size.
std::vector<Logits> classify_texts(std::span<const std::string> texts,
                                   const ScorerBackend& backend,
                                   std::size_t overlap = kDefaultOverlap);

// classify_text over the document's sentences; requires a six-class backend.
ClassScores classify_document(const Document& doc, const ScorerBackend& backend,
                              std::size_t overlap = kDefaultOverlap);

// ---------------------------------------------------------------------------
// Sentence relevance signals

using BackendList = std::span<const ScorerBackend* const>;

enum class EntropyMode {
  kAverageDistributions,  // entropy of the mean distribution
  kAverageEntropies,      // mean of per-backend entropies
};

// Negative entropy of the sentence's class distribution: higher means more
// indicative of a single class. Lies in [-ln C, 0].
double sentence_entropy_score(const Sentence& sentence, BackendList backends,
                              EntropyMode mode = EntropyMode::kAverageDistributions);

// All sentences of a document, batched per backend.
std::vector<double> entropy_scores(const Document& doc, BackendList backends,
                                   EntropyMode mode = EntropyMode::kAverageDistributions);

enum class ImportanceNorm { kL1, kLInf };

double logit_distance(const ClassScores& a, const ClassScores& b,
                      ImportanceNorm norm);

// Mean over backends of the distance between the document's logits with and
// without sentence `idx`. The shortened document is re-chunked. Throws
// SingleSentenceDocument for documents with fewer than two sentences.
double sentence_importance_score(const Document& doc, std::size_t idx,
                                 BackendList backends,
                                 ImportanceNorm norm = ImportanceNorm::kL1,
                                 std::size_t overlap = kDefaultOverlap);

// All sentences of a document; the full-document logits are computed once per
// backend and leave-one-out passes run on up to `workers` threads.
std::vector<double> importance_scores(const Document& doc, BackendList backends,
                                      ImportanceNorm norm = ImportanceNorm::kL1,
                                      std::size_t overlap = kDefaultOverlap,
                                      std::size_t workers = 1);

}  // namespace sentsel
