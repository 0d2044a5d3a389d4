#include "sentsel/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sentsel/error.hpp"
#include "sentsel/parallel.hpp"

namespace sentsel {

std::array<double, kCategoryCount> ClassScores::probabilities() const {
  auto p = softmax(logits);
  std::array<double, kCategoryCount> out{};
  std::copy(p.begin(), p.end(), out.begin());
  return out;
}

ImpactCategory ClassScores::argmax() const {
  return static_cast<ImpactCategory>(sentsel::argmax(logits));
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double entropy(std::span<const double> distribution) {
  double h = 0.0;
  for (double p : distribution) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(
    std::size_t n, std::size_t max_tokens, std::size_t overlap) {
  if (max_tokens == 0 || overlap >= max_tokens) {
    throw InvalidChunkConfig("chunking requires 0 <= overlap < max_tokens (got overlap " +
                             std::to_string(overlap) + ", max_tokens " +
                             std::to_string(max_tokens) + ")");
  }
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  if (n == 0) return ranges;
  const std::size_t stride = max_tokens - overlap;
  for (std::size_t start = 0;; start += stride) {
    std::size_t end = std::min(start + max_tokens, n);
    ranges.emplace_back(start, end);
    if (end == n) break;
  }
  return ranges;
}

std::vector<Chunk> chunk_text(std::span<const std::string> tokens,
                              std::size_t max_tokens, std::size_t overlap) {
  std::vector<Chunk> chunks;
  for (auto [start, end] : chunk_ranges(tokens.size(), max_tokens, overlap)) {
    chunks.push_back(Chunk{start, end, detokenize(tokens.subspan(start, end - start))});
  }
  return chunks;
}

namespace {

void check_logits(const std::vector<Logits>& logits, std::size_t expected_count,
                  std::size_t class_count, std::size_t first_chunk) {
  if (logits.size() != expected_count) {
    throw BackendError("backend returned " + std::to_string(logits.size()) +
                           " results for " + std::to_string(expected_count) + " texts",
                       first_chunk);
  }
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (logits[i].size() != class_count) {
      throw BackendError("backend returned " + std::to_string(logits[i].size()) +
                             " logits, expected " + std::to_string(class_count),
                         first_chunk + i);
    }
    for (double v : logits[i]) {
      if (!std::isfinite(v)) throw BackendError("non-finite logit", first_chunk + i);
    }
  }
}

// Classifies texts in batches of the backend's batch size.
std::vector<Logits> classify_batched(const std::vector<std::string>& texts,
                                     const ScorerBackend& backend) {
  const auto caps = backend.capabilities();
  const std::size_t batch = std::max<std::size_t>(1, caps.batch_size);
  std::vector<Logits> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += batch) {
    std::size_t count = std::min(batch, texts.size() - start);
    std::span<const std::string> slice(texts.data() + start, count);
    std::vector<Logits> logits;
    try {
      logits = backend.classify(slice);
    } catch (const BackendError& e) {
      if (e.chunk() != BackendError::npos) throw;
      throw BackendError(e.what(), start);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw BackendError(e.what(), start);
    }
    check_logits(logits, count, caps.class_count, start);
    for (auto& l : logits) out.push_back(std::move(l));
  }
  return out;
}

ClassScores to_class_scores(const Logits& logits) {
  if (logits.size() != kCategoryCount) {
    throw BackendError("document classification needs a six-class backend");
  }
  ClassScores scores;
  std::copy(logits.begin(), logits.end(), scores.logits.begin());
  return scores;
}

}  // namespace

Logits classify_text(const std::string& text, const ScorerBackend& backend,
                     std::size_t overlap) {
  const auto caps = backend.capabilities();
  auto tokens = reference_tokenize(text);
  std::vector<std::string> texts;
  if (tokens.size() <= caps.max_tokens) {
    texts.push_back(text);
  } else {
    for (auto& chunk : chunk_text(tokens, caps.max_tokens, overlap)) {
      texts.push_back(std::move(chunk.text));
    }
  }
  auto logits = classify_batched(texts, backend);
  Logits mean(caps.class_count, 0.0);
  for (const auto& l : logits) {
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += l[c];
  }
  for (double& v : mean) v /= static_cast<double>(logits.size());
  return mean;
}

std::vector<Logits> classify_texts(std::span<const std::string> texts,
                                   const ScorerBackend& backend,
                                   std::size_t overlap) {
  const auto caps = backend.capabilities();
  std::vector<Logits> out(texts.size());
  std::vector<std::string> single;
  std::vector<std::size_t> single_ids;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto tokens = reference_tokenize(texts[i]);
    if (tokens.size() <= caps.max_tokens) {
      single.push_back(texts[i]);
      single_ids.push_back(i);
    } else {
      out[i] = classify_text(texts[i], backend, overlap);
    }
  }
  auto logits = classify_batched(single, backend);
  for (std::size_t k = 0; k < single_ids.size(); ++k) {
    out[single_ids[k]] = std::move(logits[k]);
  }
  return out;
}

ClassScores classify_document(const Document& doc, const ScorerBackend& backend,
                              std::size_t overlap) {
  if (backend.capabilities().class_count != kCategoryCount) {
    throw BackendError("document classification needs a six-class backend");
  }
  return to_class_scores(classify_text(doc.full_text(), backend, overlap));
}

// ---------------------------------------------------------------------------

namespace {

void require_backends(BackendList backends) {
  if (backends.empty()) throw std::invalid_argument("at least one backend is required");
}

double negative_entropy(const std::vector<std::vector<double>>& distributions,
                        EntropyMode mode) {
  if (mode == EntropyMode::kAverageEntropies) {
    double h = 0.0;
    for (const auto& d : distributions) h += entropy(d);
    return -h / static_cast<double>(distributions.size());
  }
  std::vector<double> mean(distributions.front().size(), 0.0);
  for (const auto& d : distributions) {
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += d[c];
  }
  for (double& v : mean) v /= static_cast<double>(distributions.size());
  return -entropy(mean);
}

}  // namespace

double sentence_entropy_score(const Sentence& sentence, BackendList backends,
                              EntropyMode mode) {
  require_backends(backends);
  std::vector<std::vector<double>> distributions;
  for (const auto* backend : backends) {
    distributions.push_back(softmax(classify_text(sentence.text, *backend)));
  }
  return negative_entropy(distributions, mode);
}

std::vector<double> entropy_scores(const Document& doc, BackendList backends,
                                   EntropyMode mode) {
  require_backends(backends);
  const std::size_t n = doc.sentences.size();
  std::vector<std::string> texts;
  texts.reserve(n);
  for (const auto& s : doc.sentences) texts.push_back(s.text);
  // per_backend[b][i]
  std::vector<std::vector<Logits>> per_backend;
  for (const auto* backend : backends) per_backend.push_back(classify_texts(texts, *backend));
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::vector<double>> distributions;
    for (const auto& logits : per_backend) distributions.push_back(softmax(logits[i]));
    scores[i] = negative_entropy(distributions, mode);
  }
  return scores;
}

double logit_distance(const ClassScores& a, const ClassScores& b,
                      ImportanceNorm norm) {
  double out = 0.0;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    double d = std::abs(a.logits[c] - b.logits[c]);
    out = norm == ImportanceNorm::kL1 ? out + d : std::max(out, d);
  }
  return out;
}

double sentence_importance_score(const Document& doc, std::size_t idx,
                                 BackendList backends, ImportanceNorm norm,
                                 std::size_t overlap) {
  require_backends(backends);
  if (doc.sentences.size() < 2) {
    throw SingleSentenceDocument("leave-one-out importance needs at least two sentences in " +
                                 doc.doc_id);
  }
  if (idx >= doc.sentences.size()) throw std::out_of_range("sentence index out of range");
  Document reduced = remove_sentence(doc, idx);
  double total = 0.0;
  for (const auto* backend : backends) {
    total += logit_distance(classify_document(doc, *backend, overlap),
                            classify_document(reduced, *backend, overlap), norm);
  }
  return total / static_cast<double>(backends.size());
}

std::vector<double> importance_scores(const Document& doc, BackendList backends,
                                      ImportanceNorm norm, std::size_t overlap,
                                      std::size_t workers) {
  require_backends(backends);
  if (doc.sentences.size() < 2) {
    throw SingleSentenceDocument("leave-one-out importance needs at least two sentences in " +
                                 doc.doc_id);
  }
  std::vector<ClassScores> full;
  for (const auto* backend : backends) {
    full.push_back(classify_document(doc, *backend, overlap));
  }
  std::vector<double> scores(doc.sentences.size(), 0.0);
  parallel_for(doc.sentences.size(), workers, [&](std::size_t i) {
    Document reduced = remove_sentence(doc, i);
    double total = 0.0;
    for (std::size_t b = 0; b < backends.size(); ++b) {
      total += logit_distance(full[b], classify_document(reduced, *backends[b], overlap), norm);
    }
    scores[i] = total / static_cast<double>(backends.size());
  });
  return scores;
}

}  // namespace sentsel
