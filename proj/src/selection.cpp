#include "sentsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sentsel/error.hpp"
#include "sentsel/rng.hpp"

namespace sentsel {

std::string_view to_string(SignalSource source) {
  switch (source) {
    case SignalSource::kEvidence: return "evidence";
    case SignalSource::kLlm: return "llm";
    case SignalSource::kEntropy: return "entropy";
    case SignalSource::kImportance: return "importance";
  }
  return "evidence";
}

std::optional<SignalSource> parse_signal_source(std::string_view text) {
  for (auto s : {SignalSource::kEvidence, SignalSource::kLlm, SignalSource::kEntropy,
                 SignalSource::kImportance}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::size_t class_count(SignalSource source) {
  return source == SignalSource::kEvidence ? 2 : 3;
}

void SelectionConfig::validate() const {
  if (k < 1) throw InvalidSelectionConfig("k must be at least 1");
  if (k > pool) throw InvalidSelectionConfig("k must not exceed the sampling pool");
  if (num_samples < 1) throw InvalidSelectionConfig("num_samples must be at least 1");
}

namespace {

// Descending score, ascending index.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

std::size_t ceil_fraction(std::size_t n, std::size_t percent) {
  return (n * percent + 99) / 100;
}

}  // namespace

std::vector<std::size_t> discretize_scores(std::span<const double> scores) {
  const std::size_t n = scores.size();
  const std::size_t top = std::min(n, ceil_fraction(n, 20));
  const std::size_t middle = std::min(n - top, ceil_fraction(n, 30));
  auto order = descending_order(scores);
  std::vector<std::size_t> classes(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    classes[order[r]] = r < top ? 2 : r < top + middle ? 1 : 0;
  }
  return classes;
}

std::string scrub_separator(std::string_view text) {
  std::string out(text);
  std::size_t pos = 0;
  while ((pos = out.find(kSepMarker, pos)) != std::string::npos) {
    out.replace(pos, kSepMarker.size(), "(SEP)");
    pos += 5;
  }
  return out;
}

SelectorExample build_selector_example(const Document& doc, std::size_t idx,
                                       SignalSource source, std::size_t label) {
  if (idx >= doc.sentences.size()) throw std::out_of_range("sentence index out of range");
  const std::size_t first = idx >= kContextWindow ? idx - kContextWindow : 0;
  const std::size_t last = std::min(doc.sentences.size(), idx + kContextWindow + 1);

  std::string body;
  auto append = [&body](std::string_view piece) {
    if (!body.empty()) body += ' ';
    body += piece;
  };
  for (std::size_t i = first; i < idx; ++i) append(scrub_separator(doc.sentences[i].text));
  append(kSepMarker);
  append(scrub_separator(doc.sentences[idx].text));
  append(kSepMarker);
  for (std::size_t i = idx + 1; i < last; ++i) append(scrub_separator(doc.sentences[i].text));

  SelectorExample ex;
  ex.doc_id = doc.doc_id;
  ex.sentence_index = idx;
  ex.species = doc.species;
  ex.input_text = scrub_separator(doc.species) + "\n" + body;
  ex.label = label;
  ex.source = source;
  return ex;
}

std::optional<std::size_t> parse_usefulness_label(std::string_view text) {
  std::string key = to_lower_ascii(collapse_whitespace(text));
  while (!key.empty() && (key.back() == '.' || key.back() == '"')) key.pop_back();
  while (!key.empty() && key.front() == '"') key.erase(key.begin());
  if (key == "not useful") return 0;
  if (key == "slightly useful") return 1;
  if (key == "highly useful") return 2;
  return std::nullopt;
}

std::vector<SelectorExample> derive_training_data(const std::vector<Document>& corpus,
                                                  SignalSource source,
                                                  const SignalInputs& signals) {
  std::vector<SelectorExample> examples;
  for (const auto& doc : corpus) {
    const std::size_t n = doc.sentences.size();
    std::vector<std::size_t> labels(n, 0);
    switch (source) {
      case SignalSource::kEvidence: {
        if (!doc.evidence_indices) {
          throw MissingSignal("evidence: document " + doc.doc_id + " has no evidence_indices");
        }
        for (std::size_t i : *doc.evidence_indices) {
          if (i < n) labels[i] = 1;
        }
        break;
      }
      case SignalSource::kLlm: {
        auto it = signals.llm_labels.find(doc.doc_id);
        if (it == signals.llm_labels.end() || it->second.size() != n) {
          throw MissingSignal("llm: no per-sentence labels for document " + doc.doc_id);
        }
        for (std::size_t i = 0; i < n; ++i) {
          auto label = parse_usefulness_label(it->second[i]);
          if (!label) {
            throw SchemaError(0, "llm: unknown usefulness label \"" + it->second[i] +
                                     "\" in document " + doc.doc_id);
          }
          labels[i] = *label;
        }
        break;
      }
      case SignalSource::kEntropy:
      case SignalSource::kImportance: {
        auto it = signals.scores.find(doc.doc_id);
        if (it == signals.scores.end() || it->second.size() != n) {
          throw MissingSignal(std::string(to_string(source)) +
                              ": no per-sentence scores for document " + doc.doc_id);
        }
        labels = discretize_scores(it->second);
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      examples.push_back(build_selector_example(doc, i, source, labels[i]));
    }
  }
  return examples;
}

SentenceRanking make_ranking(std::string doc_id, std::vector<double> scores) {
  for (double s : scores) {
    if (std::isnan(s)) throw SchemaError(0, "ranking score is NaN in document " + doc_id);
  }
  SentenceRanking ranking;
  ranking.doc_id = std::move(doc_id);
  ranking.order = descending_order(scores);
  ranking.scores = std::move(scores);
  return ranking;
}

double expected_class(std::span<const double> probabilities) {
  double value = 0.0;
  for (std::size_t c = 0; c < probabilities.size(); ++c) {
    value += static_cast<double>(c) * probabilities[c];
  }
  return value;
}

SentenceRanking rank_sentences(const Document& doc, const ScorerBackend& selector) {
  std::vector<std::string> inputs;
  inputs.reserve(doc.sentences.size());
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    inputs.push_back(build_selector_example(doc, i, SignalSource::kEvidence, 0).input_text);
  }
  auto logits = classify_texts(inputs, selector);
  std::vector<double> scores;
  scores.reserve(logits.size());
  for (const auto& l : logits) scores.push_back(expected_class(softmax(l)));
  return make_ranking(doc.doc_id, std::move(scores));
}

SentenceRanking random_ranking(const Document& doc, std::uint64_t seed) {
  Rng rng(derive_seed({seed, fnv1a64("random_ranking"), fnv1a64(doc.doc_id)}));
  std::vector<double> scores(doc.sentences.size());
  for (double& s : scores) s = rng.uniform();
  return make_ranking(doc.doc_id, std::move(scores));
}

SentenceRanking evidence_ranking(const Document& doc) {
  std::vector<double> scores(doc.sentences.size(), 0.0);
  if (doc.evidence_indices) {
    for (std::size_t i : *doc.evidence_indices) {
      if (i < scores.size()) scores[i] = 1.0;
    }
  }
  return make_ranking(doc.doc_id, std::move(scores));
}

std::vector<std::size_t> select_top_k(const SentenceRanking& ranking, std::size_t k) {
  const std::size_t take = std::min(k, ranking.order.size());
  std::vector<std::size_t> out(ranking.order.begin(),
                               ranking.order.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(out.begin(), out.end());
  return out;
}

double rank_weight(Weighting weighting, std::size_t rank, std::size_t pool_size) {
  if (weighting == Weighting::kInverseRank) return 1.0 / static_cast<double>(rank);
  return static_cast<double>(pool_size + 1 - rank);
}

std::vector<std::size_t> sample_selection(const SentenceRanking& ranking,
                                          const SelectionConfig& cfg,
                                          std::size_t sample_index) {
  cfg.validate();
  if (cfg.mode == SelectionMode::kDeterministic) return select_top_k(ranking, cfg.k);

  const std::size_t pool_size = std::min(cfg.pool, ranking.order.size());
  const std::size_t take = std::min(cfg.k, pool_size);
  std::vector<std::size_t> candidates(ranking.order.begin(),
                                      ranking.order.begin() + static_cast<std::ptrdiff_t>(pool_size));
  std::vector<double> weights(pool_size);
  for (std::size_t r = 0; r < pool_size; ++r) {
    weights[r] = rank_weight(cfg.weighting, r + 1, pool_size);
  }

  std::vector<std::size_t> chosen;
  if (take == pool_size) {
    chosen = candidates;
  } else {
    Rng rng(derive_seed({cfg.seed, fnv1a64(ranking.doc_id), sample_index}));
    chosen.reserve(take);
    for (std::size_t draw = 0; draw < take; ++draw) {
      double total = 0.0;
      for (double w : weights) total += w;
      double target = rng.uniform() * total;
      std::size_t pick = weights.size() - 1;
      double cumulative = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        cumulative += weights[i];
        if (target < cumulative) {
          pick = i;
          break;
        }
      }
      chosen.push_back(candidates[pick]);
      candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
      weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::string assemble_input(const Document& doc, std::span<const std::size_t> indices,
                           AssemblyStyle style) {
  std::string out;
  auto append = [&out](std::string_view piece) {
    if (!out.empty()) out += ' ';
    out += piece;
  };
  const bool marked = style == AssemblyStyle::kGapMarked;
  std::size_t expected = 0;
  for (std::size_t idx : indices) {
    if (idx >= doc.sentences.size()) throw std::out_of_range("selected index out of range");
    if (marked && idx != expected) append(kGapMarker);
    append(doc.sentences[idx].text);
    expected = idx + 1;
  }
  if (marked && expected != doc.sentences.size()) append(kGapMarker);
  return out;
}

}  // namespace sentsel
