#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentsel/corpus.hpp"

// Seeded generator of labelled documents for tests, benchmarks and demos.
// Every document carries `signal_sentences` statements about its own species
// that use phrases of its class, a few statements about other species that use
// phrases of one wrong class, and filler about methods and study sites.
namespace sentsel {

struct SyntheticConfig {
  std::size_t documents = 120;
  std::size_t documents_per_species = 2;
  std::size_t signal_sentences = 5;
  std::size_t distractor_sentences = 100;
  std::size_t min_other_species = 3;
  std::size_t max_other_species = 8;
  std::uint64_t seed = 0;
};

// Labels cycle through the six categories by species, so the corpus is
// balanced when `documents` is a multiple of 6 * documents_per_species.
// Evidence indices mark the signal sentences.
std::vector<Document> generate_synthetic_corpus(const SyntheticConfig& cfg);

// Phrases used for signal and other-species sentences of a category.
std::span<const std::string_view> class_phrases(ImpactCategory category);

}  // namespace sentsel
