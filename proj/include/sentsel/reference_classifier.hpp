#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sentsel/corpus.hpp"
#include "sentsel/scoring.hpp"

namespace sentsel {

// Sparse feature vector, sorted by index.
using FeatureVector = std::vector<std::pair<std::uint32_t, double>>;

inline constexpr std::uint32_t kFeatureDim = 1u << 18;

// Hashed unigram and bigram counts over lowercased reference tokens,
// L2-normalised.
FeatureVector hash_features(std::string_view text);

struct LabeledText {
  std::string text;
  std::size_t label = 0;
};

struct ReferenceHyperparameters {
  std::size_t epochs = 20;
  double learning_rate = 10.0;
  std::size_t batch_size = 16;
  double l2 = 0.0;
  std::size_t max_tokens = kDefaultMaxTokens;
  std::size_t overlap = kDefaultOverlap;
  // Weight examples by inverse class frequency.
  bool balance_classes = false;
};

// Multinomial logistic regression over hashed n-gram features. Serves both as
// a six-class document classifier and as a 2/3-class sentence selector.
class ReferenceClassifier final : public ScorerBackend {
 public:
  static constexpr std::uint32_t kMagic = 0x43525353;  // "SSRC"
  static constexpr std::uint32_t kVersion = 1;

  ReferenceClassifier(std::size_t class_count, std::size_t max_tokens);

  BackendCapabilities capabilities() const override;
  std::vector<Logits> classify(std::span<const std::string> texts) const override;

  Logits logits(const FeatureVector& features) const;

  std::size_t class_count() const { return class_count_; }
  std::size_t max_tokens() const { return max_tokens_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> bias() const { return bias_; }

  void write(std::ostream& out) const;
  static ReferenceClassifier read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static ReferenceClassifier load(const std::filesystem::path& path);

 private:
  friend ReferenceClassifier train_reference_classifier(
      std::span<const LabeledText>, std::size_t, const ReferenceHyperparameters&,
      std::uint64_t);

  std::size_t class_count_;
  std::size_t max_tokens_;
  std::vector<double> weights_;  // [feature * class_count + class]
  std::vector<double> bias_;
};

// Seeded mini-batch gradient descent on softmax cross-entropy. Deterministic
// given (examples, hyperparameters, seed). Throws NoLabeledData when empty.
ReferenceClassifier train_reference_classifier(
    std::span<const LabeledText> examples, std::size_t class_count,
    const ReferenceHyperparameters& hp, std::uint64_t seed);

// Document classifier: every chunk of every labeled document becomes one
// training example carrying the document label.
ReferenceClassifier train_reference_classifier(
    const std::vector<Document>& docs, const ReferenceHyperparameters& hp,
    std::uint64_t seed);

}  // namespace sentsel
