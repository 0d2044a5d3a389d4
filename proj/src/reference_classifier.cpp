#include "sentsel/reference_classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include "sentsel/error.hpp"
#include "sentsel/rng.hpp"

namespace sentsel {

static_assert(std::endian::native == std::endian::little,
              "weight files are written in host byte order");

FeatureVector hash_features(std::string_view text) {
  auto tokens = reference_tokenize(text);
  for (auto& t : tokens) t = to_lower_ascii(t);
  std::map<std::uint32_t, double> counts;
  auto bucket = [](std::string_view key) {
    return static_cast<std::uint32_t>(fnv1a64(key) & (kFeatureDim - 1));
  };
  std::string key;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    key = "u\x1f" + tokens[i];
    counts[bucket(key)] += 1.0;
    if (i + 1 < tokens.size()) {
      key = "b\x1f" + tokens[i] + "\x1f" + tokens[i + 1];
      counts[bucket(key)] += 1.0;
    }
  }
  double norm = 0.0;
  for (const auto& [_, v] : counts) norm += v * v;
  norm = std::sqrt(norm);
  FeatureVector features(counts.begin(), counts.end());
  if (norm > 0.0) {
    for (auto& [_, v] : features) v /= norm;
  }
  return features;
}

ReferenceClassifier::ReferenceClassifier(std::size_t class_count,
                                         std::size_t max_tokens)
    : class_count_(class_count),
      max_tokens_(max_tokens),
      weights_(static_cast<std::size_t>(kFeatureDim) * class_count, 0.0),
      bias_(class_count, 0.0) {}

BackendCapabilities ReferenceClassifier::capabilities() const {
  return BackendCapabilities{max_tokens_, 64, class_count_};
}

Logits ReferenceClassifier::logits(const FeatureVector& features) const {
  Logits out(bias_.begin(), bias_.end());
  for (const auto& [f, v] : features) {
    const double* row = weights_.data() + static_cast<std::size_t>(f) * class_count_;
    for (std::size_t c = 0; c < class_count_; ++c) out[c] += row[c] * v;
  }
  return out;
}

std::vector<Logits> ReferenceClassifier::classify(
    std::span<const std::string> texts) const {
  std::vector<Logits> out;
  out.reserve(texts.size());
  for (const auto& text : texts) out.push_back(logits(hash_features(text)));
  return out;
}

namespace {

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw SchemaError(0, "truncated classifier weights");
  return value;
}

}  // namespace

void ReferenceClassifier::write(std::ostream& out) const {
  write_pod(out, kMagic);
  write_pod(out, kVersion);
  write_pod(out, kFeatureDim);
  write_pod(out, static_cast<std::uint32_t>(class_count_));
  write_pod(out, static_cast<std::uint32_t>(max_tokens_));
  out.write(reinterpret_cast<const char*>(bias_.data()),
            static_cast<std::streamsize>(bias_.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(weights_.data()),
            static_cast<std::streamsize>(weights_.size() * sizeof(double)));
}

ReferenceClassifier ReferenceClassifier::read(std::istream& in) {
  if (read_pod<std::uint32_t>(in) != kMagic) throw SchemaError(0, "not a classifier weight file");
  if (read_pod<std::uint32_t>(in) != kVersion) throw SchemaError(0, "unsupported weight file version");
  if (read_pod<std::uint32_t>(in) != kFeatureDim) throw SchemaError(0, "feature dimension mismatch");
  auto class_count = read_pod<std::uint32_t>(in);
  auto max_tokens = read_pod<std::uint32_t>(in);
  if (class_count < 2 || class_count > 64 || max_tokens == 0) {
    throw SchemaError(0, "invalid classifier header");
  }
  ReferenceClassifier model(class_count, max_tokens);
  in.read(reinterpret_cast<char*>(model.bias_.data()),
          static_cast<std::streamsize>(model.bias_.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(model.weights_.data()),
          static_cast<std::streamsize>(model.weights_.size() * sizeof(double)));
  if (!in) throw SchemaError(0, "truncated classifier weights");
  return model;
}

void ReferenceClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write(out);
  if (!out) throw IoError("failed writing " + path.string());
}

ReferenceClassifier ReferenceClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read(in);
}

ReferenceClassifier train_reference_classifier(
    std::span<const LabeledText> examples, std::size_t class_count,
    const ReferenceHyperparameters& hp, std::uint64_t seed) {
  if (examples.empty()) throw NoLabeledData("no labeled training examples");
  if (class_count < 2) throw std::invalid_argument("class_count must be at least 2");
  for (const auto& ex : examples) {
    if (ex.label >= class_count) throw std::invalid_argument("training label out of range");
  }

  std::vector<FeatureVector> features;
  features.reserve(examples.size());
  for (const auto& ex : examples) features.push_back(hash_features(ex.text));

  std::vector<double> class_weight(class_count, 1.0);
  if (hp.balance_classes) {
    std::vector<std::size_t> counts(class_count, 0);
    for (const auto& ex : examples) ++counts[ex.label];
    std::size_t present = 0;
    for (auto c : counts) present += c > 0;
    for (std::size_t c = 0; c < class_count; ++c) {
      if (counts[c] > 0) {
        class_weight[c] = static_cast<double>(examples.size()) /
                          static_cast<double>(present * counts[c]);
      }
    }
  }

  ReferenceClassifier model(class_count, hp.max_tokens);
  Rng rng(derive_seed({seed, fnv1a64("train_reference_classifier")}));
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t batch = std::max<std::size_t>(1, hp.batch_size);

  // Gradient rows keyed by feature; std::map keeps the update order fixed.
  std::map<std::uint32_t, std::vector<double>> grad;
  std::vector<double> grad_bias(class_count);
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::size_t end = std::min(start + batch, order.size());
      grad.clear();
      std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const auto& x = features[order[k]];
        std::size_t y = examples[order[k]].label;
        auto p = softmax(model.logits(x));
        double w = class_weight[y];
        for (std::size_t c = 0; c < class_count; ++c) {
          p[c] = w * (p[c] - (c == y ? 1.0 : 0.0));
          grad_bias[c] += p[c];
        }
        for (const auto& [f, v] : x) {
          auto& row = grad[f];
          row.resize(class_count, 0.0);
          for (std::size_t c = 0; c < class_count; ++c) row[c] += p[c] * v;
        }
      }
      const double step = hp.learning_rate / static_cast<double>(end - start);
      for (const auto& [f, row] : grad) {
        double* wrow = model.weights_.data() + static_cast<std::size_t>(f) * class_count;
        for (std::size_t c = 0; c < class_count; ++c) {
          wrow[c] -= step * row[c] + hp.learning_rate * hp.l2 * wrow[c];
        }
      }
      for (std::size_t c = 0; c < class_count; ++c) model.bias_[c] -= step * grad_bias[c];
    }
  }
  return model;
}

ReferenceClassifier train_reference_classifier(const std::vector<Document>& docs,
                                               const ReferenceHyperparameters& hp,
                                               std::uint64_t seed) {
  std::vector<LabeledText> examples;
  for (const auto& doc : docs) {
    if (!doc.label) continue;
    auto tokens = reference_tokenize(doc.full_text());
    for (auto& chunk : chunk_text(tokens, hp.max_tokens, hp.overlap)) {
      examples.push_back(LabeledText{std::move(chunk.text), index_of(*doc.label)});
    }
  }
  if (examples.empty()) throw NoLabeledData("no labeled documents");
  return train_reference_classifier(examples, kCategoryCount, hp, seed);
}

}  // namespace sentsel
