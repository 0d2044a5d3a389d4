#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "sentsel/corpus.hpp"
#include "sentsel/inference.hpp"
#include "sentsel/rng.hpp"
#include "sentsel/scoring.hpp"
#include "sentsel/text.hpp"

namespace sentsel::testing {

// Returns the same logits for every text.
class FixedBackend final : public ScorerBackend {
 public:
  explicit FixedBackend(Logits logits, BackendCapabilities caps = {})
      : logits_(std::move(logits)), caps_(caps) {
    caps_.class_count = logits_.size();
  }
  BackendCapabilities capabilities() const override { return caps_; }
  std::vector<Logits> classify(std::span<const std::string> texts) const override {
    return std::vector<Logits>(texts.size(), logits_);
  }

 private:
  Logits logits_;
  BackendCapabilities caps_;
};

class FunctionBackend final : public ScorerBackend {
 public:
  FunctionBackend(std::function<Logits(const std::string&)> fn, BackendCapabilities caps = {})
      : fn_(std::move(fn)), caps_(caps) {}
  BackendCapabilities capabilities() const override { return caps_; }
  std::vector<Logits> classify(std::span<const std::string> texts) const override {
    ++calls;
    std::vector<Logits> out;
    for (const auto& t : texts) out.push_back(fn_(t));
    return out;
  }
  mutable std::atomic<std::size_t> calls{0};

 private:
  std::function<Logits(const std::string&)> fn_;
  BackendCapabilities caps_;
};

// Logit c is the number of times keyword c occurs among the reference tokens.
inline const std::vector<std::string>& count_keywords() {
  static const std::vector<std::string> k = {"minimal", "minor",   "moderate",
                                             "major",   "massive", "deficient"};
  return k;
}

inline Logits keyword_counts(const std::string& text) {
  Logits out(kCategoryCount, 0.0);
  for (const auto& tok : reference_tokenize(text)) {
    auto lower = to_lower_ascii(tok);
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      if (lower == count_keywords()[c]) out[c] += 1.0;
    }
  }
  return out;
}

class ScriptedClient final : public GenerationClient {
 public:
  explicit ScriptedClient(std::function<std::string(const std::string&)> fn) : fn_(std::move(fn)) {}
  std::string generate(const std::string& prompt, int) const override { return fn_(prompt); }

 private:
  std::function<std::string(const std::string&)> fn_;
};

inline Document make_doc(const std::vector<std::string>& sentences, std::string doc_id = "d1",
                         std::string species = "Sus scrofa",
                         std::optional<ImpactCategory> label = std::nullopt) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  doc.species = std::move(species);
  doc.title = "t";
  doc.label = label;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    doc.sentences.push_back({i, sentences[i], reference_token_count(sentences[i])});
  }
  return doc;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("sentsel-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace sentsel::testing
