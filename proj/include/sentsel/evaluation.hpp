#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sentsel/corpus.hpp"
#include "sentsel/selection.hpp"

namespace sentsel {

// ---------------------------------------------------------------------------
// Classification metrics

enum class MacroAveraging : std::uint8_t {
  kPresentClasses,  // classes occurring in golds or preds
  kAllClasses,      // all six
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold count

  bool operator==(const ClassMetrics&) const = default;
};

using ConfusionMatrix = std::array<std::array<std::size_t, kCategoryCount>, kCategoryCount>;

struct EvalReport {
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  std::array<ClassMetrics, kCategoryCount> per_class{};
  ConfusionMatrix confusion{};  // [gold][predicted]
  std::size_t n = 0;

  bool operator==(const EvalReport&) const = default;
};

// Per-class F1 uses 0/0 := 0. Throws LengthMismatch for unequal or empty
// inputs.
EvalReport compute_f1(std::span<const ImpactCategory> preds,
                      std::span<const ImpactCategory> golds,
                      MacroAveraging averaging = MacroAveraging::kPresentClasses);

// ---------------------------------------------------------------------------
// Ranking agreement

enum class GainScheme : std::uint8_t { kLinear, kExponential };

double gain_value(double gain, GainScheme scheme);

// DCG of `order` over the first k positions (all when k is nullopt) divided by
// the DCG of the gain-descending order. `order` must be a permutation of the
// gain indices. Throws AllZeroGains when no gain is positive.
double compute_ndcg(std::span<const std::size_t> order, std::span<const double> gains,
                    std::optional<std::size_t> k = std::nullopt,
                    GainScheme scheme = GainScheme::kLinear);

using RankingSet = std::map<std::string, SentenceRanking>;    // by doc_id
using GainSet = std::map<std::string, std::vector<double>>;   // by doc_id

// Binary gains from a document's evidence indices.
GainSet evidence_gains(const std::vector<Document>& corpus);

struct AgreementMatrix {
  std::vector<std::string> selectors;
  std::vector<std::string> truths;
  // values[selector][truth]: mean NDCG over documents with a positive gain;
  // NaN when no document qualifies.
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::size_t>> documents;
};

// Throws DocIdMismatch unless every ranking set and gain set covers the same
// doc_ids.
AgreementMatrix agreement_matrix(
    const std::vector<std::pair<std::string, RankingSet>>& rankings,
    const std::vector<std::pair<std::string, GainSet>>& truths,
    std::optional<std::size_t> k = std::nullopt,
    GainScheme scheme = GainScheme::kLinear);

}  // namespace sentsel
