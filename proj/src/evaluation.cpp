#include "sentsel/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "sentsel/error.hpp"

namespace sentsel {

EvalReport compute_f1(std::span<const ImpactCategory> preds,
                      std::span<const ImpactCategory> golds,
                      MacroAveraging averaging) {
  if (preds.size() != golds.size()) {
    throw LengthMismatch("got " + std::to_string(preds.size()) + " predictions for " +
                         std::to_string(golds.size()) + " gold labels");
  }
  if (preds.empty()) throw LengthMismatch("cannot evaluate zero predictions");

  EvalReport report;
  report.n = preds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    ++report.confusion[index_of(golds[i])][index_of(preds[i])];
  }

  std::size_t correct = 0;
  double f1_sum = 0.0;
  std::size_t averaged = 0;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    std::size_t tp = report.confusion[c][c];
    std::size_t gold_total = 0;
    std::size_t pred_total = 0;
    for (std::size_t o = 0; o < kCategoryCount; ++o) {
      gold_total += report.confusion[c][o];
      pred_total += report.confusion[o][c];
    }
    auto& m = report.per_class[c];
    m.support = gold_total;
    m.precision = pred_total == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred_total);
    m.recall = gold_total == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold_total);
    m.f1 = m.precision + m.recall == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    correct += tp;
    if (averaging == MacroAveraging::kAllClasses || gold_total > 0 || pred_total > 0) {
      f1_sum += m.f1;
      ++averaged;
    }
  }
  report.macro_f1 = f1_sum / static_cast<double>(averaged);
  report.micro_f1 = static_cast<double>(correct) / static_cast<double>(report.n);
  return report;
}

double gain_value(double gain, GainScheme scheme) {
  return scheme == GainScheme::kLinear ? gain : std::exp2(gain) - 1.0;
}

double compute_ndcg(std::span<const std::size_t> order, std::span<const double> gains,
                    std::optional<std::size_t> k, GainScheme scheme) {
  if (order.size() != gains.size()) {
    throw LengthMismatch("ranking has " + std::to_string(order.size()) + " entries for " +
                         std::to_string(gains.size()) + " gains");
  }
  std::vector<bool> seen(gains.size(), false);
  for (std::size_t idx : order) {
    if (idx >= gains.size() || seen[idx]) {
      throw std::invalid_argument("ranking order is not a permutation");
    }
    seen[idx] = true;
  }
  bool any_positive = false;
  for (double g : gains) {
    if (g < 0.0 || std::isnan(g)) throw std::invalid_argument("gains must be non-negative");
    any_positive = any_positive || g > 0.0;
  }
  if (!any_positive) throw AllZeroGains("NDCG is undefined without a positive gain");

  if (k && *k == 0) throw std::invalid_argument("NDCG cutoff must be at least 1");
  const std::size_t cutoff = std::min(k.value_or(gains.size()), gains.size());
  std::vector<double> ideal(gains.begin(), gains.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double dcg = 0.0;
  double idcg = 0.0;
  for (std::size_t i = 0; i < cutoff; ++i) {
    double discount = 1.0 / std::log2(static_cast<double>(i) + 2.0);
    dcg += gain_value(gains[order[i]], scheme) * discount;
    idcg += gain_value(ideal[i], scheme) * discount;
  }
  return dcg / idcg;
}

GainSet evidence_gains(const std::vector<Document>& corpus) {
  GainSet gains;
  for (const auto& doc : corpus) {
    std::vector<double> g(doc.sentences.size(), 0.0);
    if (doc.evidence_indices) {
      for (std::size_t i : *doc.evidence_indices) g.at(i) = 1.0;
    }
    gains.emplace(doc.doc_id, std::move(g));
  }
  return gains;
}

namespace {

template <typename Map>
std::set<std::string> keys_of(const Map& m) {
  std::set<std::string> keys;
  for (const auto& [key, _] : m) keys.insert(key);
  return keys;
}

}  // namespace

AgreementMatrix agreement_matrix(
    const std::vector<std::pair<std::string, RankingSet>>& rankings,
    const std::vector<std::pair<std::string, GainSet>>& truths,
    std::optional<std::size_t> k, GainScheme scheme) {
  std::optional<std::set<std::string>> doc_ids;
  auto check = [&](const std::string& name, const std::set<std::string>& keys) {
    if (!doc_ids) {
      doc_ids = keys;
    } else if (*doc_ids != keys) {
      throw DocIdMismatch("\"" + name + "\" does not cover the same documents");
    }
  };
  for (const auto& [name, set] : rankings) check(name, keys_of(set));
  for (const auto& [name, set] : truths) check(name, keys_of(set));

  AgreementMatrix matrix;
  for (const auto& [name, _] : rankings) matrix.selectors.push_back(name);
  for (const auto& [name, _] : truths) matrix.truths.push_back(name);
  for (const auto& [_, ranking_set] : rankings) {
    std::vector<double> row;
    std::vector<std::size_t> counts;
    for (const auto& [truth_name, gain_set] : truths) {
      double sum = 0.0;
      std::size_t used = 0;
      for (const auto& [doc_id, ranking] : ranking_set) {
        const auto& gains = gain_set.at(doc_id);
        if (std::none_of(gains.begin(), gains.end(), [](double g) { return g > 0.0; })) {
          continue;
        }
        sum += compute_ndcg(ranking.order, gains, k, scheme);
        ++used;
      }
      row.push_back(used == 0 ? std::numeric_limits<double>::quiet_NaN()
                              : sum / static_cast<double>(used));
      counts.push_back(used);
    }
    matrix.values.push_back(std::move(row));
    matrix.documents.push_back(std::move(counts));
  }
  return matrix;
}

}  // namespace sentsel
