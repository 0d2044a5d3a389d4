#include "sentsel/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>

#include "sentsel/error.hpp"
#include "sentsel/parallel.hpp"
#include "sentsel/selection.hpp"

namespace sentsel {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct DocResult {
  StageSeconds seconds;
  StageTokens tokens;
  std::size_t input_tokens = 0;
  ImpactCategory category = ImpactCategory::kDataDeficient;
};

DocResult run_document(const Document& doc, const BenchmarkVariant& variant) {
  DocResult result;
  auto t0 = Clock::now();
  std::optional<SentenceRanking> ranking;
  if (variant.k) {
    if (variant.selector != nullptr) {
      ranking = rank_sentences(doc, *variant.selector);
    } else if (variant.rankings != nullptr) {
      ranking = variant.rankings->at(doc.doc_id);
    } else {
      throw std::invalid_argument("variant " + variant.name + " selects without a ranking");
    }
  }
  auto t1 = Clock::now();

  std::vector<std::size_t> indices;
  if (ranking) {
    indices = select_top_k(*ranking, *variant.k);
  } else {
    indices.resize(doc.sentences.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
  }
  AssemblyStyle style = variant.client != nullptr && ranking ? AssemblyStyle::kGapMarked
                                                             : AssemblyStyle::kConcatenated;
  std::string body = assemble_input(doc, indices, style);
  auto t2 = Clock::now();

  std::string prompt;
  std::string response;
  if (variant.classifier != nullptr) {
    Logits logits = classify_text(body, *variant.classifier, variant.overlap);
    result.category = static_cast<ImpactCategory>(argmax(logits));
  } else {
    prompt = build_llm_prompt(body, doc.species,
                              ranking ? PromptMode::kExtracted : PromptMode::kFullText);
    response = variant.client->generate(prompt, kDefaultMaxNewTokens);
  }
  auto t3 = Clock::now();
  if (variant.client != nullptr) {
    try {
      result.category = parse_llm_answer(response).category;
    } catch (const MalformedResponse&) {
    } catch (const UnknownLabel&) {
    }
  }
  auto t4 = Clock::now();

  result.seconds.ranking = seconds_between(t0, t1);
  result.seconds.selection = seconds_between(t1, t2);
  result.seconds.inference = seconds_between(t2, t3);
  result.seconds.parsing = seconds_between(t3, t4);

  // Token accounting happens outside the timed region.
  if (ranking && variant.selector != nullptr) {
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      result.tokens.ranking += reference_token_count(
          build_selector_example(doc, i, SignalSource::kEvidence, 0).input_text);
    }
  }
  for (std::size_t i : indices) result.input_tokens += doc.sentences[i].token_count;
  if (variant.classifier != nullptr) {
    auto n = reference_token_count(body);
    auto caps = variant.classifier->capabilities();
    for (auto [start, end] : chunk_ranges(n, caps.max_tokens, variant.overlap)) {
      result.tokens.inference += end - start;
    }
  } else {
    result.tokens.inference = reference_token_count(prompt);
    result.tokens.parsing = reference_token_count(response);
  }
  return result;
}

}  // namespace

std::vector<BenchmarkReport> run_benchmark(const std::vector<Document>& corpus,
                                           std::span<const BenchmarkVariant> variants,
                                           std::size_t repetitions, std::size_t workers) {
  if (repetitions < 1) throw std::invalid_argument("benchmark needs at least one repetition");
  std::vector<BenchmarkReport> reports;
  for (const auto& variant : variants) {
    if ((variant.classifier == nullptr) == (variant.client == nullptr)) {
      throw std::invalid_argument("variant " + variant.name +
                                  " needs exactly one of classifier or client");
    }
    BenchmarkReport report;
    report.variant = variant.name;
    report.documents = corpus.size();
    report.repetitions = repetitions;
    report.workers = std::max<std::size_t>(1, workers);
    for (const auto& doc : corpus) {
      for (const auto& s : doc.sentences) report.full_text_tokens += s.token_count;
    }

    std::vector<double> ranking, selection, inference, parsing, total;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      std::vector<DocResult> results(corpus.size());
      auto start = Clock::now();
      parallel_for(corpus.size(), report.workers, [&](std::size_t i) {
        results[i] = run_document(corpus[i], variant);
      });
      total.push_back(seconds_between(start, Clock::now()));

      StageSeconds sums;
      StageTokens tokens;
      std::size_t input_tokens = 0;
      report.predictions.clear();
      for (const auto& r : results) {
        sums.ranking += r.seconds.ranking;
        sums.selection += r.seconds.selection;
        sums.inference += r.seconds.inference;
        sums.parsing += r.seconds.parsing;
        tokens.ranking += r.tokens.ranking;
        tokens.inference += r.tokens.inference;
        tokens.parsing += r.tokens.parsing;
        input_tokens += r.input_tokens;
        report.predictions.push_back(r.category);
      }
      ranking.push_back(sums.ranking);
      selection.push_back(sums.selection);
      inference.push_back(sums.inference);
      parsing.push_back(sums.parsing);
      report.tokens_processed = tokens;
      report.input_tokens = input_tokens;
    }
    report.seconds.ranking = median(ranking);
    report.seconds.selection = median(selection);
    report.seconds.inference = median(inference);
    report.seconds.parsing = median(parsing);
    report.seconds.total = median(total);
    report.documents_per_second =
        report.seconds.total > 0.0 ? static_cast<double>(corpus.size()) / report.seconds.total : 0.0;
    report.reduction_ratio =
        report.full_text_tokens == 0
            ? 1.0
            : static_cast<double>(report.input_tokens) / static_cast<double>(report.full_text_tokens);
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace sentsel
