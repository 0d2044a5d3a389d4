#include "sentsel/inference.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "sentsel/error.hpp"
#include "sentsel/prompt_assets.hpp"

namespace sentsel {

namespace {

constexpr std::string_view kPromptOpening =
    "This is a scientific paper about an invasive species: ";
constexpr std::string_view kPromptEndOfText =
    "\n\nThis is the end of the scientific text. Your task is to classify the "
    "impact that the invasive species ";
constexpr std::string_view kPromptClasses =
    " has. Note that the text might contain information on other species. "
    "Possible classes are the following:\n\n";
constexpr std::string_view kPromptInstructions =
    "\nReturn just the classification and end your answer, and provide one of "
    "the following labels as answer: \"Minimal\", \"Minor\", \"Moderate\", "
    "\"Major\", \"Massive\", \"Data Deficient\". Provide your answer by just "
    "using the following response format, and do not answer anything else in "
    "addition to that:\n\n";
constexpr std::string_view kPromptSummaryLine =
    "Summary: [One sentence summarizing the key information that you consider "
    "for the assessment]\n\n";
constexpr std::string_view kPromptAnswerLine =
    "Answer: [Your answer, that is one of the six labels]\n\nEND.";

bool starts_with_ci(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

bool is_decoration(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0 ||
         std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::string_view strip_decoration(std::string_view text) {
  while (!text.empty() && is_decoration(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_decoration(text.back())) text.remove_suffix(1);
  return text;
}

// Line without its leading whitespace and markdown emphasis.
std::string_view line_body(std::string_view line) {
  while (!line.empty() && (std::isspace(static_cast<unsigned char>(line.front())) ||
                           line.front() == '*' || line.front() == '#')) {
    line.remove_prefix(1);
  }
  return line;
}

}  // namespace

std::string build_llm_prompt(std::string_view body_text, std::string_view species,
                             PromptMode mode, bool include_summary) {
  if (trim(species).empty()) throw EmptySpecies("species name must be non-empty");
  std::string prompt;
  prompt.reserve(body_text.size() + assets::kCategoryDescriptions.size() + 1024);
  if (mode == PromptMode::kExtracted) {
    prompt += kExtractionNotice;
    prompt += "\n\n";
  }
  prompt += kPromptOpening;
  prompt += body_text;
  prompt += kPromptEndOfText;
  prompt += species;
  prompt += kPromptClasses;
  prompt += assets::kCategoryDescriptions;
  prompt += kPromptInstructions;
  if (include_summary) prompt += kPromptSummaryLine;
  prompt += kPromptAnswerLine;
  return prompt;
}

ParsedAnswer parse_llm_answer(std::string_view response) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= response.size()) {
    std::size_t next = response.find('\n', pos);
    if (next == std::string_view::npos) next = response.size();
    std::string_view line = response.substr(pos, next - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = next + 1;
  }

  std::optional<std::string> summary;
  std::optional<std::string_view> answer;
  for (std::size_t i = 0; i < lines.size() && !answer; ++i) {
    std::string_view body = line_body(lines[i]);
    if (!summary && starts_with_ci(body, "summary:")) {
      summary = std::string(trim(line_body(body.substr(8))));
    } else if (starts_with_ci(body, "answer:")) {
      std::string_view rest = trim(body.substr(7));
      // The label may sit on the following non-empty line.
      for (std::size_t j = i + 1; strip_decoration(rest).empty() && j < lines.size(); ++j) {
        rest = trim(lines[j]);
      }
      answer = rest;
    }
  }
  if (!answer) throw MalformedResponse("response has no \"Answer:\" line");

  std::string label = collapse_whitespace(strip_decoration(*answer));
  std::string lowered = to_lower_ascii(label);
  if (lowered.size() > 4 && lowered.ends_with(" end")) {
    label = std::string(strip_decoration(std::string_view(label).substr(0, label.size() - 4)));
  }
  auto category = parse_category(label);
  if (!category) throw UnknownLabel("unknown answer label \"" + label.substr(0, 80) + "\"");
  return ParsedAnswer{summary.value_or(std::string()), *category};
}

// ---------------------------------------------------------------------------

VoteCounts count_votes(std::span<const Vote> votes) {
  VoteCounts counts;
  for (const auto& v : votes) ++counts[v.category];
  return counts;
}

ImpactCategory majority_vote(std::span<const Vote> votes) {
  if (votes.empty()) throw std::invalid_argument("majority_vote needs at least one vote");
  std::array<std::size_t, kCategoryCount> count{};
  std::array<double, kCategoryCount> confidence{};
  std::array<std::size_t, kCategoryCount> scored{};
  for (const auto& v : votes) {
    auto c = index_of(v.category);
    ++count[c];
    if (v.confidence) {
      confidence[c] += *v.confidence;
      ++scored[c];
    }
  }
  auto mean_confidence = [&](std::size_t c) {
    return scored[c] == 0 ? 0.0 : confidence[c] / static_cast<double>(scored[c]);
  };
  std::size_t best = kCategoryCount;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    if (count[c] == 0) continue;
    if (best == kCategoryCount || count[c] > count[best] ||
        (count[c] == count[best] && mean_confidence(c) > mean_confidence(best))) {
      best = c;
    }
  }
  return static_cast<ImpactCategory>(best);
}

// ---------------------------------------------------------------------------

namespace {

const SentenceRanking& require_ranking(const SentenceRanking* ranking,
                                       const Document& doc) {
  if (ranking == nullptr) {
    throw InvalidSelectionConfig("sentence selection requires a ranking for " + doc.doc_id);
  }
  if (ranking->scores.size() != doc.sentences.size()) {
    throw SchemaError(0, "ranking for " + doc.doc_id + " does not match its sentence count");
  }
  return *ranking;
}

// The sentence subsets fed to the model, one per sample.
std::vector<std::vector<std::size_t>> selections_for(const SentenceRanking& ranking,
                                                     const SelectionConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<std::size_t>> out;
  if (cfg.mode == SelectionMode::kDeterministic) {
    out.push_back(select_top_k(ranking, cfg.k));
  } else {
    for (std::size_t s = 0; s < cfg.num_samples; ++s) {
      out.push_back(sample_selection(ranking, cfg, s));
    }
  }
  return out;
}

}  // namespace

Prediction predict_with_classifier(const Document& doc, const SentenceRanking* ranking,
                                   const PredictionConfig& cfg,
                                   const ScorerBackend& backend) {
  Prediction prediction;
  prediction.doc_id = doc.doc_id;
  if (!cfg.selection) {
    prediction.category = classify_document(doc, backend, cfg.overlap).argmax();
    return prediction;
  }

  const auto& ranked = require_ranking(ranking, doc);
  auto selections = selections_for(ranked, *cfg.selection);
  std::vector<Vote> votes;
  std::vector<double> summed(kCategoryCount, 0.0);
  for (const auto& indices : selections) {
    std::string input = assemble_input(doc, indices, AssemblyStyle::kConcatenated);
    Logits logits = classify_text(input, backend, cfg.overlap);
    if (logits.size() != kCategoryCount) {
      throw BackendError("document classification needs a six-class backend");
    }
    auto probs = softmax(logits);
    std::size_t best = argmax(logits);
    votes.push_back(Vote{static_cast<ImpactCategory>(best), probs[best]});
    for (std::size_t c = 0; c < kCategoryCount; ++c) summed[c] += logits[c];
  }
  prediction.sample_inputs_used = selections.size();
  if (cfg.selection->mode == SelectionMode::kDeterministic) {
    prediction.category = votes.front().category;
    return prediction;
  }
  prediction.votes = count_votes(votes);
  prediction.category = cfg.aggregation == SampleAggregation::kVote
                            ? majority_vote(votes)
                            : static_cast<ImpactCategory>(argmax(summed));
  return prediction;
}

Prediction predict_with_llm(const Document& doc, const SentenceRanking* ranking,
                            const PredictionConfig& cfg, const GenerationClient& client) {
  Prediction prediction;
  prediction.doc_id = doc.doc_id;

  std::vector<std::string> bodies;
  PromptMode mode = PromptMode::kFullText;
  bool randomized = false;
  if (!cfg.selection) {
    bodies.push_back(doc.full_text());
  } else {
    mode = PromptMode::kExtracted;
    randomized = cfg.selection->mode == SelectionMode::kRandomized;
    for (const auto& indices : selections_for(require_ranking(ranking, doc), *cfg.selection)) {
      bodies.push_back(assemble_input(doc, indices, AssemblyStyle::kGapMarked));
    }
  }

  std::vector<Vote> votes;
  std::vector<std::string> summaries;
  for (const auto& body : bodies) {
    std::string prompt = build_llm_prompt(body, doc.species, mode, cfg.include_summary);
    std::string response;
    try {
      response = client.generate(prompt, cfg.max_new_tokens);
    } catch (const ClientError&) {
      throw;
    } catch (const std::exception& e) {
      throw ClientError(std::string("generation failed for ") + doc.doc_id + ": " + e.what());
    }
    try {
      ParsedAnswer parsed = parse_llm_answer(response);
      votes.push_back(Vote{parsed.category, std::nullopt});
      summaries.push_back(std::move(parsed.summary));
    } catch (const MalformedResponse&) {
      ++prediction.abstentions;
    } catch (const UnknownLabel&) {
      ++prediction.abstentions;
    }
  }
  prediction.sample_inputs_used = bodies.size();
  if (votes.empty()) {
    prediction.category = ImpactCategory::kDataDeficient;
    prediction.all_abstained = true;
    return prediction;
  }
  prediction.category = majority_vote(votes);
  if (randomized) prediction.votes = count_votes(votes);
  for (std::size_t i = 0; i < votes.size(); ++i) {
    if (votes[i].category == prediction.category) {
      if (cfg.include_summary) prediction.summary = summaries[i];
      break;
    }
  }
  return prediction;
}

// ---------------------------------------------------------------------------

std::string KeywordEchoClient::generate(const std::string& prompt, int) const {
  std::size_t begin = prompt.find(kPromptOpening);
  std::size_t end = prompt.rfind(kPromptEndOfText);
  std::string_view body;
  if (begin != std::string::npos && end != std::string::npos &&
      end >= begin + kPromptOpening.size()) {
    begin += kPromptOpening.size();
    body = std::string_view(prompt).substr(begin, end - begin);
  }

  std::vector<std::string> words;
  std::string word;
  for (char c : body) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!word.empty()) {
      words.push_back(std::move(word));
      word.clear();
    }
  }
  if (!word.empty()) words.push_back(std::move(word));

  std::array<std::size_t, kCategoryCount> counts{};
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i];
    if (w == "minimal") ++counts[0];
    else if (w == "minor") ++counts[1];
    else if (w == "moderate") ++counts[2];
    else if (w == "major") ++counts[3];
    else if (w == "massive") ++counts[4];
    else if (w == "data" && i + 1 < words.size() && words[i + 1] == "deficient") ++counts[5];
  }
  std::size_t best = kCategoryCount - 1;
  std::size_t best_count = 0;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    if (counts[c] > best_count) {
      best = c;
      best_count = counts[c];
    }
  }
  auto label = to_string(static_cast<ImpactCategory>(best));
  return "Summary: The text points most often to " + std::string(label) +
         " impacts.\n\nAnswer: " + std::string(label) + "\n\nEND.";
}

}  // namespace sentsel
