#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sentsel/benchmark.hpp"
#include "sentsel/evaluation.hpp"
#include "sentsel/inference.hpp"
#include "sentsel/selection.hpp"

// JSON-lines artifact formats. Readers throw SchemaError naming the line.
namespace sentsel::io {

std::string read_text_file(const std::filesystem::path& path);

// {doc_id, scores, order}
void write_rankings(std::ostream& out, const std::vector<SentenceRanking>& rankings);
RankingSet read_rankings(std::istream& in);

// {doc_id, signal, scores}
void write_scores(std::ostream& out, const std::string& signal,
                  const std::map<std::string, std::vector<double>>& scores);
std::map<std::string, std::vector<double>> read_scores(std::istream& in);

// {doc_id, labels: ["Not Useful" | "Slightly Useful" | "Highly Useful", ...]}
std::map<std::string, std::vector<std::string>> read_llm_labels(std::istream& in);

// Gains 0/1/2 from usefulness labels.
GainSet llm_label_gains(const std::map<std::string, std::vector<std::string>>& labels);

// {doc_id, sentence_index, input_text, species, label, source}
void write_examples(std::ostream& out, const std::vector<SelectorExample>& examples);
std::vector<SelectorExample> read_examples(std::istream& in);

// {doc_id, sample_index, indices}
struct SelectionRecord {
  std::string doc_id;
  std::size_t sample_index = 0;
  std::vector<std::size_t> indices;
};
void write_selections(std::ostream& out, const std::vector<SelectionRecord>& records);

// {doc_id, category, votes, summary?, sample_inputs_used, abstentions}
nlohmann::ordered_json to_json(const Prediction& prediction);
void write_predictions(std::ostream& out, const std::vector<Prediction>& predictions);
std::vector<Prediction> read_predictions(std::istream& in);

nlohmann::ordered_json to_json(const EvalReport& report);
nlohmann::ordered_json to_json(const AgreementMatrix& matrix);
void write_agreement_csv(std::ostream& out, const AgreementMatrix& matrix);
nlohmann::ordered_json to_json(const BenchmarkReport& report, bool include_timings = true);

}  // namespace sentsel::io
