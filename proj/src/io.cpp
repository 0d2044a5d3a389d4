#include "sentsel/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "sentsel/error.hpp"

namespace sentsel::io {

namespace {

using Json = nlohmann::ordered_json;

// Calls fn(json, line) for every non-blank line.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    Json j;
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError(line, "record must be a JSON object");
    fn(j, line);
  }
}

std::string get_string(const Json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw SchemaError(line, std::string("field \"") + key + "\" must be a string");
  }
  return it->get<std::string>();
}

std::size_t get_index(const Json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_unsigned()) {
    throw SchemaError(line, std::string("field \"") + key + "\" must be a non-negative integer");
  }
  return it->get<std::size_t>();
}

template <typename T>
std::vector<T> get_array(const Json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_array()) {
    throw SchemaError(line, std::string("field \"") + key + "\" must be an array");
  }
  try {
    return it->get<std::vector<T>>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(line, std::string("field \"") + key + "\" has invalid elements");
  }
}

Json number_or_null(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_rankings(std::ostream& out, const std::vector<SentenceRanking>& rankings) {
  for (const auto& r : rankings) {
    Json j;
    j["doc_id"] = r.doc_id;
    j["scores"] = r.scores;
    j["order"] = r.order;
    out << j.dump() << '\n';
  }
}

RankingSet read_rankings(std::istream& in) {
  RankingSet set;
  for_each_record(in, [&](const Json& j, std::size_t line) {
    SentenceRanking r;
    r.doc_id = get_string(j, "doc_id", line);
    r.scores = get_array<double>(j, "scores", line);
    r.order = get_array<std::size_t>(j, "order", line);
    std::vector<bool> seen(r.scores.size(), false);
    if (r.order.size() != r.scores.size()) throw SchemaError(line, "order and scores differ in length");
    for (std::size_t idx : r.order) {
      if (idx >= seen.size() || seen[idx]) throw SchemaError(line, "order is not a permutation");
      seen[idx] = true;
    }
    if (!set.emplace(r.doc_id, r).second) throw SchemaError(line, "duplicate doc_id " + r.doc_id);
  });
  return set;
}

void write_scores(std::ostream& out, const std::string& signal,
                  const std::map<std::string, std::vector<double>>& scores) {
  for (const auto& [doc_id, values] : scores) {
    Json j;
    j["doc_id"] = doc_id;
    j["signal"] = signal;
    j["scores"] = values;
    out << j.dump() << '\n';
  }
}

std::map<std::string, std::vector<double>> read_scores(std::istream& in) {
  std::map<std::string, std::vector<double>> scores;
  for_each_record(in, [&](const Json& j, std::size_t line) {
    auto doc_id = get_string(j, "doc_id", line);
    if (!scores.emplace(doc_id, get_array<double>(j, "scores", line)).second) {
      throw SchemaError(line, "duplicate doc_id " + doc_id);
    }
  });
  return scores;
}

std::map<std::string, std::vector<std::string>> read_llm_labels(std::istream& in) {
  std::map<std::string, std::vector<std::string>> labels;
  for_each_record(in, [&](const Json& j, std::size_t line) {
    auto doc_id = get_string(j, "doc_id", line);
    auto values = get_array<std::string>(j, "labels", line);
    for (const auto& v : values) {
      if (!parse_usefulness_label(v)) throw SchemaError(line, "unknown usefulness label \"" + v + "\"");
    }
    if (!labels.emplace(doc_id, std::move(values)).second) {
      throw SchemaError(line, "duplicate doc_id " + doc_id);
    }
  });
  return labels;
}

GainSet llm_label_gains(const std::map<std::string, std::vector<std::string>>& labels) {
  GainSet gains;
  for (const auto& [doc_id, values] : labels) {
    std::vector<double> g;
    for (const auto& v : values) {
      auto label = parse_usefulness_label(v);
      if (!label) throw SchemaError(0, "unknown usefulness label \"" + v + "\"");
      g.push_back(static_cast<double>(*label));
    }
    gains.emplace(doc_id, std::move(g));
  }
  return gains;
}

void write_examples(std::ostream& out, const std::vector<SelectorExample>& examples) {
  for (const auto& ex : examples) {
    Json j;
    j["doc_id"] = ex.doc_id;
    j["sentence_index"] = ex.sentence_index;
    j["input_text"] = ex.input_text;
    j["species"] = ex.species;
    j["label"] = ex.label;
    j["source"] = std::string(to_string(ex.source));
    out << j.dump() << '\n';
  }
}

std::vector<SelectorExample> read_examples(std::istream& in) {
  std::vector<SelectorExample> examples;
  for_each_record(in, [&](const Json& j, std::size_t line) {
    SelectorExample ex;
    ex.doc_id = get_string(j, "doc_id", line);
    ex.sentence_index = get_index(j, "sentence_index", line);
    ex.input_text = get_string(j, "input_text", line);
    ex.species = get_string(j, "species", line);
    ex.label = get_index(j, "label", line);
    auto source = parse_signal_source(get_string(j, "source", line));
    if (!source) throw SchemaError(line, "unknown source");
    ex.source = *source;
    if (ex.label >= class_count(ex.source)) throw SchemaError(line, "label out of range for source");
    examples.push_back(std::move(ex));
  });
  return examples;
}

void write_selections(std::ostream& out, const std::vector<SelectionRecord>& records) {
  for (const auto& r : records) {
    Json j;
    j["doc_id"] = r.doc_id;
    j["sample_index"] = r.sample_index;
    j["indices"] = r.indices;
    out << j.dump() << '\n';
  }
}

Json to_json(const Prediction& p) {
  Json j;
  j["doc_id"] = p.doc_id;
  j["category"] = std::string(to_string(p.category));
  Json votes = Json::object();
  for (const auto& [category, count] : p.votes) votes[std::string(to_string(category))] = count;
  j["votes"] = std::move(votes);
  if (p.summary) j["summary"] = *p.summary;
  j["sample_inputs_used"] = p.sample_inputs_used;
  j["abstentions"] = p.abstentions;
  if (p.all_abstained) j["all_abstained"] = true;
  return j;
}

void write_predictions(std::ostream& out, const std::vector<Prediction>& predictions) {
  for (const auto& p : predictions) out << to_json(p).dump() << '\n';
}

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> predictions;
  for_each_record(in, [&](const Json& j, std::size_t line) {
    Prediction p;
    p.doc_id = get_string(j, "doc_id", line);
    auto category = parse_category(get_string(j, "category", line));
    if (!category) throw SchemaError(line, "unknown category");
    p.category = *category;
    if (auto votes = j.find("votes"); votes != j.end()) {
      if (!votes->is_object()) throw SchemaError(line, "field \"votes\" must be an object");
      for (const auto& [label, count] : votes->items()) {
        auto c = parse_category(label);
        if (!c || !count.is_number_unsigned()) throw SchemaError(line, "invalid vote entry");
        p.votes[*c] = count.get<std::size_t>();
      }
    }
    if (auto summary = j.find("summary"); summary != j.end() && summary->is_string()) {
      p.summary = summary->get<std::string>();
    }
    p.sample_inputs_used = get_index(j, "sample_inputs_used", line);
    p.abstentions = j.contains("abstentions") ? get_index(j, "abstentions", line) : 0;
    p.all_abstained = j.value("all_abstained", false);
    predictions.push_back(std::move(p));
  });
  return predictions;
}

Json to_json(const EvalReport& report) {
  Json j;
  j["n"] = report.n;
  j["macro_f1"] = report.macro_f1;
  j["micro_f1"] = report.micro_f1;
  Json per_class = Json::object();
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    const auto& m = report.per_class[c];
    per_class[std::string(to_string(static_cast<ImpactCategory>(c)))] = {
        {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
  }
  j["per_class"] = std::move(per_class);
  Json confusion = Json::array();
  for (const auto& row : report.confusion) confusion.push_back(row);
  j["confusion"] = std::move(confusion);
  Json labels = Json::array();
  for (auto c : kAllCategories) labels.push_back(std::string(to_string(c)));
  j["labels"] = std::move(labels);
  return j;
}

Json to_json(const AgreementMatrix& matrix) {
  Json j;
  j["selectors"] = matrix.selectors;
  j["truths"] = matrix.truths;
  Json values = Json::array();
  for (const auto& row : matrix.values) {
    Json r = Json::array();
    for (double v : row) r.push_back(number_or_null(v));
    values.push_back(std::move(r));
  }
  j["ndcg"] = std::move(values);
  j["documents"] = matrix.documents;
  return j;
}

void write_agreement_csv(std::ostream& out, const AgreementMatrix& matrix) {
  out << "selector";
  for (const auto& t : matrix.truths) out << ',' << t;
  out << '\n';
  for (std::size_t r = 0; r < matrix.selectors.size(); ++r) {
    out << matrix.selectors[r];
    for (double v : matrix.values[r]) {
      out << ',';
      if (!std::isnan(v)) out << std::fixed << std::setprecision(6) << v;
    }
    out << '\n';
  }
}

Json to_json(const BenchmarkReport& report, bool include_timings) {
  Json j;
  j["variant"] = report.variant;
  j["documents"] = report.documents;
  j["repetitions"] = report.repetitions;
  j["workers"] = report.workers;
  if (include_timings) {
    j["seconds"] = {{"ranking", report.seconds.ranking},
                    {"selection", report.seconds.selection},
                    {"inference", report.seconds.inference},
                    {"parsing", report.seconds.parsing},
                    {"total", report.seconds.total}};
    j["documents_per_second"] = report.documents_per_second;
  }
  j["tokens_processed"] = {{"ranking", report.tokens_processed.ranking},
                           {"inference", report.tokens_processed.inference},
                           {"parsing", report.tokens_processed.parsing}};
  j["full_text_tokens"] = report.full_text_tokens;
  j["input_tokens"] = report.input_tokens;
  j["reduction_ratio"] = report.reduction_ratio;
  return j;
}

}  // namespace sentsel::io
