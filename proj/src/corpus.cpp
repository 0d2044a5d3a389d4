#include "sentsel/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sentsel/error.hpp"
#include "sentsel/rng.hpp"

namespace sentsel {

namespace {

using Json = nlohmann::ordered_json;

struct CategoryAlias {
  std::string_view name;
  ImpactCategory category;
};

// Lowercased, single-spaced.
constexpr CategoryAlias kAliases[] = {
    {"minimal", ImpactCategory::kMinimalConcern},
    {"minimal concern", ImpactCategory::kMinimalConcern},
    {"minor", ImpactCategory::kMinor},
    {"moderate", ImpactCategory::kModerate},
    {"major", ImpactCategory::kMajor},
    {"major risk", ImpactCategory::kMajor},
    {"massive", ImpactCategory::kMassive},
    {"data deficient", ImpactCategory::kDataDeficient},
};

}  // namespace

std::string_view to_string(ImpactCategory category) {
  switch (category) {
    case ImpactCategory::kMinimalConcern: return "Minimal";
    case ImpactCategory::kMinor: return "Minor";
    case ImpactCategory::kModerate: return "Moderate";
    case ImpactCategory::kMajor: return "Major";
    case ImpactCategory::kMassive: return "Massive";
    case ImpactCategory::kDataDeficient: return "Data Deficient";
  }
  return "Data Deficient";
}

std::optional<ImpactCategory> parse_category(std::string_view text) {
  std::string key = to_lower_ascii(collapse_whitespace(text));
  for (const auto& alias : kAliases) {
    if (alias.name == key) return alias.category;
  }
  return std::nullopt;
}

ImpactCategory parse_category_or_throw(std::string_view text) {
  auto category = parse_category(text);
  if (!category) {
    throw UnknownCategory("unknown impact category \"" + std::string(text) + "\"");
  }
  return *category;
}

Document make_document(std::string doc_id, std::string species,
                       std::string title, std::string_view raw_text,
                       std::optional<ImpactCategory> label) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  doc.species = std::move(species);
  doc.title = std::move(title);
  doc.sentences = segment_sentences(raw_text);
  doc.label = label;
  return doc;
}

Document remove_sentence(const Document& doc, std::size_t idx) {
  Document out = doc;
  out.sentences.erase(out.sentences.begin() + static_cast<std::ptrdiff_t>(idx));
  for (std::size_t i = idx; i < out.sentences.size(); ++i) {
    out.sentences[i].index = i;
  }
  if (out.evidence_indices) {
    std::vector<std::size_t> shifted;
    for (std::size_t e : *out.evidence_indices) {
      if (e < idx) shifted.push_back(e);
      else if (e > idx) shifted.push_back(e - 1);
    }
    out.evidence_indices = std::move(shifted);
  }
  return out;
}

Document subset_document(const Document& doc,
                         const std::vector<std::size_t>& indices) {
  Document out;
  out.doc_id = doc.doc_id;
  out.species = doc.species;
  out.title = doc.title;
  out.label = doc.label;
  out.sentences.reserve(indices.size());
  for (std::size_t i : indices) {
    Sentence s = doc.sentences.at(i);
    s.index = out.sentences.size();
    out.sentences.push_back(std::move(s));
  }
  if (doc.evidence_indices) {
    std::vector<std::size_t> kept;
    for (std::size_t pos = 0; pos < indices.size(); ++pos) {
      if (std::binary_search(doc.evidence_indices->begin(), doc.evidence_indices->end(),
                             indices[pos])) {
        kept.push_back(pos);
      }
    }
    out.evidence_indices = std::move(kept);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::vector<std::string>> parse_csv(std::string_view text,
                                                char delimiter) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    // Skip fully blank lines.
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };

  // Strip a UTF-8 byte order mark.
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == delimiter) {
      end_field();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_row();
    } else if (c == '\n') {
      end_row();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw SchemaError(rows.size() + 1, "unterminated quoted field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

std::vector<AssessmentRecord> ingest_assessments(std::string_view csv_text,
                                                 const CsvOptions& options) {
  auto rows = parse_csv(csv_text, options.delimiter);
  if (rows.empty()) throw MissingField("assessment table has no header row");

  const auto& header = rows.front();
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (to_lower_ascii(trim(header[i])) == name) return i;
    }
    return std::nullopt;
  };
  auto species_col = column("species");
  auto publication_col = column("publication");
  auto category_col = column("category");
  auto evidence_col = column("evidence");
  for (auto [name, col] : {std::pair{"species", species_col},
                           std::pair{"publication", publication_col},
                           std::pair{"category", category_col},
                           std::pair{"evidence", evidence_col}}) {
    if (!col) throw MissingField(std::string("header lacks column \"") + name + "\"");
  }

  std::vector<AssessmentRecord> records;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    std::string where = "row " + std::to_string(r + 1);
    auto cell = [&](std::size_t col) -> std::string {
      return col < row.size() ? std::string(trim(row[col])) : std::string();
    };
    AssessmentRecord record;
    record.species = collapse_whitespace(cell(*species_col));
    if (record.species.empty()) throw MissingField(where + ": empty species");
    record.publication = collapse_whitespace(cell(*publication_col));
    if (record.publication.empty()) throw MissingField(where + ": empty publication");
    std::string category = cell(*category_col);
    if (category.empty()) throw MissingField(where + ": empty category");
    auto parsed = parse_category(category);
    if (!parsed) {
      throw UnknownCategory(where + ": unknown impact category \"" + category + "\"");
    }
    record.category = *parsed;

    std::string evidence = cell(*evidence_col);
    const std::string& sep = options.evidence_delimiter;
    std::size_t pos = 0;
    while (!evidence.empty()) {
      std::size_t next = sep.empty() ? std::string::npos : evidence.find(sep, pos);
      std::string piece = collapse_whitespace(
          std::string_view(evidence).substr(pos, next == std::string::npos ? std::string::npos : next - pos));
      if (!piece.empty()) record.evidence.push_back(std::move(piece));
      if (next == std::string::npos) break;
      pos = next + sep.size();
    }
    records.push_back(std::move(record));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Splits

std::string_view to_string(SplitName split) {
  switch (split) {
    case SplitName::kTrain: return "train";
    case SplitName::kVal: return "val";
    case SplitName::kTest: return "test";
  }
  return "train";
}

std::optional<SplitName> parse_split_name(std::string_view text) {
  if (text == "train") return SplitName::kTrain;
  if (text == "val") return SplitName::kVal;
  if (text == "test") return SplitName::kTest;
  return std::nullopt;
}

SplitName CorpusSplit::of(const std::string& species) const {
  auto it = assignment.find(species);
  if (it == assignment.end()) {
    throw SchemaError(0, "species \"" + species + "\" missing from split");
  }
  return it->second;
}

CorpusSplit build_splits(const std::vector<Document>& corpus,
                         const SplitRatios& ratios, std::uint64_t seed) {
  for (double r : {ratios.train, ratios.val, ratios.test}) {
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidRatios("split ratios must lie in [0, 1]");
  }
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw InvalidRatios("split ratios must sum to 1");
  }
  if (corpus.empty()) throw InvalidRatios("cannot split an empty corpus");

  std::set<std::string> unique;
  for (const auto& doc : corpus) unique.insert(doc.species);
  std::vector<std::string> species(unique.begin(), unique.end());
  Rng rng(derive_seed({seed, fnv1a64("build_splits")}));
  rng.shuffle(species);

  const auto count = static_cast<double>(species.size());
  std::size_t n_val = static_cast<std::size_t>(std::llround(ratios.val * count));
  std::size_t n_test = static_cast<std::size_t>(std::llround(ratios.test * count));
  n_val = std::min(n_val, species.size());
  n_test = std::min(n_test, species.size() - n_val);
  std::size_t n_train = species.size() - n_val - n_test;

  CorpusSplit split;
  for (std::size_t i = 0; i < species.size(); ++i) {
    SplitName name = i < n_train           ? SplitName::kTrain
                     : i < n_train + n_val ? SplitName::kVal
                                           : SplitName::kTest;
    split.assignment.emplace(species[i], name);
  }
  return split;
}

std::vector<Document> filter_split(const std::vector<Document>& corpus,
                                   const CorpusSplit& split, SplitName which) {
  std::vector<Document> out;
  for (const auto& doc : corpus) {
    if (split.of(doc.species) == which) out.push_back(doc);
  }
  return out;
}

void write_split(std::ostream& out, const CorpusSplit& split) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [species, name] : split.assignment) {
    j[species] = std::string(to_string(name));
  }
  out << j.dump(2) << '\n';
}

CorpusSplit read_split(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(0, std::string("split file: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError(0, "split file must be a JSON object");
  CorpusSplit split;
  for (const auto& [species, value] : j.items()) {
    auto name = value.is_string() ? parse_split_name(value.get<std::string>())
                                  : std::nullopt;
    if (!name) throw SchemaError(0, "invalid split name for species \"" + species + "\"");
    split.assignment.emplace(species, *name);
  }
  return split;
}

// ---------------------------------------------------------------------------
// Corpus persistence

namespace {

Json document_to_json(const Document& doc) {
  Json j;
  j["doc_id"] = doc.doc_id;
  j["species"] = doc.species;
  j["title"] = doc.title;
  Json sentences = Json::array();
  for (const auto& s : doc.sentences) {
    sentences.push_back(Json{{"index", s.index}, {"text", s.text}});
  }
  j["sentences"] = std::move(sentences);
  if (doc.label) j["label"] = std::string(to_string(*doc.label));
  if (doc.evidence_indices) j["evidence_indices"] = *doc.evidence_indices;
  return j;
}

const std::string& require_string(const Json& j, const char* key,
                                  std::size_t line, bool non_empty) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(line, std::string("missing field \"") + key + "\"");
  if (!it->is_string()) throw SchemaError(line, std::string("field \"") + key + "\" must be a string");
  const auto& value = it->get_ref<const std::string&>();
  if (non_empty && value.empty()) {
    throw SchemaError(line, std::string("field \"") + key + "\" must be non-empty");
  }
  return value;
}

Document document_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "document record must be an object");
  static const std::set<std::string> kKnown = {
      "doc_id", "species", "title", "sentences", "label", "evidence_indices"};
  for (const auto& [key, _] : j.items()) {
    if (!kKnown.contains(key)) throw SchemaError(line, "unknown field \"" + key + "\"");
  }

  Document doc;
  doc.doc_id = require_string(j, "doc_id", line, true);
  doc.species = require_string(j, "species", line, true);
  doc.title = require_string(j, "title", line, false);

  auto sentences = j.find("sentences");
  if (sentences == j.end() || !sentences->is_array()) {
    throw SchemaError(line, "field \"sentences\" must be an array");
  }
  for (const auto& s : *sentences) {
    if (!s.is_object() || !s.contains("index") || !s.contains("text") ||
        !s["index"].is_number_unsigned() || !s["text"].is_string()) {
      throw SchemaError(line, "sentence records need {index, text}");
    }
    Sentence sentence;
    sentence.index = s["index"].get<std::size_t>();
    sentence.text = s["text"].get<std::string>();
    if (sentence.index != doc.sentences.size()) {
      throw SchemaError(line, "sentence indices must be contiguous from 0");
    }
    if (sentence.text.empty() ||
        sentence.text.find_first_of("\r\n") != std::string::npos) {
      throw SchemaError(line, "sentence text must be non-empty and single-line");
    }
    sentence.token_count = reference_token_count(sentence.text);
    doc.sentences.push_back(std::move(sentence));
  }

  if (auto label = j.find("label"); label != j.end() && !label->is_null()) {
    if (!label->is_string()) throw SchemaError(line, "field \"label\" must be a string");
    auto parsed = parse_category(label->get<std::string>());
    if (!parsed) throw SchemaError(line, "unknown label \"" + label->get<std::string>() + "\"");
    doc.label = *parsed;
  }
  if (auto ev = j.find("evidence_indices"); ev != j.end() && !ev->is_null()) {
    if (!ev->is_array()) throw SchemaError(line, "field \"evidence_indices\" must be an array");
    std::vector<std::size_t> indices;
    for (const auto& v : *ev) {
      if (!v.is_number_unsigned() || v.get<std::size_t>() >= doc.sentences.size()) {
        throw SchemaError(line, "evidence index out of range");
      }
      indices.push_back(v.get<std::size_t>());
    }
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    doc.evidence_indices = std::move(indices);
  }
  return doc;
}

}  // namespace

void write_corpus(std::ostream& out, const std::vector<Document>& corpus) {
  Json header{{"format", kCorpusFormat}, {"version", kCorpusVersion}};
  out << header.dump() << '\n';
  for (const auto& doc : corpus) out << document_to_json(doc).dump() << '\n';
}

std::vector<Document> read_corpus(std::istream& in) {
  std::vector<Document> corpus;
  std::set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    Json j;
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!have_header) {
      if (!j.is_object() || j.value("format", "") != kCorpusFormat) {
        throw SchemaError(line, "missing corpus header record");
      }
      if (j.value("version", 0) != kCorpusVersion) {
        throw SchemaError(line, "unsupported corpus version");
      }
      have_header = true;
      continue;
    }
    Document doc = document_from_json(j, line);
    if (!seen.insert(doc.doc_id).second) {
      throw SchemaError(line, "duplicate doc_id \"" + doc.doc_id + "\"");
    }
    corpus.push_back(std::move(doc));
  }
  if (!have_header) throw SchemaError(line == 0 ? 1 : line, "missing corpus header record");
  return corpus;
}

void save_corpus(const std::filesystem::path& path,
                 const std::vector<Document>& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_corpus(out, corpus);
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_corpus(in);
}

}  // namespace sentsel
