#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sentsel/text.hpp"

namespace sentsel {

// EICAT impact categories, in order of increasing severity with Data
// Deficient last. The enum order is also the order of classifier logits.
enum class ImpactCategory : std::uint8_t {
  kMinimalConcern = 0,
  kMinor = 1,
  kModerate = 2,
  kMajor = 3,
  kMassive = 4,
  kDataDeficient = 5,
};

inline constexpr std::size_t kCategoryCount = 6;

inline constexpr std::array<ImpactCategory, kCategoryCount> kAllCategories = {
    ImpactCategory::kMinimalConcern, ImpactCategory::kMinor,
    ImpactCategory::kModerate,       ImpactCategory::kMajor,
    ImpactCategory::kMassive,        ImpactCategory::kDataDeficient,
};

// Canonical answer-label form: "Minimal", "Minor", ..., "Data Deficient".
std::string_view to_string(ImpactCategory category);

// Case-insensitive, whitespace-tolerant. Accepts the answer labels as well as
// the assessment-table names ("Minimal Concern", "Major Risk").
std::optional<ImpactCategory> parse_category(std::string_view text);

// Throws UnknownCategory.
ImpactCategory parse_category_or_throw(std::string_view text);

inline std::size_t index_of(ImpactCategory c) {
  return static_cast<std::size_t>(c);
}

struct Document {
  std::string doc_id;
  std::string species;
  std::string title;
  std::vector<Sentence> sentences;
  std::optional<ImpactCategory> label;
  // Sorted, unique.
  std::optional<std::vector<std::size_t>> evidence_indices;

  bool operator==(const Document&) const = default;

  std::string full_text() const { return join_sentences(sentences); }
};

// Builds a document by segmenting `raw_text`.
Document make_document(std::string doc_id, std::string species,
                       std::string title, std::string_view raw_text,
                       std::optional<ImpactCategory> label = std::nullopt);

// Returns a copy of `doc` with sentence `idx` removed and the remaining
// sentences re-indexed. Evidence indices are shifted accordingly.
Document remove_sentence(const Document& doc, std::size_t idx);

// Returns a document holding only `indices` (ascending), re-indexed. Evidence
// indices follow their sentences.
Document subset_document(const Document& doc,
                         const std::vector<std::size_t>& indices);

// ---------------------------------------------------------------------------
// Assessment ingestion

struct AssessmentRecord {
  std::string species;
  std::string publication;
  ImpactCategory category = ImpactCategory::kDataDeficient;
  std::vector<std::string> evidence;

  bool operator==(const AssessmentRecord&) const = default;
};

struct CsvOptions {
  char delimiter = ',';
  // Separates multiple evidence sentences inside one evidence cell.
  std::string evidence_delimiter = "|";
};

// RFC-4180 CSV: header row, quoted fields may contain delimiters, doubled
// quotes and line breaks.
std::vector<std::vector<std::string>> parse_csv(std::string_view text,
                                                char delimiter = ',');

// Columns species, publication, category, evidence (by header name; extra
// columns ignored). Throws MissingField / UnknownCategory naming the row.
std::vector<AssessmentRecord> ingest_assessments(std::string_view csv_text,
                                                 const CsvOptions& options = {});

// ---------------------------------------------------------------------------
// Species-disjoint splits

enum class SplitName : std::uint8_t { kTrain, kVal, kTest };

std::string_view to_string(SplitName split);
std::optional<SplitName> parse_split_name(std::string_view text);

struct CorpusSplit {
  std::map<std::string, SplitName> assignment;

  bool operator==(const CorpusSplit&) const = default;

  SplitName of(const std::string& species) const;
};

struct SplitRatios {
  double train = 0.82;
  double val = 0.08;
  double test = 0.10;
};

// Species are sorted, shuffled with a seeded RNG, then cut so that the val and
// test counts are round(ratio * S); the remainder goes to train.
CorpusSplit build_splits(const std::vector<Document>& corpus,
                         const SplitRatios& ratios, std::uint64_t seed);

std::vector<Document> filter_split(const std::vector<Document>& corpus,
                                   const CorpusSplit& split, SplitName which);

void write_split(std::ostream& out, const CorpusSplit& split);
CorpusSplit read_split(std::istream& in);

// ---------------------------------------------------------------------------
// Persistence (JSON lines with a header record)

inline constexpr std::string_view kCorpusFormat = "sentsel-corpus";
inline constexpr int kCorpusVersion = 1;

void write_corpus(std::ostream& out, const std::vector<Document>& corpus);
std::vector<Document> read_corpus(std::istream& in);

void save_corpus(const std::filesystem::path& path,
                 const std::vector<Document>& corpus);
std::vector<Document> load_corpus(const std::filesystem::path& path);

}  // namespace sentsel
