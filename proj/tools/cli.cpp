#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sentsel/alignment.hpp"
#include "sentsel/benchmark.hpp"
#include "sentsel/corpus.hpp"
#include "sentsel/error.hpp"
#include "sentsel/evaluation.hpp"
#include "sentsel/http.hpp"
#include "sentsel/inference.hpp"
#include "sentsel/io.hpp"
#include "sentsel/parallel.hpp"
#include "sentsel/reference_classifier.hpp"
#include "sentsel/scoring.hpp"
#include "sentsel/selection.hpp"
#include "sentsel/synthetic.hpp"
#include "sentsel/text.hpp"

namespace sentsel::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message)
      : Error(ErrorKind::kUsage, "UsageError", message) {}
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

// Renders into memory first so a failing command leaves no partial artifact.
void write_output(const std::string& path, const std::function<void(std::ostream&)>& render) {
  std::ostringstream buffer;
  render(buffer);
  fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << buffer.str();
  if (!out) throw IoError("failed writing " + path);
}

std::vector<Document> load_documents(const std::string& corpus_path, const std::string& split_path,
                                     const std::string& split_name) {
  auto corpus = load_corpus(corpus_path);
  if (split_path.empty()) return corpus;
  auto in = open_input(split_path);
  CorpusSplit split = read_split(in);
  auto which = parse_split_name(split_name);
  if (!which) throw UsageError("unknown split name \"" + split_name + "\"");
  return filter_split(corpus, split, *which);
}

// Splits "name=path".
std::pair<std::string, std::string> named_path(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw UsageError("expected NAME=PATH, got \"" + spec + "\"");
  }
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

// Document ids for assessment rows, in row order: the publication name, with
// "#2", "#3", ... appended to repeats.
std::vector<std::string> assessment_doc_ids(const std::vector<AssessmentRecord>& records) {
  std::map<std::string, std::size_t> seen;
  std::vector<std::string> ids;
  for (const auto& r : records) {
    std::size_t n = ++seen[r.publication];
    ids.push_back(n == 1 ? r.publication : r.publication + "#" + std::to_string(n));
  }
  return ids;
}

std::vector<AssessmentRecord> read_assessments(const std::string& path, const std::string& delimiter,
                                               const std::string& evidence_delimiter) {
  if (delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
  CsvOptions options;
  options.delimiter = delimiter[0];
  options.evidence_delimiter = evidence_delimiter;
  return ingest_assessments(io::read_text_file(path), options);
}

// ---------------------------------------------------------------------------
// Backends

struct BackendOptions {
  std::vector<std::string> models;
  std::vector<std::string> urls;
  int timeout_ms = 30000;
  int retries = 2;
  std::size_t max_tokens = kDefaultMaxTokens;
  std::size_t batch_size = 16;
  std::size_t class_count = kCategoryCount;
};

void add_backend_options(CLI::App* sub, BackendOptions& o, const std::string& prefix,
                         const std::string& env) {
  sub->add_option("--" + prefix + "model", o.models, "Reference classifier weights (repeatable)");
  sub->add_option("--" + prefix + "url", o.urls, "Remote scorer endpoint (repeatable)")
      ->envname(env);
  sub->add_option("--" + prefix + "timeout-ms", o.timeout_ms, "Remote request timeout")
      ->capture_default_str();
  sub->add_option("--" + prefix + "retries", o.retries, "Remote retries")->capture_default_str();
  sub->add_option("--" + prefix + "max-tokens", o.max_tokens, "Remote backend token limit")
      ->capture_default_str();
  sub->add_option("--" + prefix + "batch-size", o.batch_size, "Remote backend batch size")
      ->capture_default_str();
}

std::vector<std::unique_ptr<ScorerBackend>> make_backends(const BackendOptions& o) {
  std::vector<std::unique_ptr<ScorerBackend>> backends;
  for (const auto& path : o.models) {
    backends.push_back(std::make_unique<ReferenceClassifier>(ReferenceClassifier::load(path)));
  }
  for (const auto& url : o.urls) {
    HttpEndpoint endpoint{url, std::chrono::milliseconds(o.timeout_ms), o.retries};
    backends.push_back(std::make_unique<HttpScorerBackend>(
        endpoint, BackendCapabilities{o.max_tokens, o.batch_size, o.class_count}));
  }
  return backends;
}

std::vector<const ScorerBackend*> pointers(const std::vector<std::unique_ptr<ScorerBackend>>& owned) {
  std::vector<const ScorerBackend*> out;
  for (const auto& b : owned) out.push_back(b.get());
  return out;
}

struct ClientOptions {
  std::string url;
  bool echo = false;
  int timeout_ms = 120000;
  int retries = 2;
};

void add_client_options(CLI::App* sub, ClientOptions& o) {
  sub->add_option("--client-url", o.url, "Remote generation endpoint")->envname("SENTSEL_CLIENT_URL");
  sub->add_flag("--echo-client", o.echo, "Use the offline keyword-echo generation client");
  sub->add_option("--client-timeout-ms", o.timeout_ms, "Generation request timeout")
      ->capture_default_str();
  sub->add_option("--client-retries", o.retries, "Generation retries")->capture_default_str();
}

std::unique_ptr<GenerationClient> make_client(const ClientOptions& o) {
  if (o.echo && !o.url.empty()) throw UsageError("--echo-client and --client-url are exclusive");
  if (o.echo) return std::make_unique<KeywordEchoClient>();
  if (!o.url.empty()) {
    return std::make_unique<HttpGenerationClient>(
        HttpEndpoint{o.url, std::chrono::milliseconds(o.timeout_ms), o.retries});
  }
  return nullptr;
}

const std::map<std::string, Weighting> kWeightings = {{"linear", Weighting::kLinearRank},
                                                      {"inverse", Weighting::kInverseRank}};

// ---------------------------------------------------------------------------
// Commands. Each registers its options and returns the action to run.

using Action = std::function<void()>;

struct Globals {
  std::size_t workers = 1;
};

Action add_synth(CLI::App& app, Globals&, std::ostream& out) {
  auto* sub = app.add_subcommand("synth", "Generate a synthetic corpus, assessment table and texts");
  struct Opts {
    std::string out_dir;
    SyntheticConfig cfg;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--out-dir", o->out_dir, "Output directory")->required();
  sub->add_option("--documents", o->cfg.documents, "Document count")->capture_default_str();
  sub->add_option("--per-species", o->cfg.documents_per_species, "Documents per species")
      ->capture_default_str();
  sub->add_option("--signal", o->cfg.signal_sentences, "Signal sentences per document")
      ->capture_default_str();
  sub->add_option("--distractors", o->cfg.distractor_sentences, "Filler sentences per document")
      ->capture_default_str();
  sub->add_option("--min-other", o->cfg.min_other_species,
                  "Minimum other-species statements per document")
      ->capture_default_str();
  sub->add_option("--max-other", o->cfg.max_other_species,
                  "Maximum other-species statements per document")
      ->capture_default_str();
  sub->add_option("--seed", o->cfg.seed, "Seed")->capture_default_str();
  return [o, &out] {
    auto corpus = generate_synthetic_corpus(o->cfg);
    fs::path dir(o->out_dir);
    write_output((dir / "corpus.jsonl").string(), [&](std::ostream& f) { write_corpus(f, corpus); });
    write_output((dir / "assessments.csv").string(), [&](std::ostream& csv) {
      csv << "species,publication,category,evidence\n";
      for (const auto& doc : corpus) {
        std::string evidence;
        for (std::size_t i : doc.evidence_indices.value_or(std::vector<std::size_t>{})) {
          if (!evidence.empty()) evidence += "|";
          evidence += doc.sentences[i].text;
        }
        csv << csv_field(doc.species) << ',' << csv_field(doc.doc_id) << ','
            << csv_field(std::string(to_string(*doc.label))) << ',' << csv_field(evidence) << '\n';
      }
    });
    for (const auto& doc : corpus) {
      write_output((dir / "texts" / (doc.doc_id + ".txt")).string(),
                   [&](std::ostream& t) { t << doc.full_text() << '\n'; });
    }
    // Usefulness labels in the shape an LLM annotator would produce: signal
    // sentences are highly useful, other-species impact statements slightly.
    write_output((dir / "llm_labels.jsonl").string(), [&](std::ostream& labels) {
      for (const auto& doc : corpus) {
        Json j;
        j["doc_id"] = doc.doc_id;
        Json values = Json::array();
        const auto& ev = doc.evidence_indices.value_or(std::vector<std::size_t>{});
        for (const auto& s : doc.sentences) {
          bool impact = false;
          for (auto c : kAllCategories) {
            for (auto phrase : class_phrases(c)) impact = impact || s.text.find(phrase) != std::string::npos;
          }
          bool signal = std::binary_search(ev.begin(), ev.end(), s.index);
          values.push_back(signal ? "Highly Useful" : impact ? "Slightly Useful" : "Not Useful");
        }
        j["labels"] = std::move(values);
        labels << j.dump() << '\n';
      }
    });
    out << "wrote " << corpus.size() << " documents to " << o->out_dir << '\n';
  };
}

Action add_ingest(CLI::App& app, Globals&, std::ostream&) {
  auto* sub = app.add_subcommand("ingest", "Build a corpus from an assessment table and texts");
  struct Opts {
    std::string assessments, texts, output, delimiter = ",", evidence_delimiter = "|";
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--assessments", o->assessments, "Assessment CSV")->required();
  sub->add_option("--texts", o->texts, "Directory of extracted texts named by publication")
      ->required();
  sub->add_option("--output", o->output, "Corpus JSONL")->required();
  sub->add_option("--delimiter", o->delimiter, "CSV delimiter")->capture_default_str();
  sub->add_option("--evidence-delimiter", o->evidence_delimiter, "Evidence cell separator")
      ->capture_default_str();
  return [o] {
    auto records = read_assessments(o->assessments, o->delimiter, o->evidence_delimiter);
    auto ids = assessment_doc_ids(records);
    std::vector<Document> corpus;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      fs::path path = fs::path(o->texts) / r.publication;
      if (!fs::is_regular_file(path)) path += ".txt";
      if (!fs::is_regular_file(path)) {
        throw IoError("row " + std::to_string(i + 1) + ": no text file for publication \"" +
                      r.publication + "\"");
      }
      try {
        corpus.push_back(make_document(ids[i], r.species, r.publication,
                                       io::read_text_file(path), r.category));
      } catch (const EmptyInput&) {
        throw EmptyInput("text for publication \"" + r.publication + "\" is empty");
      }
    }
    write_output(o->output, [&](std::ostream& f) { write_corpus(f, corpus); });
  };
}

Action add_align(CLI::App& app, Globals& g, std::ostream&) {
  auto* sub = app.add_subcommand("align", "Match assessment evidence to corpus sentences");
  struct Opts {
    std::string corpus, assessments, output, report, delimiter = ",", evidence_delimiter = "|";
    double t_match = 0.80, t_borderline = 0.65;
    std::string adjudicator = "reject";
    ClientOptions client;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--corpus", o->corpus, "Corpus JSONL")->required();
  sub->add_option("--assessments", o->assessments, "Assessment CSV")->required();
  sub->add_option("--output", o->output, "Corpus JSONL with evidence indices")->required();
  sub->add_option("--report", o->report, "Alignment report JSONL")->required();
  sub->add_option("--delimiter", o->delimiter, "CSV delimiter")->capture_default_str();
  sub->add_option("--evidence-delimiter", o->evidence_delimiter, "Evidence cell separator")
      ->capture_default_str();
  sub->add_option("--t-match", o->t_match, "Match threshold")->capture_default_str();
  sub->add_option("--t-borderline", o->t_borderline, "Borderline threshold")->capture_default_str();
  sub->add_option("--adjudicator", o->adjudicator, "Borderline adjudicator")
      ->check(CLI::IsMember({"reject", "llm"}))
      ->capture_default_str();
  add_client_options(sub, o->client);
  return [o, &g] {
    auto corpus = load_corpus(o->corpus);
    auto records = read_assessments(o->assessments, o->delimiter, o->evidence_delimiter);
    auto ids = assessment_doc_ids(records);
    std::map<std::string, const AssessmentRecord*> by_id;
    for (std::size_t i = 0; i < records.size(); ++i) by_id[ids[i]] = &records[i];

    auto client = make_client(o->client);
    AlignmentConfig cfg;
    cfg.t_match = o->t_match;
    cfg.t_borderline = o->t_borderline;
    if (o->adjudicator == "llm") {
      if (!client) throw UsageError("--adjudicator llm needs --client-url or --echo-client");
      cfg.adjudicator = make_llm_adjudicator(*client);
    }

    std::vector<std::vector<MatchResult>> results(corpus.size());
    parallel_for(corpus.size(), g.workers, [&](std::size_t i) {
      auto it = by_id.find(corpus[i].doc_id);
      if (it == by_id.end()) return;
      results[i] = align_evidence(corpus[i], it->second->evidence, cfg);
    });

    std::vector<MatchResult> all;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (by_id.count(corpus[i].doc_id) == 0) continue;
      corpus[i].evidence_indices = matched_sentence_indices(results[i]);
      all.insert(all.end(), results[i].begin(), results[i].end());
    }
    write_output(o->report, [&](std::ostream& out) {
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (by_id.count(corpus[i].doc_id) != 0) {
          write_alignment_records(out, corpus[i].doc_id, results[i]);
        }
      }
      write_alignment_summary(out, summarize(all));
    });
    write_output(o->output, [&](std::ostream& f) { write_corpus(f, corpus); });
  };
}

Action add_split(CLI::App& app, Globals&, std::ostream&) {
  auto* sub = app.add_subcommand("split", "Assign species to train/val/test");
  struct Opts {
    std::string corpus, output;
    std::vector<double> ratios{0.82, 0.08, 0.10};
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--corpus", o->corpus, "Corpus JSONL")->required();
  sub->add_option("--output", o->output, "Split JSON")->required();
  sub->add_option("--ratios", o->ratios, "train,val,test fractions")
      ->delimiter(',')
      ->expected(3)
      ->capture_default_str();
  sub->add_option("--seed", o->seed, "Seed")->capture_default_str();
  return [o] {
    auto corpus = load_corpus(o->corpus);
    auto split = build_splits(corpus, {o->ratios[0], o->ratios[1], o->ratios[2]}, o->seed);
    write_output(o->output, [&](std::ostream& out) { write_split(out, split); });
  };
}

Action add_score(CLI::App& app, Globals& g, std::ostream&) {
  auto* sub = app.add_subcommand("score", "Compute entropy or importance sentence scores");
  struct Opts {
    std::string corpus, output, signal, norm = "l1", entropy_mode = "distributions";
    std::size_t overlap = kDefaultOverlap;
    std::size_t ensemble = 0;
    BackendOptions backends;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--corpus", o->corpus, "Corpus JSONL")->required();
  sub->add_option("--output", o->output, "Score JSONL")->required();
  sub->add_option("--signal", o->signal, "Signal")
      ->check(CLI::IsMember({"entropy", "importance"}))
      ->required();
  sub->add_option("--norm", o->norm, "Importance logit distance")
      ->check(CLI::IsMember({"l1", "linf"}))
      ->capture_default_str();
  sub->add_option("--entropy-mode", o->entropy_mode, "Ensemble entropy aggregation")
      ->check(CLI::IsMember({"distributions", "entropies"}))
      ->capture_default_str();
  sub->add_option("--overlap", o->overlap, "Chunk overlap")->capture_default_str();
  sub->add_option("--ensemble", o->ensemble,
                  "Expected number of backends (0 accepts any number)")
      ->capture_default_str();
  add_backend_options(sub, o->backends, "", "SENTSEL_BACKEND_URL");
  return [o, &g] {
    auto corpus = load_corpus(o->corpus);
    auto owned = make_backends(o->backends);
    if (owned.empty()) throw UsageError("score needs at least one --model or --url backend");
    if (o->ensemble != 0 && owned.size() != o->ensemble) {
      throw UsageError("--ensemble " + std::to_string(o->ensemble) + " but " +
                       std::to_string(owned.size()) + " backends given");
    }
    auto list = pointers(owned);
    std::vector<std::vector<double>> values(corpus.size());
    const auto mode = o->entropy_mode == "distributions" ? EntropyMode::kAverageDistributions
                                                         : EntropyMode::kAverageEntropies;
    const auto norm = o->norm == "l1" ? ImportanceNorm::kL1 : ImportanceNorm::kLInf;
    parallel_for(corpus.size(), g.workers, [&](std::size_t i) {
      values[i] = o->signal == "entropy"
                      ? entropy_scores(corpus[i], list, mode)
                      : importance_scores(corpus[i], list, norm, o->overlap, 1);
    });
    std::map<std::string, std::vector<double>> scores;
    for (std::size_t i = 0; i < corpus.size(); ++i) scores[corpus[i].doc_id] = values[i];
    write_output(o->output, [&](std::ostream& out) { io::write_scores(out, o->signal, scores); });
  };
}

Action add_derive(CLI::App& app, Globals&, std::ostream&) {
  auto* sub = app.add_subcommand("derive", "Build selector training examples from a signal");
  struct Opts {
    std::string corpus, output, source, signals, split, split_name = "train";
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--corpus", o->corpus, "Corpus JSONL")->required();
  sub->add_option("--output", o->output, "Selector example JSONL")->required();
  sub->add_option("--source", o->source, "Signal source")
      ->check(CLI::IsMember({"evidence", "llm", "entropy", "importance"}))
      ->required();
  sub->add_option("--signals", o->signals, "LLM label JSONL or score JSONL");
  sub->add_option("--split", o->split, "Split JSON restricting the documents");
  sub->add_option("--split-name", o->split_name, "Split to keep")->capture_default_str();
  return [o] {
    auto corpus = load_documents(o->corpus, o->split, o->split_name);
    auto source = *parse_signal_source(o->source);
    SignalInputs inputs;
    if (source != SignalSource::kEvidence) {
      if (o->signals.empty()) throw UsageError("--source " + o->source + " needs --signals");
      auto in = open_input(o->signals);
      if (source == SignalSource::kLlm) {
        inputs.llm_labels = io::read_llm_labels(in);
      } else {
        inputs.scores = io::read_scores(in);
      }
    }
    auto examples = derive_training_data(corpus, source, inputs);
    write_output(o->output, [&](std::ostream& out) { io::write_examples(out, examples); });
  };
}

Action add_train_ref(CLI::App& app, Globals&, std::ostream&) {
  auto* sub = app.add_subcommand("train-ref", "Train the reference classifier");
  struct Opts {
    std::string corpus, output, split, split_name = "train", examples, rankings;
    std::size_t k = 15;
    std::uint64_t seed = 0;
    ReferenceHyperparameters hp;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--corpus", o->corpus, "Corpus JSONL (document classifier)");
  sub->add_option("--examples", o->examples, "Selector example JSONL (sentence selector)");
  sub->add_option("--output", o->output, "Weights file")->required();
  sub->add_option("--split", o->split, "Split JSON restricting the documents");
  sub->add_option("--split-name", o->split_name, "Split to train on")->capture_default_str();
  sub->add_option("--rankings", o->rankings, "Train on the top-k sentences of these rankings");
  sub->add_option("--k", o->k, "Sentences kept with --rankings")->capture_default_str();
  sub->add_option("--seed", o->seed, "Seed")->capture_default_str();
  sub->add_option("--epochs", o->hp.epochs, "Epochs")->capture_default_str();
  sub->add_option("--learning-rate", o->hp.learning_rate, "Learning rate")->capture_default_str();
  sub->add_option("--batch-size", o->hp.batch_size, "Mini-batch size")->capture_default_str();
  sub->add_option("--l2", o->hp.l2, "L2 penalty")->capture_default_str();
  sub->add_option("--max-tokens", o->hp.max_tokens, "Chunk size")->capture_default_str();
  sub->add_option("--overlap", o->hp.overlap, "Chunk overlap")->capture_default_str();
  sub->add_flag("--balance-classes", o->hp.balance_classes, "Weight by inverse class frequency");
  return [o] {
    if (o->examples.empty() == o->corpus.empty()) {
      throw UsageError("train-ref needs exactly one of --corpus or --examples");
    }
    if (!o->examples.empty()) {
      auto in = open_input(o->examples);
      auto examples = io::read_examples(in);
      if (examples.empty()) throw NoLabeledData("no selector examples in " + o->examples);
      std::vector<LabeledText> texts;
      for (const auto& ex : examples) {
        if (ex.source != examples.front().source) {
          throw SchemaError(0, "selector examples mix signal sources");
        }
        texts.push_back({ex.input_text, ex.label});
      }
      train_reference_classifier(texts, class_count(examples.front().source), o->hp, o->seed)
          .save(o->output);
      return;
    }
    auto docs = load_documents(o->corpus, o->split, o->split_name);
    if (!o->rankings.empty()) {
      if (o->k < 1) throw UsageError("--k must be at least 1");
      auto in = open_input(o->rankings);
      auto rankings = io::read_rankings(in);
      for (auto& doc : docs) {
        auto it = rankings.find(doc.doc_id);
        if (it == rankings.end()) throw DocIdMismatch("no ranking for " + doc.doc_id);
        doc = subset_document(doc, select_top_k(it->second, o->k));
      }
    }
    train_reference_classifier(docs, o->hp, o->seed).save(o->output);
  };
}

Action add_rank(CLI::App& app, Globals& g, std::ostream&) {
  auto* sub = app.add_subcommand("rank", "Rank each document's sentences");
  struct Opts {
    std::string corpus, output, split, split_name = "test";
    bool random = false, evidence = false;
    std::uint64_t seed = 0;
    std::size_t selector_classes = 3;
    BackendOptions selector;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--corpus", o->corpus, "Corpus JSONL")->required();
  sub->add_option("--output", o->output, "Ranking JSONL")->required();
  sub->add_option("--split", o->split, "Split JSON restricting the documents");
  sub->add_option("--split-name", o->split_name, "Split to rank")->capture_default_str();
  sub->add_flag("--random", o->random, "Uniformly random scores");
  sub->add_flag("--evidence", o->evidence, "Scores from gold evidence membership");
  sub->add_option("--seed", o->seed, "Seed for --random")->capture_default_str();
  sub->add_option("--selector-classes", o->selector_classes, "Classes of a remote selector")
      ->check(CLI::IsMember({2, 3}))
      ->capture_default_str();
  add_backend_options(sub, o->selector, "selector-", "SENTSEL_SELECTOR_URL");
  return [o, &g] {
    auto corpus = load_documents(o->corpus, o->split, o->split_name);
    BackendOptions opts = o->selector;
    opts.class_count = o->selector_classes;
    auto owned = make_backends(opts);
    if (static_cast<int>(o->random) + static_cast<int>(o->evidence) +
            static_cast<int>(!owned.empty()) != 1 ||
        owned.size() > 1) {
      throw UsageError(
          "rank needs exactly one of --random, --evidence, --selector-model, --selector-url");
    }
    std::vector<SentenceRanking> rankings(corpus.size());
    parallel_for(corpus.size(), g.workers, [&](std::size_t i) {
      if (o->random) {
        rankings[i] = random_ranking(corpus[i], o->seed);
      } else if (o->evidence) {
        rankings[i] = evidence_ranking(corpus[i]);
      } else {
        rankings[i] = rank_sentences(corpus[i], *owned.front());
      }
    });
    write_output(o->output, [&](std::ostream& out) { io::write_rankings(out, rankings); });
  };
}

Action add_classify(CLI::App& app, Globals& g, std::ostream&) {
  auto* sub = app.add_subcommand("classify", "Predict impact categories");
  struct Opts {
    std::string corpus, output, split, split_name = "test", rankings, mode, aggregation = "vote";
    std::string weighting = "linear";
    SelectionConfig selection;
    std::size_t overlap = kDefaultOverlap;
    int max_new_tokens = kDefaultMaxNewTokens;
    bool no_summary = false;
    BackendOptions backend;
    ClientOptions client;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--corpus", o->corpus, "Corpus JSONL")->required();
  sub->add_option("--output", o->output, "Prediction JSONL")->required();
  sub->add_option("--split", o->split, "Split JSON restricting the documents");
  sub->add_option("--split-name", o->split_name, "Split to classify")->capture_default_str();
  sub->add_option("--rankings", o->rankings, "Ranking JSONL");
  sub->add_option("--mode", o->mode,
                  "full, deterministic or randomized (default: deterministic with --rankings)")
      ->check(CLI::IsMember({"full", "deterministic", "randomized"}));
  sub->add_option("--k", o->selection.k, "Sentences per input")->capture_default_str();
  sub->add_option("--pool", o->selection.pool, "Sampling pool")->capture_default_str();
  sub->add_option("--samples", o->selection.num_samples, "Sampled inputs per document")
      ->capture_default_str();
  sub->add_option("--seed", o->selection.seed, "Sampling seed")->capture_default_str();
  sub->add_option("--weighting", o->weighting, "Rank weighting")
      ->check(CLI::IsMember({"linear", "inverse"}))
      ->capture_default_str();
  sub->add_option("--aggregation", o->aggregation, "Classifier sample aggregation")
      ->check(CLI::IsMember({"vote", "mean-logits"}))
      ->capture_default_str();
  sub->add_option("--overlap", o->overlap, "Chunk overlap")->capture_default_str();
  sub->add_option("--max-new-tokens", o->max_new_tokens, "Generation limit")
      ->capture_default_str();
  sub->add_flag("--no-summary", o->no_summary, "Omit the summary request from the prompt");
  add_backend_options(sub, o->backend, "", "SENTSEL_BACKEND_URL");
  add_client_options(sub, o->client);
  return [o, &g] {
    auto corpus = load_documents(o->corpus, o->split, o->split_name);
    auto owned = make_backends(o->backend);
    auto client = make_client(o->client);
    if (owned.size() + (client ? 1 : 0) != 1) {
      throw UsageError("classify needs exactly one of --model, --url, --client-url, --echo-client");
    }

    std::string mode = o->mode.empty() ? (o->rankings.empty() ? "full" : "deterministic") : o->mode;
    PredictionConfig cfg;
    cfg.overlap = o->overlap;
    cfg.max_new_tokens = o->max_new_tokens;
    cfg.include_summary = !o->no_summary;
    cfg.aggregation =
        o->aggregation == "vote" ? SampleAggregation::kVote : SampleAggregation::kMeanLogits;
    RankingSet rankings;
    if (mode != "full") {
      SelectionConfig sel = o->selection;
      sel.mode = mode == "randomized" ? SelectionMode::kRandomized : SelectionMode::kDeterministic;
      sel.weighting = kWeightings.at(o->weighting);
      sel.validate();
      cfg.selection = sel;
      if (o->rankings.empty()) throw UsageError("--mode " + mode + " needs --rankings");
      auto in = open_input(o->rankings);
      rankings = io::read_rankings(in);
      for (const auto& doc : corpus) {
        if (rankings.count(doc.doc_id) == 0) throw DocIdMismatch("no ranking for " + doc.doc_id);
      }
    }

    std::vector<Prediction> predictions(corpus.size());
    parallel_for(corpus.size(), g.workers, [&](std::size_t i) {
      const SentenceRanking* ranking =
          cfg.selection ? &rankings.at(corpus[i].doc_id) : nullptr;
      predictions[i] = client ? predict_with_llm(corpus[i], ranking, cfg, *client)
                              : predict_with_classifier(corpus[i], ranking, cfg, *owned.front());
    });
    write_output(o->output, [&](std::ostream& out) { io::write_predictions(out, predictions); });
  };
}

Action add_eval(CLI::App& app, Globals&, std::ostream&) {
  auto* sub = app.add_subcommand("eval", "Score predictions against corpus labels");
  struct Opts {
    std::string predictions, corpus, output, averaging = "present";
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--predictions", o->predictions, "Prediction JSONL")->required();
  sub->add_option("--corpus", o->corpus, "Corpus JSONL with gold labels")->required();
  sub->add_option("--output", o->output, "Report JSON")->required();
  sub->add_option("--averaging", o->averaging, "Macro-F1 classes")
      ->check(CLI::IsMember({"present", "all"}))
      ->capture_default_str();
  return [o] {
    auto corpus = load_corpus(o->corpus);
    std::map<std::string, const Document*> by_id;
    for (const auto& doc : corpus) by_id[doc.doc_id] = &doc;
    auto in = open_input(o->predictions);
    auto predictions = io::read_predictions(in);
    std::vector<ImpactCategory> preds, golds;
    std::set<std::string> seen;
    for (const auto& p : predictions) {
      auto it = by_id.find(p.doc_id);
      if (it == by_id.end()) throw DocIdMismatch("prediction for unknown document " + p.doc_id);
      if (!seen.insert(p.doc_id).second) throw DocIdMismatch("duplicate prediction for " + p.doc_id);
      if (!it->second->label) throw MissingField("document " + p.doc_id + " has no gold label");
      preds.push_back(p.category);
      golds.push_back(*it->second->label);
    }
    auto report = compute_f1(preds, golds,
                             o->averaging == "present" ? MacroAveraging::kPresentClasses
                                                       : MacroAveraging::kAllClasses);
    write_output(o->output, [&](std::ostream& out) { out << io::to_json(report).dump(2) << '\n'; });
  };
}

Action add_agree(CLI::App& app, Globals&, std::ostream&) {
  auto* sub = app.add_subcommand("agree", "NDCG agreement between rankings and ground truths");
  struct Opts {
    std::vector<std::string> selectors, evidence_truths, llm_truths;
    std::string output, csv, gain = "linear", split, split_name = "test";
    std::size_t k = 0;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--selector", o->selectors, "NAME=RANKINGS (repeatable)")->required();
  sub->add_option("--evidence-truth", o->evidence_truths, "NAME=CORPUS with evidence (repeatable)");
  sub->add_option("--llm-truth", o->llm_truths, "NAME=LLM_LABELS (repeatable)");
  sub->add_option("--output", o->output, "Matrix JSON")->required();
  sub->add_option("--csv", o->csv, "Matrix CSV");
  sub->add_option("--split", o->split, "Split JSON; all inputs are restricted to its documents");
  sub->add_option("--split-name", o->split_name, "Split to keep")->capture_default_str();
  sub->add_option("--k", o->k, "NDCG cutoff (0 = full list)")->capture_default_str();
  sub->add_option("--gain", o->gain, "Gain scheme")
      ->check(CLI::IsMember({"linear", "exponential"}))
      ->capture_default_str();
  return [o] {
    std::vector<std::pair<std::string, RankingSet>> rankings;
    for (const auto& spec : o->selectors) {
      auto [name, path] = named_path(spec);
      auto in = open_input(path);
      rankings.emplace_back(name, io::read_rankings(in));
    }
    std::vector<std::pair<std::string, GainSet>> truths;
    for (const auto& spec : o->evidence_truths) {
      auto [name, path] = named_path(spec);
      truths.emplace_back(name, evidence_gains(load_documents(path, o->split, o->split_name)));
    }
    for (const auto& spec : o->llm_truths) {
      auto [name, path] = named_path(spec);
      auto in = open_input(path);
      truths.emplace_back(name, io::llm_label_gains(io::read_llm_labels(in)));
    }
    if (truths.empty()) throw UsageError("agree needs at least one --evidence-truth or --llm-truth");
    if (!o->split.empty()) {
      if (o->evidence_truths.empty()) throw UsageError("--split needs an --evidence-truth corpus");
      const GainSet& keep = truths.front().second;
      auto restrict = [&](auto& set) {
        std::erase_if(set, [&](const auto& entry) { return keep.count(entry.first) == 0; });
      };
      for (auto& [_, set] : rankings) restrict(set);
      for (auto& [_, set] : truths) restrict(set);
    }
    auto matrix = agreement_matrix(
        rankings, truths, o->k == 0 ? std::nullopt : std::optional<std::size_t>(o->k),
        o->gain == "linear" ? GainScheme::kLinear : GainScheme::kExponential);
    write_output(o->output, [&](std::ostream& out) { out << io::to_json(matrix).dump(2) << '\n'; });
    if (!o->csv.empty()) {
      write_output(o->csv, [&](std::ostream& out) { io::write_agreement_csv(out, matrix); });
    }
  };
}

Action add_bench(CLI::App& app, Globals& g, std::ostream&) {
  auto* sub = app.add_subcommand("bench", "Time full-text against top-k inputs");
  struct Opts {
    std::string corpus, output, split, split_name = "test", rankings;
    std::size_t k = 15, repetitions = 3, overlap = kDefaultOverlap;
    bool exclude_timings = false;
    BackendOptions backend, selector;
    ClientOptions client;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--corpus", o->corpus, "Corpus JSONL")->required();
  sub->add_option("--output", o->output, "Report JSON")->required();
  sub->add_option("--split", o->split, "Split JSON restricting the documents");
  sub->add_option("--split-name", o->split_name, "Split to run")->capture_default_str();
  sub->add_option("--rankings", o->rankings, "Precomputed rankings for the selected path");
  sub->add_option("--k", o->k, "Sentences kept")->capture_default_str();
  sub->add_option("--repetitions", o->repetitions, "Repetitions")->capture_default_str();
  sub->add_option("--overlap", o->overlap, "Chunk overlap")->capture_default_str();
  sub->add_flag("--exclude-timings", o->exclude_timings,
                "Omit wall-clock fields so the report is reproducible");
  add_backend_options(sub, o->backend, "", "SENTSEL_BACKEND_URL");
  add_backend_options(sub, o->selector, "selector-", "SENTSEL_SELECTOR_URL");
  add_client_options(sub, o->client);
  return [o, &g] {
    auto corpus = load_documents(o->corpus, o->split, o->split_name);
    auto owned = make_backends(o->backend);
    auto client = make_client(o->client);
    if (owned.size() + (client ? 1 : 0) != 1) {
      throw UsageError("bench needs exactly one of --model, --url, --client-url, --echo-client");
    }
    BackendOptions selector_opts = o->selector;
    selector_opts.class_count = 3;
    auto selectors = make_backends(selector_opts);
    if (selectors.size() > 1 || (selectors.empty() == o->rankings.empty())) {
      throw UsageError("bench needs exactly one of --rankings, --selector-model, --selector-url");
    }
    if (o->k < 1) throw UsageError("--k must be at least 1");
    RankingSet rankings;
    if (!o->rankings.empty()) {
      auto in = open_input(o->rankings);
      rankings = io::read_rankings(in);
      for (const auto& doc : corpus) {
        if (rankings.count(doc.doc_id) == 0) throw DocIdMismatch("no ranking for " + doc.doc_id);
      }
    }
    std::vector<BenchmarkVariant> variants(2);
    variants[0].name = "full";
    variants[1].name = "top-" + std::to_string(o->k);
    variants[1].k = o->k;
    variants[1].selector = selectors.empty() ? nullptr : selectors.front().get();
    variants[1].rankings = selectors.empty() ? &rankings : nullptr;
    for (auto& v : variants) {
      v.classifier = owned.empty() ? nullptr : owned.front().get();
      v.client = client.get();
      v.overlap = o->overlap;
    }
    auto reports = run_benchmark(corpus, variants, o->repetitions, g.workers);
    Json j = Json::array();
    for (const auto& r : reports) j.push_back(io::to_json(r, !o->exclude_timings));
    write_output(o->output, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  };
}

std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kData: return "data";
    case ErrorKind::kBackend: return "backend";
  }
  return "data";
}

int report(std::ostream& err, ErrorKind kind, const std::string& code, const std::string& message) {
  Json j;
  j["error"] = code;
  j["kind"] = std::string(kind_name(kind));
  j["exit_code"] = static_cast<int>(kind);
  j["message"] = message;
  err << j.dump() << '\n';
  return static_cast<int>(kind);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sentence selection pipeline for long-document impact classification", "sentsel"};
  app.set_config("--config", "", "TOML/INI config file; [command] sections hold command options");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();
  Globals globals;
  app.add_option("--workers", globals.workers, "Document-level worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::vector<std::pair<CLI::App*, Action>> commands;
  auto registrars = {add_synth,   add_ingest, add_align, add_split,
                     add_score,   add_derive, add_train_ref, add_rank,
                     add_classify, add_eval,  add_agree, add_bench};
  for (auto registrar : registrars) {
    Action action = registrar(app, globals, out);
    commands.emplace_back(app.get_subcommands({}).back(), std::move(action));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return report(err, ErrorKind::kUsage, "UsageError", e.what());
  }

  try {
    for (auto& [sub, action] : commands) {
      if (sub->parsed()) action();
    }
    return 0;
  } catch (const Error& e) {
    return report(err, e.kind(), e.code(), e.what());
  } catch (const nlohmann::json::exception& e) {
    return report(err, ErrorKind::kData, "SchemaError", e.what());
  } catch (const std::invalid_argument& e) {
    return report(err, ErrorKind::kUsage, "UsageError", e.what());
  } catch (const std::exception& e) {
    return report(err, ErrorKind::kData, "Error", e.what());
  }
}

}  // namespace sentsel::cli
