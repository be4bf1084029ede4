#include "genreforge/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "genreforge/corpus.h"
#include "genreforge/error.h"
#include "genreforge/evaluation.h"
#include "genreforge/hashing.h"
#include "genreforge/metaphor.h"
#include "genreforge/metre.h"
#include "genreforge/syntax.h"

namespace genreforge {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

bool PipelineConfig::needs(FeatureKind kind) const {
  for (const auto& s : kind_sets) {
    const auto k = s.kinds();
    if (std::find(k.begin(), k.end(), kind) != k.end()) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << data;
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

json parse_json_with_position(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::kParseError,
                what + ":" + std::to_string(line) + ":" + std::to_string(col) +
                    ": " + e.what());
  }
}

const std::set<std::string> kKnownKeys = {
    "corpus", "lexicon", "parses", "abbreviations", "metaphor_annotations",
    "metaphor_lexicon", "output", "encoder", "train", "tasks", "languages",
    "kind_sets", "seed", "target_per_genre", "pad_len", "model_id"};

class Reader {
 public:
  Reader(const json& root, std::vector<Diagnostic>& diags) : root_(root), diags_(diags) {}

  void add(std::string field, std::string message) {
    diags_.push_back({std::move(field), std::move(message)});
  }

  template <typename T>
  std::optional<T> get(const json& obj, const std::string& key,
                       const std::string& field, bool required = false) {
    if (!obj.contains(key)) {
      if (required) add(field, "required field is missing");
      return std::nullopt;
    }
    try {
      return obj.at(key).get<T>();
    } catch (const json::exception&) {
      add(field, "wrong type: " + obj.at(key).dump());
      return std::nullopt;
    }
  }

  const json& root() const { return root_; }

 private:
  const json& root_;
  std::vector<Diagnostic>& diags_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

void read_encoder(Reader& r, const json& root, EncoderConfig& enc) {
  if (!root.contains("encoder")) return;
  const json& e = root.at("encoder");
  if (!e.is_object()) {
    r.add("encoder", "must be an object");
    return;
  }
  if (e.contains("ngram_range")) {
    const auto range = r.get<std::vector<int>>(e, "ngram_range", "encoder.ngram_range");
    if (range && range->size() == 2) {
      enc.ngram_min = (*range)[0];
      enc.ngram_max = (*range)[1];
    } else if (range) {
      r.add("encoder.ngram_range", "expected [min, max]");
    }
  }
  if (auto v = r.get<int>(e, "ngram_min", "encoder.ngram_min")) enc.ngram_min = *v;
  if (auto v = r.get<int>(e, "ngram_max", "encoder.ngram_max")) enc.ngram_max = *v;
  if (auto v = r.get<std::size_t>(e, "dim", "encoder.dim")) enc.dim = *v;
  if (auto v = r.get<std::uint64_t>(e, "hash_seed", "encoder.hash_seed")) enc.hash_seed = *v;
  if (auto v = r.get<bool>(e, "normalize", "encoder.normalize")) enc.normalize = *v;
  if (enc.ngram_min < 1 || enc.ngram_min > enc.ngram_max || enc.ngram_max > 6) {
    r.add("encoder.ngram_range", "must satisfy 1 <= min <= max <= 6, got [" +
                                     std::to_string(enc.ngram_min) + ", " +
                                     std::to_string(enc.ngram_max) + "]");
    enc.ngram_min = 2;
    enc.ngram_max = 4;
  }
  if (enc.dim < 64 || (enc.dim & (enc.dim - 1)) != 0) {
    r.add("encoder.dim", "must be a power of two >= 64, got " + std::to_string(enc.dim));
    enc.dim = 4096;
  }
  for (const auto& [k, v] : e.items()) {
    static const std::set<std::string> known = {"ngram_range", "ngram_min", "ngram_max",
                                                "dim", "hash_seed", "normalize"};
    if (!known.count(k)) r.add("encoder." + k, "unknown key");
  }
}

void read_train(Reader& r, const json& root, TrainConfig& tc) {
  if (!root.contains("train")) return;
  const json& t = root.at("train");
  if (!t.is_object()) {
    r.add("train", "must be an object");
    return;
  }
  if (auto v = r.get<double>(t, "learning_rate", "train.learning_rate")) {
    if (*v > 0) tc.learning_rate = *v;
    else r.add("train.learning_rate", "must be > 0");
  }
  if (auto v = r.get<int>(t, "epochs", "train.epochs")) {
    if (*v >= 1) tc.epochs = *v;
    else r.add("train.epochs", "must be >= 1");
  }
  if (auto v = r.get<long long>(t, "batch_size", "train.batch_size")) {
    if (*v >= 1) tc.batch_size = static_cast<std::size_t>(*v);
    else r.add("train.batch_size", "must be >= 1");
  }
  if (auto v = r.get<double>(t, "l2", "train.l2")) {
    if (*v >= 0) tc.l2 = *v;
    else r.add("train.l2", "must be >= 0");
  }
  if (auto v = r.get<std::uint64_t>(t, "seed", "train.seed")) tc.seed = *v;
  if (auto v = r.get<long long>(t, "hidden_dim", "train.hidden_dim")) {
    if (*v >= 0) tc.hidden_dim = static_cast<std::size_t>(*v);
    else r.add("train.hidden_dim", "must be >= 0");
  }
  for (const auto& [k, v] : t.items()) {
    static const std::set<std::string> known = {"learning_rate", "epochs", "batch_size",
                                                "l2", "seed", "hidden_dim"};
    if (!known.count(k)) r.add("train." + k, "unknown key");
  }
}

}  // namespace

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir,
                            std::vector<Diagnostic>& diags) {
  const json root = parse_json_with_position(text, "config");
  PipelineConfig c;
  c.base_dir = fs::absolute(base_dir).lexically_normal();
  if (!root.is_object()) {
    diags.push_back({"(root)", "config must be a JSON object"});
    return c;
  }
  Reader r(root, diags);
  for (const auto& [k, v] : root.items())
    if (!kKnownKeys.count(k)) r.add(k, "unknown key");

  auto path_field = [&](const char* key, bool required, fs::path& out) {
    if (auto v = r.get<std::string>(root, key, key, required)) out = resolve(c.base_dir, *v);
  };
  path_field("corpus", true, c.corpus);
  path_field("lexicon", true, c.lexicon);
  path_field("parses", false, c.parses);
  path_field("abbreviations", false, c.abbreviations);
  path_field("metaphor_annotations", false, c.metaphor_annotations);
  path_field("metaphor_lexicon", false, c.metaphor_lexicon);
  path_field("output", true, c.output);

  read_encoder(r, root, c.encoder);
  read_train(r, root, c.train);

  if (auto v = r.get<std::vector<std::string>>(root, "tasks", "tasks", true)) {
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string field = "tasks[" + std::to_string(i) + "]";
      try {
        const Task t = Task::parse((*v)[i]);
        if (std::find(c.tasks.begin(), c.tasks.end(), t) != c.tasks.end())
          r.add(field, "duplicate task '" + (*v)[i] + "'");
        else
          c.tasks.push_back(t);
      } catch (const Error& e) {
        r.add(field, "unknown genre pair '" + (*v)[i] + "' (" + e.what() + ")");
      }
    }
    if (v->empty()) r.add("tasks", "at least one task is required");
  }
  if (auto v = r.get<std::vector<std::string>>(root, "languages", "languages", true)) {
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string field = "languages[" + std::to_string(i) + "]";
      const auto lang = parse_language((*v)[i]);
      if (!lang)
        r.add(field, "unknown language '" + (*v)[i] + "' (expected EN, FR, DE, ES, IT or PT)");
      else if (std::find(c.languages.begin(), c.languages.end(), *lang) != c.languages.end())
        r.add(field, "duplicate language '" + (*v)[i] + "'");
      else
        c.languages.push_back(*lang);
    }
    if (v->empty()) r.add("languages", "at least one language is required");
  }
  if (root.contains("kind_sets")) {
    if (auto v = r.get<std::vector<std::string>>(root, "kind_sets", "kind_sets")) {
      for (std::size_t i = 0; i < v->size(); ++i) {
        try {
          const FeatureSpec s = FeatureSpec::parse((*v)[i]);
          if (std::find(c.kind_sets.begin(), c.kind_sets.end(), s) == c.kind_sets.end())
            c.kind_sets.push_back(s);
        } catch (const Error& e) {
          r.add("kind_sets[" + std::to_string(i) + "]", e.what());
        }
      }
    }
  } else {
    c.kind_sets = {FeatureSpec{}, FeatureSpec::parse("syntax"),
                   FeatureSpec::parse("metaphor"), FeatureSpec::parse("metre")};
  }
  // The baseline always runs first; delta tables need it.
  const auto base = std::find(c.kind_sets.begin(), c.kind_sets.end(), FeatureSpec{});
  if (base != c.kind_sets.end()) c.kind_sets.erase(base);
  c.kind_sets.insert(c.kind_sets.begin(), FeatureSpec{});

  if (auto v = r.get<std::uint64_t>(root, "seed", "seed")) c.seed = *v;
  if (auto v = r.get<long long>(root, "target_per_genre", "target_per_genre")) {
    if (*v >= 1) c.target_per_genre = static_cast<std::size_t>(*v);
    else r.add("target_per_genre", "must be >= 1, got " + std::to_string(*v));
  }
  if (auto v = r.get<long long>(root, "pad_len", "pad_len")) {
    if (*v >= 0) c.pad_len = static_cast<std::size_t>(*v);
    else r.add("pad_len", "must be >= 0 (0 selects the 95th percentile)");
  }
  if (auto v = r.get<std::string>(root, "model_id", "model_id")) {
    if (v->empty()) r.add("model_id", "must not be empty");
    else c.model_id = *v;
  }

  // Paths must exist now, not halfway through a run.
  auto must_dir = [&](const char* field, const fs::path& p) {
    if (!p.empty() && !fs::is_directory(p))
      r.add(field, "directory not found: " + fs::absolute(p).string());
  };
  auto must_file = [&](const char* field, const fs::path& p) {
    if (!p.empty() && !fs::is_regular_file(p))
      r.add(field, "file not found: " + fs::absolute(p).string());
  };
  must_dir("corpus", c.corpus);
  must_dir("lexicon", c.lexicon);
  must_dir("parses", c.parses);
  must_dir("abbreviations", c.abbreviations);
  must_file("metaphor_annotations", c.metaphor_annotations);
  must_file("metaphor_lexicon", c.metaphor_lexicon);
  if (c.needs(FeatureKind::Syntax) && c.parses.empty() && root.contains("corpus"))
    r.add("parses", "required when a kind set includes syntax");
  if (c.needs(FeatureKind::Metaphor) && c.metaphor_annotations.empty() &&
      c.metaphor_lexicon.empty()) {
    r.add("metaphor_annotations",
          "a metaphor kind set needs metaphor_annotations or metaphor_lexicon");
  }
  if (!c.lexicon.empty() && fs::is_directory(c.lexicon)) {
    for (Language lang : c.languages) {
      const fs::path f = c.lexicon / (lower_code(lang) + ".tsv");
      if (!fs::is_regular_file(f))
        r.add("lexicon", "no lexicon for " + std::string(to_string(lang)) + ": " +
                             fs::absolute(f).string());
    }
  }
  return c;
}

std::vector<Diagnostic> validate_config(const fs::path& path) {
  std::vector<Diagnostic> diags;
  const std::string text = read_file(path);
  parse_config(text, fs::absolute(path).parent_path(), diags);
  return diags;
}

PipelineConfig load_config(const fs::path& path) {
  std::vector<Diagnostic> diags;
  const std::string text = read_file(path);
  PipelineConfig c = parse_config(text, fs::absolute(path).parent_path(), diags);
  if (!diags.empty()) {
    std::string msg = "invalid config " + path.string() + ":";
    for (const auto& d : diags) msg += "\n  " + d.str();
    throw Error(ErrorCode::kInvalidArgument, msg);
  }
  return c;
}

ModelSettings load_model_settings(const fs::path& path) {
  const std::string text = read_file(path);
  const json root = parse_json_with_position(text, path.string());
  std::vector<Diagnostic> diags;
  Reader r(root, diags);
  ModelSettings s;
  read_encoder(r, root, s.encoder);
  read_train(r, root, s.train);
  if (auto v = r.get<long long>(root, "pad_len", "pad_len")) {
    if (*v >= 0) s.pad_len = static_cast<std::size_t>(*v);
    else r.add("pad_len", "must be >= 0");
  }
  if (auto v = r.get<std::string>(root, "model_id", "model_id")) s.model_id = *v;
  // Ignore unknown-key notes from the nested sections' siblings; only
  // range/type problems matter here.
  std::string msg;
  for (const auto& d : diags)
    if (d.message != "unknown key") msg += "\n  " + d.str();
  if (!msg.empty())
    throw Error(ErrorCode::kInvalidArgument, "invalid settings in " + path.string() + ":" + msg);
  return s;
}

// ---------------------------------------------------------------------------
// Running

std::size_t configured_workers() {
  if (const char* env = std::getenv("GENREFORGE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    std::cerr << "warning: ignoring GENREFORGE_WORKERS='" << env << "'\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string cell_name(const Task& task, Language lang, const FeatureSpec& spec) {
  return spec.label() + "/" + task.id() + "_" + std::string(to_string(lang));
}

namespace {

struct StageError : std::runtime_error {
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(what), stage(std::move(stage)) {}
  std::string stage;
};

template <typename F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

ojson encoder_json(const EncoderConfig& e) {
  return {{"ngram_min", e.ngram_min}, {"ngram_max", e.ngram_max}, {"dim", e.dim},
          {"hash_seed", e.hash_seed}, {"normalize", e.normalize}};
}

ojson train_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"epochs", t.epochs},
          {"batch_size", t.batch_size}, {"l2", t.l2}, {"seed", t.seed},
          {"hidden_dim", t.hidden_dim}};
}

struct GridCell {
  Task task;
  Language language;
  FeatureSpec spec;
};

struct CellOutcome {
  bool cached = false;
  std::string error;
};

std::vector<Artifact> collect_artifacts(const fs::path& out) {
  std::vector<Artifact> list;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), out).generic_string();
    if (rel == "summary.json" || rel.rfind("failed/", 0) == 0) continue;
    list.push_back({rel, sha256_file(e.path().string())});
  }
  std::sort(list.begin(), list.end(),
            [](const Artifact& a, const Artifact& b) { return a.path < b.path; });
  return list;
}

void preserve_failure(const fs::path& out, const std::string& stage_name,
                      const std::string& message) {
  const fs::path failed = out / "failed";
  std::error_code ec;
  fs::remove_all(failed, ec);
  fs::create_directories(failed);
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(out))
    if (e.path().filename() != "failed") entries.push_back(e.path());
  for (const auto& p : entries) fs::rename(p, failed / p.filename(), ec);
  write_file(failed / "error.txt", "stage: " + stage_name + "\nerror: " + message + "\n");
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, std::size_t workers) {
  PipelineResult result;
  const fs::path out = fs::absolute(config.output).lexically_normal();
  result.output = out;
  fs::create_directories(out);
  {
    // A stale failure from an earlier run would otherwise linger.
    std::error_code ec;
    fs::remove_all(out / "failed", ec);
  }

  try {
    // Ingest ---------------------------------------------------------------
    const fs::path manifest_path = out / "manifest.jsonl";
    DatasetManifest manifest = stage("ingest", [&] {
      IngestOptions opts;
      opts.seed = config.seed;
      opts.target_per_genre = config.target_per_genre;
      opts.abbreviations_dir = config.abbreviations;
      IngestResult ing = ingest_corpus(config.corpus, opts);
      for (const auto& d : ing.unmarked_documents)
        std::cerr << "warning: no boilerplate markers in " << d << "\n";
      write_manifest(ing.manifest, manifest_path);
      write_file(out / "stats.tsv", dataset_stats(ing.manifest).to_tsv());
      return std::move(ing.manifest);
    });
    const std::string manifest_sha = sha256_file(manifest_path.string());

    // Extraction -----------------------------------------------------------
    FeatureStore store;
    std::map<std::string, std::string> sidecar_sha;
    fs::create_directories(out / "features");
    if (!config.parses.empty()) {
      stage("extract syntax", [&] {
        SyntaxExtraction ex = extract_syntax(config.parses, manifest);
        if (!ex.missing.empty() && config.needs(FeatureKind::Syntax)) {
          std::cerr << "warning: " << ex.missing.size()
                    << " manifest sentences have no parse\n";
        }
        write_syntax_sidecar(ex.features, out / "features/syntax.jsonl");
        store.syntax = std::move(ex.features);
        sidecar_sha["syntax"] = sha256_file((out / "features/syntax.jsonl").string());
      });
    }
    if (!config.metaphor_annotations.empty() || !config.metaphor_lexicon.empty()) {
      stage("extract metaphor", [&] {
        std::optional<AnnotationMap> ann;
        std::optional<MetaphorLexicon> lex;
        if (!config.metaphor_annotations.empty())
          ann = load_token_annotations(config.metaphor_annotations);
        if (!config.metaphor_lexicon.empty())
          lex = load_metaphor_lexicon(config.metaphor_lexicon);
        MetaphorExtraction ex =
            extract_metaphor(manifest, ann ? &*ann : nullptr, lex ? &*lex : nullptr);
        write_metaphor_sidecar(ex.features, out / "features/metaphor.jsonl");
        store.metaphor = std::move(ex.features);
        sidecar_sha["metaphor"] = sha256_file((out / "features/metaphor.jsonl").string());
      });
    }
    stage("extract metre", [&] {
      auto patterns = extract_metre(manifest, config.lexicon);
      write_metre_sidecar(patterns, out / "features/metre.jsonl");
      store.metre = std::move(patterns);
      sidecar_sha["metre"] = sha256_file((out / "features/metre.jsonl").string());
    });

    // Training grid ---------------------------------------------------------
    std::vector<GridCell> cells;
    for (const auto& spec : config.kind_sets)
      for (const auto& task : config.tasks)
        for (Language lang : config.languages) cells.push_back({task, lang, spec});

    std::map<std::pair<Task, Language>, PairDataset> datasets;
    stage("build tasks", [&] {
      for (const auto& task : config.tasks)
        for (Language lang : config.languages)
          datasets.emplace(std::pair{task, lang},
                           build_pair_task(manifest, task.first, task.second, lang));
    });

    auto cache_key = [&](const GridCell& cell) {
      ojson k;
      k["format"] = kModelFormatVersion;
      k["cell"] = cell_name(cell.task, cell.language, cell.spec);
      k["model_id"] = config.model_id;
      k["encoder"] = encoder_json(config.encoder);
      k["train"] = train_json(config.train);
      k["pad_len"] = config.pad_len;
      k["manifest"] = manifest_sha;
      for (FeatureKind kind : cell.spec.kinds()) {
        const std::string name(to_string(kind));
        k["sidecar_" + name] = sidecar_sha.count(name) ? sidecar_sha.at(name) : "";
      }
      return sha256_hex(k.dump());
    };

    std::vector<CellOutcome> outcomes(cells.size());
    auto run_cell = [&](std::size_t i) {
      const GridCell& cell = cells[i];
      const std::string name = cell_name(cell.task, cell.language, cell.spec);
      const fs::path model_path = out / "models" / (name + ".json");
      const fs::path report_path = out / "reports" / (name + ".json");
      const std::string key = cache_key(cell);
      try {
        if (fs::exists(model_path) && fs::exists(report_path)) {
          try {
            if (load_model(model_path).cache_key == key) {
              outcomes[i].cached = true;
              return;
            }
          } catch (const Error&) {
            // Unreadable model: retrain below.
          }
        }
        const PairDataset& ds = datasets.at({cell.task, cell.language});
        FeatureSpec spec = cell.spec;
        if (spec.metre) spec.pad_len = config.pad_len;
        TrainResult tr =
            train(ds, store, config.encoder, spec, config.train, config.model_id);
        tr.model.cache_key = key;
        fs::create_directories(model_path.parent_path());
        save_model(tr.model, model_path);

        const Predictions pr = predict_split(tr.model, ds, store, Split::Test);
        EvalReport rep;
        rep.task = cell.task.id();
        rep.language = cell.language;
        rep.model_id = config.model_id;
        rep.features = cell.spec.label();
        rep.genre_x = std::string(to_string(cell.task.first));
        rep.genre_y = std::string(to_string(cell.task.second));
        rep.f1 = f1_pair(pr.predicted, pr.labels);
        fs::create_directories(report_path.parent_path());
        write_eval_report(rep, report_path);
      } catch (const std::exception& e) {
        outcomes[i].error = name + ": " + e.what();
      }
    };

    const std::size_t nthreads = std::max<std::size_t>(1, std::min(workers, cells.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) run_cell(i);
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& o : outcomes) {
      if (!o.error.empty()) throw StageError("train", o.error);
      if (o.cached) ++result.models_cached;
      else ++result.models_trained;
    }

    // Reports ---------------------------------------------------------------
    stage("report", [&] {
      std::map<std::string, std::vector<EvalReport>> by_kind;
      for (const auto& cell : cells) {
        const std::string name = cell_name(cell.task, cell.language, cell.spec);
        by_kind[cell.spec.label()].push_back(
            read_eval_report(out / "reports" / (name + ".json")));
      }
      const auto baseline = summarize_reports(by_kind.at("baseline"));
      ojson macro = ojson::array();
      std::string md;
      for (const auto& spec : config.kind_sets) {
        const auto summaries = summarize_reports(by_kind.at(spec.label()));
        for (const auto& s : summaries) {
          macro.push_back({{"features", spec.label()},
                           {"task", s.task},
                           {"model_id", s.model_id},
                           {"languages", s.languages},
                           {"genre_means", {s.genre_means.first, s.genre_means.second}},
                           {"macro", s.macro}});
        }
        if (spec.empty()) continue;
        const DeltaTable table = delta_table(baseline, summaries, spec.label());
        if (!md.empty()) md += "\n";
        md += table.to_markdown();
      }
      write_file(out / "macro.json", macro.dump(2) + "\n");
      write_file(out / "delta_table.md", md);
    });

    // Plots and genre statistics --------------------------------------------
    std::vector<std::string> warnings;
    stage("plot", [&] {
      for (Language lang : config.languages) {
        const std::string code(to_string(lang));
        std::vector<const SentenceRecord*> recs;
        for (const auto& r : manifest.records)
          if (r.language == lang) recs.push_back(&r);

        if (!store.syntax.empty()) {
          std::vector<SyntaxPoint> pts;
          for (const auto* r : recs) {
            auto it = store.syntax.find(r->sentence_id);
            if (it != store.syntax.end()) pts.push_back({r->sentence_id, it->second, r->genre});
          }
          emit_plot(scatter_data(std::move(pts)), out / "plots" / ("syntax_" + code),
                    {"syntax depth " + code, "ln(depth ratio)", "ln(tree depth + 1)"});
        }

        std::vector<MetrePattern> pats;
        std::vector<std::string> ids, genres;
        for (const auto* r : recs) {
          pats.push_back(store.metre.at(r->sentence_id));
          ids.push_back(r->sentence_id);
          genres.emplace_back(to_string(r->genre));
        }
        if (pats.size() >= 2) {
          std::size_t pad = config.pad_len ? config.pad_len : default_pad_len(pats);
          pad = std::max<std::size_t>(pad, 2);
          const PcaResult pca = pca_project(pad_patterns(pats, pad), 2);
          if (pca.degenerate) warnings.push_back("metre_" + code + ": " + pca.warning);
          emit_plot(pca_rows(pca, ids, genres), out / "plots" / ("metre_" + code),
                    {"metre PCA " + code + " (pad " + std::to_string(pad) + ")", "PC1",
                     "PC2"});
        }
      }
      if (!store.metaphor.empty()) {
        ojson avg;
        for (Language lang : config.languages) {
          std::vector<std::pair<MetaphorFeature, Genre>> feats;
          std::map<std::string, std::size_t> sources;
          for (const auto& r : manifest.records) {
            if (r.language != lang) continue;
            auto it = store.metaphor.find(r.sentence_id);
            if (it == store.metaphor.end()) continue;
            feats.emplace_back(it->second, r.genre);
            ++sources[std::string(to_string(it->second.source))];
          }
          ojson genres_json = ojson::object();
          for (const auto& [g, a] : genre_average_metaphors(feats))
            genres_json[std::string(to_string(g))] = {{"mean", format_two_decimals(a.mean)},
                                                      {"count", a.count}};
          avg[std::string(to_string(lang))] = {{"genres", genres_json}, {"sources", sources}};
        }
        write_file(out / "metaphor_averages.json", avg.dump(2) + "\n");
      }
    });

    // Summary ----------------------------------------------------------------
    result.artifacts = collect_artifacts(out);
    ojson summary;
    summary["model_id"] = config.model_id;
    summary["seed"] = config.seed;
    summary["prng"] = kPrngName;
    summary["grid"] = {{"tasks", config.tasks.size()},
                       {"languages", config.languages.size()},
                       {"kind_sets", config.kind_sets.size()},
                       {"models", cells.size()}};
    summary["warnings"] = warnings;
    ojson arts = ojson::array();
    for (const auto& a : result.artifacts) arts.push_back({{"path", a.path}, {"sha256", a.sha256}});
    summary["artifacts"] = arts;
    write_file(out / "summary.json", summary.dump(2) + "\n");
    result.ok = true;
  } catch (const StageError& e) {
    result.failed_stage = e.stage;
    result.error = e.what();
    preserve_failure(out, e.stage, e.what());
  }
  return result;
}

}  // namespace genreforge
