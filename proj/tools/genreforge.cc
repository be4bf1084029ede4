// genreforge: corpus -> features -> classifier -> reports.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "genreforge/classifier.h"
#include "genreforge/corpus.h"
#include "genreforge/error.h"
#include "genreforge/evaluation.h"
#include "genreforge/metaphor.h"
#include "genreforge/metre.h"
#include "genreforge/pipeline.h"
#include "genreforge/syntax.h"

namespace fs = std::filesystem;
using namespace genreforge;

namespace {

void write_text(const fs::path& path, const std::string& data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << data;
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

fs::path sibling(const fs::path& p, const std::string& name) {
  return p.has_parent_path() ? p.parent_path() / name : fs::path(name);
}

struct SidecarPaths {
  std::string syntax, metre, metaphor;
};

void add_sidecar_options(CLI::App* cmd, SidecarPaths& s) {
  cmd->add_option("--syntax", s.syntax, "syntax.jsonl sidecar");
  cmd->add_option("--metre", s.metre, "metre.jsonl sidecar");
  cmd->add_option("--metaphor", s.metaphor, "metaphor.jsonl sidecar");
}

FeatureStore load_store(const SidecarPaths& s) {
  FeatureStore store;
  if (!s.syntax.empty()) store.syntax = read_syntax_sidecar(s.syntax);
  if (!s.metre.empty()) store.metre = read_metre_sidecar(s.metre);
  if (!s.metaphor.empty()) store.metaphor = read_metaphor_sidecar(s.metaphor);
  return store;
}

void print_diagnostics(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << d.str() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Literary genre dataset, feature extraction and classification"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Build a sampled, split sentence manifest");
  std::string corpus_dir, manifest_out, abbrev_dir, stats_out;
  std::uint64_t seed = 0;
  std::size_t target = 3000;
  ingest->add_option("--corpus", corpus_dir, "corpus/<lang>/<genre>/*.txt root")->required();
  ingest->add_option("--out", manifest_out, "manifest.jsonl")->required();
  ingest->add_option("--seed", seed, "sampling and split seed");
  ingest->add_option("--target-per-genre", target, "sentences per (language, genre)");
  ingest->add_option("--abbreviations", abbrev_dir, "abbreviation list directory");
  ingest->add_option("--stats", stats_out, "count table (default: stats.tsv beside --out)");

  // extract
  auto* extract = app.add_subcommand("extract", "Compute a feature sidecar");
  extract->require_subcommand(1);
  std::string ex_manifest, ex_out, ex_parses, ex_lexicon, ex_annotations, ex_mlexicon;
  std::size_t ex_pad = 0;
  auto* ex_syntax = extract->add_subcommand("syntax", "Tree depth from CoNLL-U parses");
  ex_syntax->add_option("--parses", ex_parses, "directory of .conllu files")->required();
  auto* ex_metre = extract->add_subcommand("metre", "Stress patterns");
  ex_metre->add_option("--lexicon", ex_lexicon, "directory of <lang>.tsv lexicons")->required();
  ex_metre->add_option("--pad-len", ex_pad, "padding length recorded for PCA (0: 95th percentile)");
  auto* ex_metaphor = extract->add_subcommand("metaphor", "Metaphor counts");
  auto* ann_opt = ex_metaphor->add_option("--annotations", ex_annotations, "token annotations JSONL");
  auto* lex_opt = ex_metaphor->add_option("--lexicon", ex_mlexicon, "proxy lemma list");
  for (auto* sub : {ex_syntax, ex_metre, ex_metaphor}) {
    sub->add_option("--manifest", ex_manifest, "manifest.jsonl")->required();
    sub->add_option("--out", ex_out, "output sidecar")->required();
  }

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one binary classifier");
  std::string task_str, lang_str, features_str, config_path, model_out, model_id;
  std::string tr_manifest;
  SidecarPaths tr_side;
  train_cmd->add_option("--task", task_str, "genre pair, e.g. P:N")->required();
  train_cmd->add_option("--lang", lang_str, "EN, FR, DE, ES, IT or PT")->required();
  train_cmd->add_option("--features", features_str, "comma list: syntax,metaphor,metre");
  train_cmd->add_option("--config", config_path, "JSON with encoder/train sections");
  train_cmd->add_option("--manifest", tr_manifest, "manifest.jsonl")->required();
  train_cmd->add_option("--out", model_out, "model file")->required();
  train_cmd->add_option("--model-id", model_id, "model identifier");
  add_sidecar_options(train_cmd, tr_side);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on the Test split");
  std::string ev_model, ev_dataset, ev_out;
  SidecarPaths ev_side;
  eval_cmd->add_option("--model", ev_model, "model file")->required();
  eval_cmd->add_option("--dataset", ev_dataset, "manifest.jsonl")->required();
  eval_cmd->add_option("--out", ev_out, "report.json")->required();
  add_sidecar_options(eval_cmd, ev_side);

  // report
  auto* report_cmd = app.add_subcommand("report", "Baseline vs augmented delta table");
  std::string rp_base, rp_aug, rp_out, rp_feature;
  report_cmd->add_option("--baseline", rp_base, "directory of baseline reports")->required();
  report_cmd->add_option("--augmented", rp_aug, "directory of augmented reports")->required();
  report_cmd->add_option("--out", rp_out, "table.md")->required();
  report_cmd->add_option("--feature", rp_feature, "heading for the table");

  // plot
  auto* plot = app.add_subcommand("plot", "Scatter data and SVG");
  plot->require_subcommand(1);
  std::string pl_manifest, pl_out, pl_syntax, pl_metre, pl_lang;
  std::size_t pl_pad = 0;
  auto* pl_syn = plot->add_subcommand("syntax", "ln(ratio) vs ln(depth + 1)");
  pl_syn->add_option("--syntax", pl_syntax, "syntax.jsonl")->required();
  auto* pl_met = plot->add_subcommand("metre", "PCA of padded stress patterns");
  pl_met->add_option("--metre", pl_metre, "metre.jsonl")->required();
  pl_met->add_option("--pad-len", pl_pad, "0: 95th percentile");
  for (auto* sub : {pl_syn, pl_met}) {
    sub->add_option("--manifest", pl_manifest, "manifest.jsonl")->required();
    sub->add_option("--out", pl_out, "output prefix")->required();
    sub->add_option("--lang", pl_lang, "restrict to one language");
  }

  // run / validate
  auto* run_cmd = app.add_subcommand("run", "Run the full experiment grid");
  std::string run_config;
  run_cmd->add_option("--config", run_config, "pipeline config (JSON)")->required();
  auto* validate_cmd = app.add_subcommand("validate", "Check a pipeline config");
  std::string val_config;
  validate_cmd->add_option("--config", val_config, "pipeline config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      IngestOptions opts;
      opts.seed = seed;
      opts.target_per_genre = target;
      opts.abbreviations_dir = abbrev_dir;
      const IngestResult r = ingest_corpus(corpus_dir, opts);
      for (const auto& d : r.unmarked_documents)
        std::cerr << "warning: no boilerplate markers in " << d << "\n";
      write_manifest(r.manifest, manifest_out);
      const fs::path stats = stats_out.empty() ? sibling(manifest_out, "stats.tsv") : fs::path(stats_out);
      write_text(stats, dataset_stats(r.manifest).to_tsv());
      std::cout << r.manifest.records.size() << " sentences -> " << manifest_out << "\n";
      return 0;
    }

    if (extract->parsed()) {
      const DatasetManifest manifest = read_manifest(ex_manifest);
      if (ex_syntax->parsed()) {
        const SyntaxExtraction r = extract_syntax(ex_parses, manifest);
        write_syntax_sidecar(r.features, ex_out);
        std::cout << r.features.size() << " parsed, " << r.missing.size() << " missing\n";
      } else if (ex_metre->parsed()) {
        const auto patterns = extract_metre(manifest, ex_lexicon);
        write_metre_sidecar(patterns, ex_out);
        std::vector<MetrePattern> all;
        for (const auto& [id, p] : patterns) all.push_back(p);
        nlohmann::ordered_json meta;
        meta["pad_len"] = ex_pad ? ex_pad : default_pad_len(all);
        meta["pad_rule"] = ex_pad ? "fixed" : "p95-nearest-rank";
        meta["stress_defaults"] = {{"EN", "first"}, {"DE", "first"}, {"FR", "last"},
                                   {"ES", "penultimate"}, {"IT", "penultimate"},
                                   {"PT", "penultimate"}};
        write_text(fs::path(ex_out).replace_extension(".meta.json"), meta.dump(2) + "\n");
        std::cout << patterns.size() << " patterns\n";
      } else {
        if (ann_opt->count() == 0 && lex_opt->count() == 0) {
          std::cerr << "extract metaphor: give --annotations and/or --lexicon\n";
          return 2;
        }
        std::optional<AnnotationMap> ann;
        std::optional<MetaphorLexicon> lex;
        if (!ex_annotations.empty()) ann = load_token_annotations(ex_annotations);
        if (!ex_mlexicon.empty()) lex = load_metaphor_lexicon(ex_mlexicon);
        const MetaphorExtraction r =
            extract_metaphor(manifest, ann ? &*ann : nullptr, lex ? &*lex : nullptr);
        write_metaphor_sidecar(r.features, ex_out);
        std::cout << r.features.size() << " counted, " << r.missing.size() << " missing\n";
      }
      return 0;
    }

    if (train_cmd->parsed()) {
      ModelSettings settings;
      if (!config_path.empty()) settings = load_model_settings(config_path);
      if (!model_id.empty()) settings.model_id = model_id;
      const Task task = Task::parse(task_str);
      const Language lang = language_or_throw(lang_str);
      FeatureSpec spec = FeatureSpec::parse(features_str);
      if (spec.metre) spec.pad_len = settings.pad_len;
      const DatasetManifest manifest = read_manifest(tr_manifest);
      const PairDataset ds = build_pair_task(manifest, task.first, task.second, lang);
      const TrainResult r =
          train(ds, load_store(tr_side), settings.encoder, spec, settings.train, settings.model_id);
      save_model(r.model, model_out);
      std::cout << "trained " << task.id() << " " << to_string(lang) << " ["
                << spec.label() << "] final loss " << r.epoch_loss.back() << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      const ClassifierModel model = load_model(ev_model);
      const DatasetManifest manifest = read_manifest(ev_dataset);
      const PairDataset ds =
          build_pair_task(manifest, model.task.first, model.task.second, model.language);
      const Predictions p = predict_split(model, ds, load_store(ev_side), Split::Test);
      EvalReport rep;
      rep.task = model.task.id();
      rep.language = model.language;
      rep.model_id = model.model_id;
      rep.features = model.features.label();
      rep.genre_x = std::string(to_string(model.task.first));
      rep.genre_y = std::string(to_string(model.task.second));
      rep.f1 = f1_pair(p.predicted, p.labels);
      write_eval_report(rep, ev_out);
      std::cout << "F1 " << rep.genre_x << " " << rep.f1.x << ", " << rep.genre_y << " "
                << rep.f1.y << "\n";
      return 0;
    }

    if (report_cmd->parsed()) {
      const auto base = summarize_reports(read_report_dir(rp_base));
      const auto aug = summarize_reports(read_report_dir(rp_aug));
      const DeltaTable t = delta_table(base, aug, rp_feature);
      write_text(rp_out, t.to_markdown());
      std::cout << t.cells.size() << " rows -> " << rp_out << "\n";
      return 0;
    }

    if (plot->parsed()) {
      const DatasetManifest manifest = read_manifest(pl_manifest);
      std::optional<Language> only;
      if (!pl_lang.empty()) only = language_or_throw(pl_lang);
      auto keep = [&](const SentenceRecord& r) { return !only || r.language == *only; };
      if (pl_syn->parsed()) {
        const auto feats = read_syntax_sidecar(pl_syntax);
        std::vector<SyntaxPoint> pts;
        for (const auto& r : manifest.records) {
          auto it = feats.find(r.sentence_id);
          if (keep(r) && it != feats.end()) pts.push_back({r.sentence_id, it->second, r.genre});
        }
        const auto rows = scatter_data(std::move(pts));
        emit_plot(rows, pl_out, {"syntax depth", "ln(depth ratio)", "ln(tree depth + 1)"});
        std::cout << rows.size() << " points -> " << pl_out << ".{csv,svg}\n";
      } else {
        const auto pats = read_metre_sidecar(pl_metre);
        std::vector<MetrePattern> list;
        std::vector<std::string> ids, genres;
        for (const auto& r : manifest.records) {
          auto it = pats.find(r.sentence_id);
          if (!keep(r) || it == pats.end()) continue;
          list.push_back(it->second);
          ids.push_back(r.sentence_id);
          genres.emplace_back(to_string(r.genre));
        }
        const std::size_t pad = std::max<std::size_t>(2, pl_pad ? pl_pad : default_pad_len(list));
        const PcaResult pca = pca_project(pad_patterns(list, pad), 2);
        if (pca.degenerate) std::cerr << "warning: " << pca.warning << "\n";
        emit_plot(pca_rows(pca, ids, genres), pl_out,
                  {"metre PCA (pad " + std::to_string(pad) + ")", "PC1", "PC2"});
        std::cout << list.size() << " points -> " << pl_out << ".{csv,svg}\n";
      }
      return 0;
    }

    if (validate_cmd->parsed()) {
      const auto diags = validate_config(val_config);
      print_diagnostics(diags);
      if (diags.empty()) std::cout << "ok\n";
      return diags.empty() ? 0 : 1;
    }

    if (run_cmd->parsed()) {
      const auto diags = validate_config(run_config);
      if (!diags.empty()) {
        print_diagnostics(diags);
        return 1;
      }
      const PipelineConfig cfg = load_config(run_config);
      const PipelineResult r = run_pipeline(cfg, configured_workers());
      if (!r.ok) {
        std::cerr << "failed at " << r.failed_stage << ": " << r.error << "\n"
                  << "partial outputs: " << (r.output / "failed").string() << "\n";
        return 1;
      }
      std::cout << r.models_trained << " trained, " << r.models_cached << " cached, "
                << r.artifacts.size() << " artifacts in " << r.output.string() << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
