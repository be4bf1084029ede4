#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "genreforge/classifier.h"
#include "genreforge/encoding.h"
#include "genreforge/types.h"

namespace genreforge {

// Declarative run description, read from JSON. Relative paths resolve
// against the directory of the config file.
struct PipelineConfig {
  std::filesystem::path base_dir;
  std::filesystem::path corpus;
  std::filesystem::path lexicon;
  std::filesystem::path parses;                // optional unless syntax runs
  std::filesystem::path abbreviations;         // optional, bundled otherwise
  std::filesystem::path metaphor_annotations;  // optional
  std::filesystem::path metaphor_lexicon;      // optional
  std::filesystem::path output;
  EncoderConfig encoder;
  TrainConfig train;
  std::vector<Task> tasks;
  std::vector<Language> languages;
  std::vector<FeatureSpec> kind_sets;  // baseline first
  std::uint64_t seed = 0;              // sampling and split
  std::size_t target_per_genre = 3000;
  std::size_t pad_len = 0;             // 0: 95th percentile of Train
  std::string model_id = "hashed-ngram";

  bool needs(FeatureKind kind) const;
};

struct Diagnostic {
  std::string field;    // "languages[0]", "lexicon"
  std::string message;

  std::string str() const { return field + ": " + message; }
};

// Parses JSON text. Syntax errors throw kParseError with line and column;
// semantic problems are collected in `diagnostics` and the returned config
// carries defaults for the offending fields.
PipelineConfig parse_config(std::string_view json,
                            const std::filesystem::path& base_dir,
                            std::vector<Diagnostic>& diagnostics);

// Reads and checks a config file: every missing path, bad enum and
// out-of-range value. Empty result means the config is clean.
std::vector<Diagnostic> validate_config(const std::filesystem::path& path);

// Throws kInvalidArgument listing the diagnostics when the config is not
// clean.
PipelineConfig load_config(const std::filesystem::path& path);

// Encoder/train settings for single-model commands; only the "encoder",
// "train", "pad_len" and "model_id" keys are read.
struct ModelSettings {
  EncoderConfig encoder;
  TrainConfig train;
  std::size_t pad_len = 0;
  std::string model_id = "hashed-ngram";
};
ModelSettings load_model_settings(const std::filesystem::path& path);

struct Artifact {
  std::string path;  // relative to the output directory
  std::string sha256;
};

struct PipelineResult {
  bool ok = false;
  std::filesystem::path output;
  std::vector<Artifact> artifacts;
  std::size_t models_trained = 0;
  std::size_t models_cached = 0;
  std::string failed_stage;
  std::string error;
};

// Worker count from GENREFORGE_WORKERS; defaults to the hardware thread
// count, at least 1.
std::size_t configured_workers();

// Runs ingest, extraction, the {tasks x languages x kind_sets} training
// grid, evaluation, delta tables and plots. Cells whose cache key matches an
// existing model and report are not retrained. On failure the partial
// outputs move under `<output>/failed/` next to an error.txt.
PipelineResult run_pipeline(const PipelineConfig& config, std::size_t workers);

// Directory-safe cell name, e.g. "syntax/Novel-Poetry_EN".
std::string cell_name(const Task& task, Language lang, const FeatureSpec& spec);

}  // namespace genreforge
