#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "genreforge/hashing.h"
#include "genreforge/types.h"

namespace genreforge {

struct RawDocument {
  std::string doc_id;
  Language language;
  Genre genre;
  std::string raw_text;
  std::string source_path;
};

struct SentenceRecord {
  std::string sentence_id;
  std::string text;
  Language language;
  Genre genre;
  std::optional<Split> split;
  std::size_t char_offset = 0;  // byte offset into the stripped body

  friend bool operator==(const SentenceRecord&, const SentenceRecord&) = default;
};

struct SplitRatio {
  std::uint64_t num = 4;
  std::uint64_t den = 5;
};

struct DatasetManifest {
  std::vector<SentenceRecord> records;
  std::uint64_t split_seed = 0;
  SplitRatio split_ratio;
};

using Cell = std::pair<Language, Genre>;

// Tally of records per (language, genre); always recomputed from records.
std::map<Cell, std::size_t> cell_counts(const DatasetManifest& manifest);

// ---------------------------------------------------------------------------
// Boilerplate

struct StrippedText {
  std::string body;
  // False when neither marker was found and the text passed through as-is.
  bool markers_found = false;
};

// Returns the lines strictly between the first "*** START OF ..." line and
// the first later "*** END OF ..." line. Markers match case-insensitively.
// Throws kEndBeforeStart when an end marker precedes the start marker.
StrippedText strip_boilerplate(std::string_view raw_text);

// ---------------------------------------------------------------------------
// Segmentation

struct Segment {
  std::string text;
  std::size_t offset = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

// Lowercase abbreviations without the trailing period ("mr", "etc").
struct Abbreviations {
  std::set<std::string> words;

  bool contains(std::string_view lowercase_word) const;
};

// Reads `<dir>/<lang>.txt`: one abbreviation per line, '#' comments.
// A missing file yields an empty list.
Abbreviations load_abbreviations(const std::filesystem::path& dir,
                                 Language lang);

// Directory of the bundled data files (abbreviations, lexicons).
std::filesystem::path bundled_data_dir();

// Novel and Drama split on sentence-final punctuation followed by whitespace
// and an uppercase letter or opening quote (and on blank lines). Poetry
// splits on line breaks; lines shorter than 3 characters merge into the
// next line. Offsets are byte offsets into `body`.
std::vector<Segment> segment_sentences(std::string_view body, Language lang,
                                       Genre genre,
                                       const Abbreviations& abbreviations = {});

// ---------------------------------------------------------------------------
// Sampling and splitting

// Sorted indices of a uniform sample of `target` out of `n` without
// replacement; all of [0, n) when n <= target.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t target,
                                        std::uint64_t seed);

template <typename T>
std::vector<T> sample_sentences(const std::vector<T>& segments,
                                std::size_t target, std::uint64_t seed) {
  std::vector<T> out;
  for (std::size_t i : sample_indices(segments.size(), target, seed))
    out.push_back(segments[i]);
  return out;
}

// round-half-up(ratio * n) in exact integer arithmetic.
std::size_t train_count(std::size_t n, SplitRatio ratio);

// Assigns Train/Test per (language, genre) cell by seeded shuffle.
// Throws kAlreadySplit if any record already carries a split.
DatasetManifest split_dataset(DatasetManifest manifest);

// ---------------------------------------------------------------------------
// Tasks and statistics

struct LabeledRecord {
  SentenceRecord record;
  int label = 0;
};

struct PairDataset {
  Task task;
  Language language;
  std::vector<LabeledRecord> records;

  std::size_t count(Split split) const;
  Genre genre_of(int label) const { return label == 0 ? task.first : task.second; }
};

// Records of the two genres for `lang`. Labels follow Task's canonical
// order. Throws kSameGenre, kEmptyCell, or kInvalidArgument on unsplit data.
PairDataset build_pair_task(const DatasetManifest& manifest, Genre genre_a,
                            Genre genre_b, Language lang);

struct CountTable {
  // Indexed by kAllLanguages x kAllGenres order.
  std::array<std::array<std::size_t, 3>, 6> cells{};

  std::size_t row_total(std::size_t lang_index) const;
  std::size_t column_total(std::size_t genre_index) const;
  std::size_t total() const;
  std::size_t at(Language lang, Genre genre) const;

  std::string to_tsv() const;
};

CountTable dataset_stats(const DatasetManifest& manifest);

// ---------------------------------------------------------------------------
// Ingest

std::string make_sentence_id(std::string_view doc_id, std::size_t offset);

struct IngestOptions {
  std::uint64_t seed = 0;
  std::size_t target_per_genre = 3000;
  std::filesystem::path abbreviations_dir;  // empty: bundled data
};

struct IngestResult {
  DatasetManifest manifest;
  std::vector<std::string> unmarked_documents;  // no boilerplate markers
};

// Reads `corpus/<lang>/<genre>/<doc_id>.txt`, strips, segments, samples per
// (language, genre) pool and splits. Pure function of (files, options).
IngestResult ingest_corpus(const std::filesystem::path& corpus_dir,
                           const IngestOptions& options);

// Segments one document; exposed for per-document parallel ingestion.
std::vector<SentenceRecord> document_sentences(const RawDocument& doc,
                                               const Abbreviations& abbrevs);

// manifest.jsonl: one SentenceRecord per line. The seed, PRNG name and
// ratio go to a `<stem>.meta.json` sidecar.
void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& jsonl_path);
DatasetManifest read_manifest(const std::filesystem::path& jsonl_path);
std::string manifest_record_line(const SentenceRecord& record);

std::filesystem::path manifest_meta_path(const std::filesystem::path& jsonl_path);

}  // namespace genreforge
