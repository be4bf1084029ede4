#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "genreforge/corpus.h"
#include "genreforge/types.h"

namespace genreforge {

struct TokenAnnotation {
  std::string sentence_id;
  std::vector<std::uint8_t> labels;  // 1 = metaphorical token
};

enum class MetaphorSource { Annotation, LexiconProxy };

std::string_view to_string(MetaphorSource source);

struct MetaphorFeature {
  std::string sentence_id;
  int count = 0;
  MetaphorSource source = MetaphorSource::Annotation;

  friend bool operator==(const MetaphorFeature&, const MetaphorFeature&) = default;
};

using AnnotationMap = std::map<std::string, TokenAnnotation>;

// JSONL lines {sentence_id, labels:[0|1,...]}. Throws kDuplicateId,
// kNonBinaryLabel, kParseError.
AnnotationMap parse_token_annotations(std::string_view contents);
AnnotationMap load_token_annotations(const std::filesystem::path& path);
std::string annotation_line(const TokenAnnotation& annotation);

int metaphor_count(const TokenAnnotation& annotation);

// Weak substitute for a detector: normalized lowercase forms.
struct MetaphorLexicon {
  std::set<std::string> lemmas;
};

MetaphorLexicon load_metaphor_lexicon(const std::filesystem::path& path);

int proxy_count(std::string_view sentence_text, const MetaphorLexicon& lexicon);

struct GenreAverage {
  double mean = 0.0;
  std::size_t count = 0;
};

// Mean count per genre; genres without data are omitted.
std::map<Genre, GenreAverage> genre_average_metaphors(
    const std::vector<std::pair<MetaphorFeature, Genre>>& features);

// "1.33"
std::string format_two_decimals(double value);

struct MetaphorExtraction {
  std::map<std::string, MetaphorFeature> features;
  std::vector<std::string> missing;
};

// Annotations win; the lexicon proxy covers sentences without one.
MetaphorExtraction extract_metaphor(const DatasetManifest& manifest,
                                    const AnnotationMap* annotations,
                                    const MetaphorLexicon* lexicon);

// metaphor.jsonl: {sentence_id, count, source}
void write_metaphor_sidecar(const std::map<std::string, MetaphorFeature>& features,
                            const std::filesystem::path& path);
std::map<std::string, MetaphorFeature> read_metaphor_sidecar(
    const std::filesystem::path& path);

}  // namespace genreforge
