#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "genreforge/corpus.h"
#include "genreforge/matrix.h"
#include "genreforge/types.h"

namespace genreforge {

using StressMarks = std::vector<std::uint8_t>;

struct StressLexicon {
  Language language = Language::EN;
  std::unordered_map<std::string, StressMarks> entries;
  std::vector<std::string> duplicates;  // words whose later entries were dropped

  const StressMarks* find(std::string_view normalized_word) const;
  std::size_t size() const { return entries.size(); }
};

// `word<TAB>stress-string` lines, '#' comments. Duplicate words keep the
// first entry. Throws kBadStressString, kEmptyFile, kIoFailure.
StressLexicon load_stress_lexicon(const std::filesystem::path& path,
                                  Language language);
StressLexicon parse_stress_lexicon(std::string_view contents,
                                   Language language);

// `<dir>/<lang>.tsv`
StressLexicon load_lexicon_for(const std::filesystem::path& dir,
                               Language language);

// Vowel groups under the language's vowel set (diacritics included).
std::size_t count_vowel_groups(std::string_view normalized_word,
                               Language language);

// Fixed-stress default: EN/DE first syllable, FR last, ES/IT/PT
// penultimate; monosyllables stressed. Throws kUnsyllabifiable when the
// word has no vowel group.
StressMarks rule_stress(std::string_view normalized_word, Language language);

// Lexicon lookup with rule fallback. Throws kInvalidArgument for a word
// that normalizes to nothing, kUnsyllabifiable as rule_stress.
StressMarks word_stress(std::string_view word, const StressLexicon& lexicon,
                        Language language);

struct MetrePattern {
  std::string sentence_id;
  StressMarks bits;
  std::size_t oov_words = 0;        // resolved by the rule fallback
  std::size_t unsyllabifiable = 0;  // substituted with [1]

  std::size_t syllable_count() const { return bits.size(); }
  std::string bit_string() const;
};

MetrePattern metre_pattern(std::string_view sentence_text,
                           const StressLexicon& lexicon, Language language);

// Right-pads with 0 / truncates every pattern to pad_len columns.
Matrix pad_patterns(const std::vector<MetrePattern>& patterns,
                    std::size_t pad_len);

// Nearest-rank 95th percentile of syllable counts, at least 1.
std::size_t default_pad_len(const std::vector<MetrePattern>& patterns);

// Per-language lexicons from `<dir>/<lang>.tsv`, loaded on demand.
std::map<std::string, MetrePattern> extract_metre(
    const DatasetManifest& manifest, const std::filesystem::path& lexicon_dir);

// metre.jsonl: {sentence_id, bits, syllable_count, oov_flags, unsyllabifiable}
void write_metre_sidecar(const std::map<std::string, MetrePattern>& patterns,
                         const std::filesystem::path& path);
std::map<std::string, MetrePattern> read_metre_sidecar(
    const std::filesystem::path& path);

}  // namespace genreforge
