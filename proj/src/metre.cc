#include "genreforge/metre.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>

#include <nlohmann/json.hpp>

#include "genreforge/error.h"
#include "genreforge/text.h"

namespace genreforge {

namespace fs = std::filesystem;

const StressMarks* StressLexicon::find(std::string_view normalized_word) const {
  auto it = entries.find(std::string(normalized_word));
  return it == entries.end() ? nullptr : &it->second;
}

StressLexicon parse_stress_lexicon(std::string_view contents,
                                   Language language) {
  StressLexicon lex;
  lex.language = language;
  std::size_t line_no = 0;
  for (const std::string& raw : text::split_lines(contents)) {
    ++line_no;
    std::string_view line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::kBadStressString,
                  "line " + std::to_string(line_no) + ": missing TAB");
    }
    const std::string word = text::normalize_word(line.substr(0, tab));
    const std::string_view marks = text::trim(line.substr(tab + 1));
    if (word.empty()) {
      throw Error(ErrorCode::kBadStressString,
                  "line " + std::to_string(line_no) + ": empty word");
    }
    if (marks.empty()) {
      throw Error(ErrorCode::kBadStressString,
                  "line " + std::to_string(line_no) + ": no syllables for '" +
                      word + "'");
    }
    StressMarks bits;
    for (char c : marks) {
      if (c != '0' && c != '1') {
        throw Error(ErrorCode::kBadStressString,
                    "line " + std::to_string(line_no) + ": '" +
                        std::string(marks) + "' is not a 0/1 string");
      }
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    if (!lex.entries.emplace(word, std::move(bits)).second) {
      lex.duplicates.push_back(word);
      std::cerr << "warning: duplicate lexicon entry '" << word
                << "' ignored (line " << line_no << ")\n";
    }
  }
  if (lex.entries.empty()) {
    throw Error(ErrorCode::kEmptyFile, "stress lexicon has no entries");
  }
  return lex;
}

StressLexicon load_stress_lexicon(const fs::path& path, Language language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  try {
    return parse_stress_lexicon(data, language);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

StressLexicon load_lexicon_for(const fs::path& dir, Language language) {
  return load_stress_lexicon(dir / (lower_code(language) + ".tsv"), language);
}

namespace {

const std::u32string& vowels(Language lang) {
  static const std::u32string en = U"aeiouy";
  static const std::u32string fr = U"aeiouyàâæéèêëîïôœùûüÿ";
  static const std::u32string de = U"aeiouyäöü";
  static const std::u32string es = U"aeiouyáéíóúü";
  static const std::u32string it = U"aeiouyàèéìíòóùú";
  static const std::u32string pt = U"aeiouyáâãàéêíóôõúü";
  switch (lang) {
    case Language::EN: return en;
    case Language::FR: return fr;
    case Language::DE: return de;
    case Language::ES: return es;
    case Language::IT: return it;
    case Language::PT: return pt;
  }
  return en;
}

}  // namespace

std::size_t count_vowel_groups(std::string_view normalized_word,
                               Language language) {
  const std::u32string& set = vowels(language);
  std::size_t groups = 0;
  bool in_group = false;
  for (char32_t cp : text::decode_utf8(normalized_word)) {
    const bool vowel = set.find(text::to_lower(cp)) != std::u32string::npos;
    if (vowel && !in_group) ++groups;
    in_group = vowel;
  }
  return groups;
}

StressMarks rule_stress(std::string_view normalized_word, Language language) {
  const std::size_t n = count_vowel_groups(normalized_word, language);
  if (n == 0) {
    throw Error(ErrorCode::kUnsyllabifiable,
                "no vowel group in '" + std::string(normalized_word) + "'");
  }
  StressMarks marks(n, 0);
  if (n == 1) {
    marks[0] = 1;
    return marks;
  }
  switch (language) {
    case Language::EN:
    case Language::DE:
      marks.front() = 1;
      break;
    case Language::FR:
      marks.back() = 1;
      break;
    case Language::ES:
    case Language::IT:
    case Language::PT:
      marks[n - 2] = 1;
      break;
  }
  return marks;
}

StressMarks word_stress(std::string_view word, const StressLexicon& lexicon,
                        Language language) {
  const std::string norm = text::normalize_word(word);
  if (norm.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "word '" + std::string(word) + "' is empty after normalization");
  }
  if (const StressMarks* hit = lexicon.find(norm)) return *hit;
  return rule_stress(norm, language);
}

std::string MetrePattern::bit_string() const {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

MetrePattern metre_pattern(std::string_view sentence_text,
                           const StressLexicon& lexicon, Language language) {
  MetrePattern out;
  for (const std::string& token : text::word_tokens(sentence_text)) {
    const std::string norm = text::normalize_word(token);
    if (norm.empty()) continue;
    if (const StressMarks* hit = lexicon.find(norm)) {
      out.bits.insert(out.bits.end(), hit->begin(), hit->end());
      continue;
    }
    ++out.oov_words;
    try {
      const StressMarks marks = rule_stress(norm, language);
      out.bits.insert(out.bits.end(), marks.begin(), marks.end());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUnsyllabifiable) throw;
      ++out.unsyllabifiable;
      out.bits.push_back(1);
    }
  }
  return out;
}

Matrix pad_patterns(const std::vector<MetrePattern>& patterns,
                    std::size_t pad_len) {
  if (pad_len == 0) {
    throw Error(ErrorCode::kInvalidArgument, "pad_len must be >= 1");
  }
  Matrix m(patterns.size(), pad_len, 0.0);
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const auto& bits = patterns[i].bits;
    const std::size_t n = std::min(bits.size(), pad_len);
    for (std::size_t j = 0; j < n; ++j) m(i, j) = bits[j];
  }
  return m;
}

std::size_t default_pad_len(const std::vector<MetrePattern>& patterns) {
  if (patterns.empty()) return 1;
  std::vector<std::size_t> counts;
  counts.reserve(patterns.size());
  for (const auto& p : patterns) counts.push_back(p.syllable_count());
  std::sort(counts.begin(), counts.end());
  // Nearest rank: ceil(0.95 n), computed in integers.
  const std::size_t rank = (95 * counts.size() + 99) / 100;
  return std::max<std::size_t>(1, counts[rank - 1]);
}

std::map<std::string, MetrePattern> extract_metre(
    const DatasetManifest& manifest, const fs::path& lexicon_dir) {
  std::map<Language, StressLexicon> lexicons;
  std::map<std::string, MetrePattern> out;
  for (const auto& r : manifest.records) {
    auto it = lexicons.find(r.language);
    if (it == lexicons.end())
      it = lexicons.emplace(r.language, load_lexicon_for(lexicon_dir, r.language))
               .first;
    MetrePattern p = metre_pattern(r.text, it->second, r.language);
    p.sentence_id = r.sentence_id;
    out.emplace(r.sentence_id, std::move(p));
  }
  return out;
}

void write_metre_sidecar(const std::map<std::string, MetrePattern>& patterns,
                         const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  for (const auto& [id, p] : patterns) {
    nlohmann::ordered_json j;
    j["sentence_id"] = id;
    j["bits"] = p.bit_string();
    j["syllable_count"] = p.syllable_count();
    j["oov_flags"] = p.oov_words;
    j["unsyllabifiable"] = p.unsyllabifiable;
    out << j.dump() << '\n';
  }
}

std::map<std::string, MetrePattern> read_metre_sidecar(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  std::map<std::string, MetrePattern> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      MetrePattern p;
      p.sentence_id = j.at("sentence_id").get<std::string>();
      for (char c : j.at("bits").get<std::string>()) {
        if (c != '0' && c != '1')
          throw Error(ErrorCode::kBadStressString, "bits of " + p.sentence_id);
        p.bits.push_back(static_cast<std::uint8_t>(c - '0'));
      }
      p.oov_words = j.value("oov_flags", std::size_t{0});
      p.unsyllabifiable = j.value("unsyllabifiable", std::size_t{0});
      const std::string id = p.sentence_id;
      if (!out.emplace(id, std::move(p)).second)
        throw Error(ErrorCode::kDuplicateId, "duplicate " + id);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace genreforge
