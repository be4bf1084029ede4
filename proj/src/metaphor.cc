#include "genreforge/metaphor.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>

#include <nlohmann/json.hpp>

#include "genreforge/error.h"
#include "genreforge/text.h"

namespace genreforge {

namespace fs = std::filesystem;

std::string_view to_string(MetaphorSource source) {
  return source == MetaphorSource::Annotation ? "Annotation" : "LexiconProxy";
}

AnnotationMap parse_token_annotations(std::string_view contents) {
  AnnotationMap out;
  std::size_t line_no = 0;
  for (const std::string& line : text::split_lines(contents)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("sentence_id") || !j.contains("labels") ||
        !j["sentence_id"].is_string() || !j["labels"].is_array()) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) +
                      ": expected {sentence_id, labels}");
    }
    TokenAnnotation a;
    a.sentence_id = j["sentence_id"].get<std::string>();
    for (const auto& v : j["labels"]) {
      if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) {
        throw Error(ErrorCode::kNonBinaryLabel,
                    "line " + std::to_string(line_no) + ": label " + v.dump() +
                        " for " + a.sentence_id);
      }
      a.labels.push_back(static_cast<std::uint8_t>(v.get<int>()));
    }
    const std::string id = a.sentence_id;
    if (!out.emplace(id, std::move(a)).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "line " + std::to_string(line_no) + ": " + id);
    }
  }
  return out;
}

AnnotationMap load_token_annotations(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return parse_token_annotations(data);
}

std::string annotation_line(const TokenAnnotation& annotation) {
  nlohmann::ordered_json j;
  j["sentence_id"] = annotation.sentence_id;
  auto labels = nlohmann::ordered_json::array();
  for (auto l : annotation.labels) labels.push_back(static_cast<int>(l));
  j["labels"] = labels;
  return j.dump();
}

int metaphor_count(const TokenAnnotation& annotation) {
  return std::accumulate(annotation.labels.begin(), annotation.labels.end(), 0);
}

MetaphorLexicon load_metaphor_lexicon(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  MetaphorLexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    lex.lemmas.insert(text::normalize_word(t));
  }
  return lex;
}

int proxy_count(std::string_view sentence_text, const MetaphorLexicon& lexicon) {
  if (lexicon.lemmas.empty()) return 0;
  int count = 0;
  for (const auto& token : text::word_tokens(sentence_text)) {
    if (lexicon.lemmas.count(text::normalize_word(token))) ++count;
  }
  return count;
}

std::map<Genre, GenreAverage> genre_average_metaphors(
    const std::vector<std::pair<MetaphorFeature, Genre>>& features) {
  std::map<Genre, long long> sums;
  std::map<Genre, GenreAverage> out;
  for (const auto& [f, genre] : features) {
    sums[genre] += f.count;
    ++out[genre].count;
  }
  for (auto& [genre, avg] : out)
    avg.mean = static_cast<double>(sums[genre]) / static_cast<double>(avg.count);
  return out;
}

std::string format_two_decimals(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

MetaphorExtraction extract_metaphor(const DatasetManifest& manifest,
                                    const AnnotationMap* annotations,
                                    const MetaphorLexicon* lexicon) {
  MetaphorExtraction out;
  for (const auto& r : manifest.records) {
    if (annotations) {
      auto it = annotations->find(r.sentence_id);
      if (it != annotations->end()) {
        out.features.emplace(
            r.sentence_id, MetaphorFeature{r.sentence_id, metaphor_count(it->second),
                                           MetaphorSource::Annotation});
        continue;
      }
    }
    if (lexicon) {
      out.features.emplace(r.sentence_id,
                           MetaphorFeature{r.sentence_id, proxy_count(r.text, *lexicon),
                                           MetaphorSource::LexiconProxy});
      continue;
    }
    out.missing.push_back(r.sentence_id);
  }
  return out;
}

void write_metaphor_sidecar(const std::map<std::string, MetaphorFeature>& features,
                            const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  for (const auto& [id, f] : features) {
    nlohmann::ordered_json j;
    j["sentence_id"] = id;
    j["count"] = f.count;
    j["source"] = std::string(to_string(f.source));
    out << j.dump() << '\n';
  }
}

std::map<std::string, MetaphorFeature> read_metaphor_sidecar(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  std::map<std::string, MetaphorFeature> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      MetaphorFeature f;
      f.sentence_id = j.at("sentence_id").get<std::string>();
      f.count = j.at("count").get<int>();
      const auto src = j.at("source").get<std::string>();
      if (src == "Annotation") f.source = MetaphorSource::Annotation;
      else if (src == "LexiconProxy") f.source = MetaphorSource::LexiconProxy;
      else throw Error(ErrorCode::kParseError, "bad source '" + src + "'");
      const std::string id = f.sentence_id;
      if (!out.emplace(id, std::move(f)).second)
        throw Error(ErrorCode::kDuplicateId, "duplicate " + id);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace genreforge
