#include "genreforge/corpus.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numeric>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "genreforge/error.h"
#include "genreforge/text.h"

#ifndef GENREFORGE_DATA_DIR
#define GENREFORGE_DATA_DIR "data"
#endif

namespace genreforge {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::map<Cell, std::size_t> cell_counts(const DatasetManifest& manifest) {
  std::map<Cell, std::size_t> counts;
  for (const auto& r : manifest.records) ++counts[{r.language, r.genre}];
  return counts;
}

// ---------------------------------------------------------------------------
// Boilerplate

namespace {

struct LineSpan {
  std::size_t begin;  // first byte of the line
  std::size_t end;    // one past the last byte, excluding '\n'
};

std::vector<LineSpan> line_spans(std::string_view s) {
  std::vector<LineSpan> spans;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < s.size()) spans.push_back({start, s.size()});
      break;
    }
    spans.push_back({start, nl});
    start = nl + 1;
  }
  return spans;
}

const std::regex& start_marker() {
  static const std::regex re(R"(^\s*\*{3}\s*START\s+OF\b.*)",
                             std::regex::icase | std::regex::optimize);
  return re;
}

const std::regex& end_marker() {
  static const std::regex re(R"(^\s*\*{3}\s*END\s+OF\b.*)",
                             std::regex::icase | std::regex::optimize);
  return re;
}

}  // namespace

StrippedText strip_boilerplate(std::string_view raw_text) {
  const auto spans = line_spans(raw_text);
  std::optional<std::size_t> start_line, end_line;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    std::string line(raw_text.substr(spans[i].begin,
                                     spans[i].end - spans[i].begin));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!start_line) {
      if (std::regex_match(line, end_marker())) {
        if (!end_line) end_line = i;
        continue;
      }
      if (std::regex_match(line, start_marker())) {
        if (end_line) {
          throw Error(ErrorCode::kEndBeforeStart,
                      "end marker on line " + std::to_string(*end_line + 1) +
                          " precedes start marker on line " +
                          std::to_string(i + 1));
        }
        start_line = i;
      }
    } else if (std::regex_match(line, end_marker())) {
      end_line = i;
      break;
    }
  }

  if (!start_line && !end_line) return {std::string(raw_text), false};

  std::size_t body_begin = 0;
  std::size_t body_end = raw_text.size();
  if (start_line) {
    body_begin = *start_line + 1 < spans.size() ? spans[*start_line + 1].begin
                                                : raw_text.size();
  }
  if (end_line) {
    body_end = spans[*end_line].begin;
    // Drop the line break that terminates the last body line.
    if (body_end > body_begin && raw_text[body_end - 1] == '\n') --body_end;
    if (body_end > body_begin && raw_text[body_end - 1] == '\r') --body_end;
  }
  if (body_end < body_begin) body_end = body_begin;
  return {std::string(raw_text.substr(body_begin, body_end - body_begin)),
          true};
}

// ---------------------------------------------------------------------------
// Segmentation

bool Abbreviations::contains(std::string_view lowercase_word) const {
  return words.find(std::string(lowercase_word)) != words.end();
}

fs::path bundled_data_dir() {
  if (const char* env = std::getenv("GENREFORGE_DATA")) return fs::path(env);
  return fs::path(GENREFORGE_DATA_DIR);
}

Abbreviations load_abbreviations(const fs::path& dir, Language lang) {
  Abbreviations out;
  std::ifstream in(dir / (lower_code(lang) + ".txt"));
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.back() == '.') t.remove_suffix(1);
    out.words.insert(text::to_lower(t));
  }
  return out;
}

namespace {

struct CodePoint {
  char32_t cp;
  std::size_t offset;
};

std::vector<CodePoint> code_points(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t len = std::min(
        text::utf8_sequence_length(static_cast<unsigned char>(s[i])),
        s.size() - i);
    const std::u32string cp = text::decode_utf8(s.substr(i, len));
    out.push_back({cp.empty() ? char32_t(0xFFFD) : cp.front(), i});
    i += len;
  }
  return out;
}

bool is_terminal(char32_t cp) {
  return cp == '.' || cp == '!' || cp == '?' || cp == 0x2026;
}

// German quotes close with U+201C / U+2018.
bool is_closer(char32_t cp) {
  return cp == '"' || cp == '\'' || cp == ')' || cp == ']' || cp == 0x201D ||
         cp == 0x2019 || cp == 0xBB || cp == 0x201C || cp == 0x2018;
}

bool is_opener(char32_t cp) {
  return cp == '"' || cp == '\'' || cp == '(' || cp == '[' || cp == 0x201C ||
         cp == 0x2018 || cp == 0xAB || cp == 0xBF || cp == 0xA1 ||
         cp == 0x2014 || cp == 0x2013 || cp == 0x201E;
}

void emit(std::string_view body, std::size_t begin, std::size_t end,
          std::vector<Segment>& out) {
  std::string_view piece = text::trim(body.substr(begin, end - begin));
  if (!piece.empty()) out.push_back({std::string(piece), begin});
}

// True if the period at cps[i] closes an abbreviation or an initial.
bool period_after_abbreviation(const std::vector<CodePoint>& cps,
                               std::size_t i, const Abbreviations& abbrevs) {
  std::size_t k = i;
  while (k > 0 && text::is_letter(cps[k - 1].cp)) --k;
  if (k == i) return false;
  std::u32string word;
  for (std::size_t j = k; j < i; ++j) word.push_back(cps[j].cp);
  if (word.size() == 1 && text::is_upper(word[0])) return true;
  std::u32string lower;
  for (char32_t c : word) lower.push_back(text::to_lower(c));
  return abbrevs.contains(text::encode_utf8(lower));
}

std::vector<Segment> segment_prose(std::string_view body,
                                   const Abbreviations& abbrevs) {
  const auto cps = code_points(body);
  const std::size_t n = cps.size();
  std::vector<Segment> out;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t seg_start = kNone;

  for (std::size_t i = 0; i < n; ++i) {
    const char32_t cp = cps[i].cp;
    if (seg_start == kNone) {
      if (!text::is_space(cp)) seg_start = cps[i].offset;
      else continue;
    }
    if (cp == '\n') {
      std::size_t j = i + 1;
      while (j < n && cps[j].cp != '\n' && text::is_space(cps[j].cp)) ++j;
      if (j < n && cps[j].cp == '\n') {
        emit(body, seg_start, cps[i].offset, out);
        seg_start = kNone;
        i = j;
        continue;
      }
    }
    if (!is_terminal(cp)) continue;

    std::size_t j = i + 1;
    while (j < n && (is_terminal(cps[j].cp) || is_closer(cps[j].cp))) ++j;
    if (j >= n || !text::is_space(cps[j].cp)) continue;
    std::size_t k = j;
    while (k < n && text::is_space(cps[k].cp)) ++k;
    if (k >= n) continue;
    const char32_t next = cps[k].cp;
    if (!text::is_upper(next) && !is_opener(next)) continue;
    if (cp == '.' && period_after_abbreviation(cps, i, abbrevs)) continue;

    emit(body, seg_start, cps[j].offset, out);
    seg_start = kNone;
    i = j - 1;
  }
  if (seg_start != kNone) emit(body, seg_start, body.size(), out);
  return out;
}

std::vector<Segment> segment_verse(std::string_view body) {
  std::vector<Segment> out;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t pending = kNone;
  std::size_t last_end = 0;

  for (const LineSpan& span : line_spans(body)) {
    std::string_view line = body.substr(span.begin, span.end - span.begin);
    std::string_view t = text::trim(line);
    if (t.empty()) continue;
    const std::size_t begin = span.begin + (t.data() - line.data());
    const std::size_t end = begin + t.size();
    last_end = end;
    if (pending == kNone) pending = begin;
    if (text::decode_utf8(t).size() < 3) continue;
    out.push_back({std::string(body.substr(pending, end - pending)), pending});
    pending = kNone;
  }
  if (pending != kNone) {
    if (out.empty()) {
      out.push_back(
          {std::string(body.substr(pending, last_end - pending)), pending});
    } else {
      Segment& prev = out.back();
      prev.text = std::string(body.substr(prev.offset, last_end - prev.offset));
    }
  }
  return out;
}

}  // namespace

std::vector<Segment> segment_sentences(std::string_view body, Language,
                                       Genre genre,
                                       const Abbreviations& abbreviations) {
  if (genre == Genre::Poetry) return segment_verse(body);
  return segment_prose(body, abbreviations);
}

// ---------------------------------------------------------------------------
// Sampling and splitting

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t target,
                                        std::uint64_t seed) {
  if (target == 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample target must be >= 1");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (n <= target) return idx;
  Prng rng(seed);
  // Partial Fisher-Yates: the first `target` slots become the sample.
  for (std::size_t i = 0; i < target; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(target);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::size_t train_count(std::size_t n, SplitRatio ratio) {
  if (ratio.den == 0 || ratio.num > ratio.den) {
    throw Error(ErrorCode::kInvalidArgument, "split ratio must be in [0, 1]");
  }
  const std::uint64_t N = n;
  return static_cast<std::size_t>((2 * ratio.num * N + ratio.den) /
                                  (2 * ratio.den));
}

namespace {

std::uint64_t cell_seed(std::uint64_t seed, std::string_view purpose,
                        Language lang, Genre genre) {
  const std::string key = std::string(purpose) + "/" +
                          std::string(to_string(lang)) + "/" +
                          std::string(to_string(genre));
  return seeded_hash(key, seed);
}

}  // namespace

DatasetManifest split_dataset(DatasetManifest manifest) {
  std::map<Cell, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& r = manifest.records[i];
    if (r.split) {
      throw Error(ErrorCode::kAlreadySplit,
                  "record " + r.sentence_id + " already has a split");
    }
    cells[{r.language, r.genre}].push_back(i);
  }
  for (auto& [cell, members] : cells) {
    Prng rng(cell_seed(manifest.split_seed, "split", cell.first, cell.second));
    seeded_shuffle(members, rng);
    const std::size_t n_train =
        train_count(members.size(), manifest.split_ratio);
    for (std::size_t k = 0; k < members.size(); ++k) {
      manifest.records[members[k]].split =
          k < n_train ? Split::Train : Split::Test;
    }
  }
  return manifest;
}

// ---------------------------------------------------------------------------
// Tasks and statistics

std::size_t PairDataset::count(Split split) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(),
                    [&](const LabeledRecord& r) { return r.record.split == split; }));
}

PairDataset build_pair_task(const DatasetManifest& manifest, Genre genre_a,
                            Genre genre_b, Language lang) {
  const Task task = Task::make(genre_a, genre_b);
  PairDataset out{task, lang, {}};
  std::size_t n_first = 0, n_second = 0;
  for (const auto& r : manifest.records) {
    if (r.language != lang) continue;
    int label;
    if (r.genre == task.first) {
      label = 0;
      ++n_first;
    } else if (r.genre == task.second) {
      label = 1;
      ++n_second;
    } else {
      continue;
    }
    if (!r.split) {
      throw Error(ErrorCode::kInvalidArgument,
                  "record " + r.sentence_id + " has no split assignment");
    }
    out.records.push_back({r, label});
  }
  auto check = [&](std::size_t n, Genre g) {
    if (n == 0) {
      throw Error(ErrorCode::kEmptyCell,
                  "no records for (" + std::string(to_string(lang)) + ", " +
                      std::string(to_string(g)) + ")");
    }
  };
  check(n_first, task.first);
  check(n_second, task.second);
  return out;
}

namespace {

std::size_t language_index(Language lang) {
  return static_cast<std::size_t>(
      std::find(kAllLanguages.begin(), kAllLanguages.end(), lang) -
      kAllLanguages.begin());
}

std::size_t genre_index(Genre genre) {
  return static_cast<std::size_t>(
      std::find(kAllGenres.begin(), kAllGenres.end(), genre) -
      kAllGenres.begin());
}

}  // namespace

std::size_t CountTable::row_total(std::size_t lang_index) const {
  const auto& row = cells.at(lang_index);
  return std::accumulate(row.begin(), row.end(), std::size_t{0});
}

std::size_t CountTable::column_total(std::size_t g) const {
  std::size_t sum = 0;
  for (const auto& row : cells) sum += row.at(g);
  return sum;
}

std::size_t CountTable::total() const {
  std::size_t sum = 0;
  for (std::size_t l = 0; l < cells.size(); ++l) sum += row_total(l);
  return sum;
}

std::size_t CountTable::at(Language lang, Genre genre) const {
  return cells[language_index(lang)][genre_index(genre)];
}

std::string CountTable::to_tsv() const {
  std::ostringstream out;
  out << "Language";
  for (Genre g : kAllGenres) out << '\t' << to_string(g);
  out << "\tTotal\n";
  for (std::size_t l = 0; l < kAllLanguages.size(); ++l) {
    out << to_string(kAllLanguages[l]);
    for (std::size_t g = 0; g < kAllGenres.size(); ++g)
      out << '\t' << cells[l][g];
    out << '\t' << row_total(l) << '\n';
  }
  out << "Total";
  for (std::size_t g = 0; g < kAllGenres.size(); ++g)
    out << '\t' << column_total(g);
  out << '\t' << total() << '\n';
  return out.str();
}

CountTable dataset_stats(const DatasetManifest& manifest) {
  CountTable table;
  for (const auto& r : manifest.records)
    ++table.cells[language_index(r.language)][genre_index(r.genre)];
  return table;
}

// ---------------------------------------------------------------------------
// Ingest

std::string make_sentence_id(std::string_view doc_id, std::size_t offset) {
  const std::string key = std::string(doc_id) + ":" + std::to_string(offset);
  return to_hex(fnv1a64(key));
}

std::vector<SentenceRecord> document_sentences(const RawDocument& doc,
                                               const Abbreviations& abbrevs) {
  const StrippedText stripped = strip_boilerplate(doc.raw_text);
  std::vector<SentenceRecord> out;
  for (auto& seg :
       segment_sentences(stripped.body, doc.language, doc.genre, abbrevs)) {
    out.push_back({make_sentence_id(doc.doc_id, seg.offset),
                   std::move(seg.text), doc.language, doc.genre, std::nullopt,
                   seg.offset});
  }
  return out;
}

namespace {

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (directories ? entry.is_directory() : entry.is_regular_file())
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

IngestResult ingest_corpus(const fs::path& corpus_dir,
                           const IngestOptions& options) {
  if (!fs::is_directory(corpus_dir)) {
    throw Error(ErrorCode::kIoFailure,
                "corpus directory not found: " + corpus_dir.string());
  }
  const fs::path abbrev_dir = options.abbreviations_dir.empty()
                                  ? bundled_data_dir() / "abbreviations"
                                  : options.abbreviations_dir;
  IngestResult result;
  result.manifest.split_seed = options.seed;

  for (const fs::path& lang_dir : sorted_entries(corpus_dir, true)) {
    const Language lang = language_or_throw(lang_dir.filename().string());
    const Abbreviations abbrevs = load_abbreviations(abbrev_dir, lang);
    for (const fs::path& genre_dir : sorted_entries(lang_dir, true)) {
      const Genre genre = genre_or_throw(genre_dir.filename().string());
      std::vector<SentenceRecord> pool;
      for (const fs::path& file : sorted_entries(genre_dir, false)) {
        if (file.extension() != ".txt") continue;
        RawDocument doc{std::string(to_string(lang)) + "/" +
                            std::string(to_string(genre)) + "/" +
                            file.stem().string(),
                        lang, genre, read_file(file), file.string()};
        if (text::trim(doc.raw_text).empty()) {
          throw Error(ErrorCode::kInvalidArgument,
                      "empty document " + doc.source_path);
        }
        if (!strip_boilerplate(doc.raw_text).markers_found)
          result.unmarked_documents.push_back(doc.source_path);
        auto sentences = document_sentences(doc, abbrevs);
        pool.insert(pool.end(), std::make_move_iterator(sentences.begin()),
                    std::make_move_iterator(sentences.end()));
      }
      auto sampled = sample_sentences(
          pool, options.target_per_genre,
          cell_seed(options.seed, "sample", lang, genre));
      result.manifest.records.insert(result.manifest.records.end(),
                                     std::make_move_iterator(sampled.begin()),
                                     std::make_move_iterator(sampled.end()));
    }
  }
  result.manifest = split_dataset(std::move(result.manifest));
  return result;
}

std::string manifest_record_line(const SentenceRecord& r) {
  ordered_json j;
  j["sentence_id"] = r.sentence_id;
  j["text"] = r.text;
  j["language"] = std::string(to_string(r.language));
  j["genre"] = std::string(to_string(r.genre));
  j["split"] = r.split ? ordered_json(std::string(to_string(*r.split)))
                       : ordered_json(nullptr);
  j["char_offset"] = r.char_offset;
  return j.dump();
}

fs::path manifest_meta_path(const fs::path& jsonl_path) {
  fs::path meta = jsonl_path;
  meta.replace_extension(".meta.json");
  return meta;
}

void write_manifest(const DatasetManifest& manifest,
                    const fs::path& jsonl_path) {
  std::ofstream out(jsonl_path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIoFailure, "cannot write " + jsonl_path.string());
  }
  for (const auto& r : manifest.records) out << manifest_record_line(r) << '\n';

  ordered_json meta;
  meta["prng"] = kPrngName;
  meta["split_seed"] = manifest.split_seed;
  meta["split_ratio"] = std::to_string(manifest.split_ratio.num) + "/" +
                        std::to_string(manifest.split_ratio.den);
  meta["rounding"] = "half-up";
  meta["offset_unit"] = "utf8-byte";
  ordered_json counts = ordered_json::object();
  for (const auto& [cell, n] : cell_counts(manifest))
    counts[std::string(to_string(cell.first)) + "/" +
           std::string(to_string(cell.second))] = n;
  meta["counts"] = counts;
  std::ofstream mout(manifest_meta_path(jsonl_path), std::ios::binary);
  mout << meta.dump(2) << '\n';
  if (!out || !mout) {
    throw Error(ErrorCode::kIoFailure, "write failed: " + jsonl_path.string());
  }
}

DatasetManifest read_manifest(const fs::path& jsonl_path) {
  std::ifstream in(jsonl_path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoFailure, "cannot read " + jsonl_path.string());
  }
  DatasetManifest manifest;
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      SentenceRecord r;
      r.sentence_id = j.at("sentence_id").get<std::string>();
      r.text = j.at("text").get<std::string>();
      r.language = language_or_throw(j.at("language").get<std::string>());
      r.genre = genre_or_throw(j.at("genre").get<std::string>());
      if (j.contains("split") && !j.at("split").is_null()) {
        const auto s = parse_split(j.at("split").get<std::string>());
        if (!s) throw Error(ErrorCode::kParseError, "bad split value");
        r.split = *s;
      }
      r.char_offset = j.at("char_offset").get<std::size_t>();
      if (!seen.insert(r.sentence_id).second) {
        throw Error(ErrorCode::kDuplicateId, "duplicate " + r.sentence_id);
      }
      manifest.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, jsonl_path.string() + ":" +
                                              std::to_string(lineno) + ": " +
                                              e.what());
    }
  }
  std::ifstream meta_in(manifest_meta_path(jsonl_path));
  if (meta_in) {
    const auto meta = nlohmann::json::parse(meta_in, nullptr, false);
    if (!meta.is_discarded() && meta.contains("split_seed"))
      manifest.split_seed = meta["split_seed"].get<std::uint64_t>();
  }
  return manifest;
}

}  // namespace genreforge
