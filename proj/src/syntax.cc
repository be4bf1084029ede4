#include "genreforge/syntax.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "genreforge/error.h"
#include "genreforge/text.h"

namespace genreforge {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

bool parse_int(std::string_view s, int& out) {
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

}  // namespace

void validate_parsed(const ParsedSentence& parsed) {
  const int n = static_cast<int>(parsed.tokens.size());
  for (int i = 0; i < n; ++i) {
    const ParsedToken& tok = parsed.tokens[i];
    if (tok.index != i + 1) {
      throw Error(ErrorCode::kBadIndex,
                  parsed.sentence_id + ": expected token " +
                      std::to_string(i + 1) + ", found " +
                      std::to_string(tok.index));
    }
    if (tok.head < 0 || tok.head > n) {
      throw Error(ErrorCode::kBadIndex,
                  parsed.sentence_id + ": head " + std::to_string(tok.head) +
                      " of token " + std::to_string(tok.index) +
                      " outside [0, " + std::to_string(n) + "]");
    }
    if (tok.head == tok.index) {
      throw Error(ErrorCode::kCyclicHeads,
                  parsed.sentence_id + ": token " + std::to_string(tok.index) +
                      " heads itself");
    }
  }
  // Every walk towards the root must terminate within n steps.
  std::vector<int> state(n + 1, 0);  // 0 unvisited, 1 on stack, 2 done
  for (int start = 1; start <= n; ++start) {
    std::vector<int> path;
    int cur = start;
    while (cur != 0 && state[cur] == 0) {
      state[cur] = 1;
      path.push_back(cur);
      cur = parsed.tokens[cur - 1].head;
    }
    if (cur != 0 && state[cur] == 1) {
      throw Error(ErrorCode::kCyclicHeads,
                  parsed.sentence_id + ": head cycle through token " +
                      std::to_string(cur));
    }
    for (int t : path) state[t] = 2;
  }
}

std::vector<ParsedSentence> parse_conllu(std::string_view text) {
  std::vector<ParsedSentence> out;
  ParsedSentence current;
  bool in_sentence = false;
  std::size_t line_no = 0;

  auto finish = [&] {
    if (!in_sentence) return;
    if (current.sentence_id.empty())
      current.sentence_id = "s" + std::to_string(out.size() + 1);
    if (!current.tokens.empty()) {
      validate_parsed(current);
      out.push_back(std::move(current));
    }
    current = ParsedSentence{};
    in_sentence = false;
  };

  for (const std::string& raw : text::split_lines(text)) {
    ++line_no;
    std::string_view line = raw;
    if (text::trim(line).empty()) {
      finish();
      continue;
    }
    in_sentence = true;
    if (line.front() == '#') {
      std::string_view body = text::trim(line.substr(1));
      if (body.rfind("sent_id", 0) == 0) {
        body.remove_prefix(7);
        body = text::trim(body);
        if (!body.empty() && body.front() == '=') body.remove_prefix(1);
        current.sentence_id = std::string(text::trim(body));
      }
      continue;
    }
    const auto fields = split_tabs(line);
    if (fields.size() != 10) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(line_no) + ": expected 10 columns, got " +
                      std::to_string(fields.size()));
    }
    const std::string_view id = fields[0];
    if (id.find('-') != std::string_view::npos ||
        id.find('.') != std::string_view::npos) {
      continue;
    }
    ParsedToken tok;
    tok.form = std::string(fields[1]);
    if (!parse_int(id, tok.index)) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(line_no) + ": bad ID '" +
                      std::string(id) + "'");
    }
    if (!parse_int(fields[6], tok.head)) {
      throw Error(ErrorCode::kBadIndex,
                  "line " + std::to_string(line_no) + ": bad HEAD '" +
                      std::string(fields[6]) + "'");
    }
    current.tokens.push_back(std::move(tok));
  }
  finish();
  return out;
}

std::string serialize_conllu(const std::vector<ParsedSentence>& sentences) {
  std::ostringstream out;
  for (const auto& s : sentences) {
    out << "# sent_id = " << s.sentence_id << '\n';
    for (const auto& t : s.tokens) {
      out << t.index << '\t' << t.form << "\t_\t_\t_\t_\t" << t.head << '\t'
          << (t.head == 0 ? "root" : "dep") << "\t_\t_\n";
    }
    out << '\n';
  }
  return out.str();
}

int tree_depth(const ParsedSentence& parsed) {
  const int n = static_cast<int>(parsed.tokens.size());
  if (n == 0) return 0;
  std::vector<int> hops(n + 1, -1);
  int deepest = 0;
  for (int start = 1; start <= n; ++start) {
    std::vector<int> path;
    int cur = start;
    while (cur != 0 && hops[cur] < 0) {
      path.push_back(cur);
      cur = parsed.tokens[cur - 1].head;
    }
    int base = cur == 0 ? -1 : hops[cur];
    for (auto it = path.rbegin(); it != path.rend(); ++it) hops[*it] = ++base;
    deepest = std::max(deepest, hops[start]);
  }
  return deepest + 1;
}

double depth_ratio(int depth, int length) {
  if (length <= 0) {
    throw Error(ErrorCode::kZeroLength, "sentence length must be positive");
  }
  if (depth < 1) {
    throw Error(ErrorCode::kInvalidArgument, "depth must be >= 1");
  }
  return static_cast<double>(depth) / static_cast<double>(length);
}

SyntaxFeature syntax_feature(const ParsedSentence& parsed) {
  const int length = static_cast<int>(parsed.tokens.size());
  const int depth = tree_depth(parsed);
  return {depth, length, depth_ratio(depth, length)};
}

PlotPoint log_plot_coords(const SyntaxFeature& feature) {
  return {std::log(feature.ratio), std::log(feature.depth + 1.0)};
}

SyntaxExtraction extract_syntax(const fs::path& parses_dir,
                                const DatasetManifest& manifest) {
  if (!fs::is_directory(parses_dir)) {
    throw Error(ErrorCode::kIoFailure,
                "parse directory not found: " + parses_dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(parses_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".conllu")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::map<std::string, SyntaxFeature> all;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    const std::string data((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    for (const auto& parsed : parse_conllu(data)) {
      if (!all.emplace(parsed.sentence_id, syntax_feature(parsed)).second) {
        throw Error(ErrorCode::kDuplicateId,
                    "sentence " + parsed.sentence_id + " parsed twice (" +
                        file.string() + ")");
      }
    }
  }

  SyntaxExtraction out;
  for (const auto& r : manifest.records) {
    auto it = all.find(r.sentence_id);
    if (it == all.end()) out.missing.push_back(r.sentence_id);
    else out.features.emplace(it->first, it->second);
  }
  return out;
}

void write_syntax_sidecar(const std::map<std::string, SyntaxFeature>& features,
                          const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  for (const auto& [id, f] : features) {
    nlohmann::ordered_json j;
    j["sentence_id"] = id;
    j["depth"] = f.depth;
    j["length"] = f.length;
    j["ratio"] = f.ratio;
    out << j.dump() << '\n';
  }
}

std::map<std::string, SyntaxFeature> read_syntax_sidecar(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  std::map<std::string, SyntaxFeature> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      SyntaxFeature f{j.at("depth").get<int>(), j.at("length").get<int>(),
                      j.at("ratio").get<double>()};
      const auto id = j.at("sentence_id").get<std::string>();
      if (!out.emplace(id, f).second)
        throw Error(ErrorCode::kDuplicateId, "duplicate " + id);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace genreforge
