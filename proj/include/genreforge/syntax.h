#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "genreforge/corpus.h"

namespace genreforge {

struct ParsedToken {
  int index = 0;  // 1-based
  std::string form;
  int head = 0;   // 0 = root

  friend bool operator==(const ParsedToken&, const ParsedToken&) = default;
};

struct ParsedSentence {
  std::string sentence_id;
  std::vector<ParsedToken> tokens;

  friend bool operator==(const ParsedSentence&, const ParsedSentence&) = default;
};

// Dependency trees are used for depth; the value is comparable in shape to a
// constituency depth and is labeled as such in sidecar metadata.
struct SyntaxFeature {
  int depth = 1;
  int length = 1;  // token count
  double ratio = 1.0;

  friend bool operator==(const SyntaxFeature&, const SyntaxFeature&) = default;
};

// Reads CoNLL-U text. Multiword ranges ("3-4") and empty nodes ("5.1") are
// skipped. Sentence ids come from "# sent_id = ..." or "s<position>".
// Throws kMalformedLine, kBadIndex, kCyclicHeads.
std::vector<ParsedSentence> parse_conllu(std::string_view text);

// Writes the retained columns (ID, FORM, HEAD); others become "_".
std::string serialize_conllu(const std::vector<ParsedSentence>& sentences);

// Checks the forest invariants; throws as parse_conllu does.
void validate_parsed(const ParsedSentence& parsed);

// 1 + the longest token-to-root hop count.
int tree_depth(const ParsedSentence& parsed);

double depth_ratio(int depth, int length);

SyntaxFeature syntax_feature(const ParsedSentence& parsed);

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
};

// x = ln(ratio), y = ln(depth + 1).
PlotPoint log_plot_coords(const SyntaxFeature& feature);

struct SyntaxExtraction {
  std::map<std::string, SyntaxFeature> features;  // by sentence_id
  std::vector<std::string> missing;               // manifest ids w/o parse
};

// Parses every *.conllu under `parses_dir` and keeps manifest sentences.
SyntaxExtraction extract_syntax(const std::filesystem::path& parses_dir,
                                const DatasetManifest& manifest);

// syntax.jsonl: {sentence_id, depth, length, ratio}
void write_syntax_sidecar(const std::map<std::string, SyntaxFeature>& features,
                          const std::filesystem::path& path);
std::map<std::string, SyntaxFeature> read_syntax_sidecar(
    const std::filesystem::path& path);

}  // namespace genreforge
