#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "genreforge/error.h"
#include "genreforge/hashing.h"
#include "genreforge/metaphor.h"

using namespace genreforge;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(std::string_view contents) {
  try {
    parse_token_annotations(contents);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

MetaphorFeature feat(int count) { return {"", count, MetaphorSource::Annotation}; }

}  // namespace

TEST_CASE("load_token_annotations examples") {
  const auto two = parse_token_annotations(
      "{\"sentence_id\":\"a\",\"labels\":[0,1,0]}\n"
      "{\"sentence_id\":\"b\",\"labels\":[1,1]}\n");
  REQUIRE(two.size() == 2);
  CHECK(metaphor_count(two.at("a")) == 1);
  CHECK(metaphor_count(two.at("b")) == 2);

  CHECK(code_of("{\"sentence_id\":\"a\",\"labels\":[0]}\n"
                "{\"sentence_id\":\"a\",\"labels\":[1]}\n") == ErrorCode::kDuplicateId);
  CHECK(code_of("{\"sentence_id\":\"a\",\"labels\":[0,2]}\n") == ErrorCode::kNonBinaryLabel);
  CHECK(code_of("{not json\n") == ErrorCode::kParseError);
}

TEST_CASE("annotation fixture round trips") {
  const auto path = fs::path(GENREFORGE_FIXTURES) / "mini/metaphor_annotations.jsonl";
  const auto ann = load_token_annotations(path);
  CHECK(ann.size() == 20);
  std::string rewritten;
  for (const auto& [id, a] : ann) rewritten += annotation_line(a) + "\n";
  const auto back = parse_token_annotations(rewritten);
  REQUIRE(back.size() == ann.size());
  for (const auto& [id, a] : ann) {
    CHECK(back.at(id).labels == a.labels);
    CHECK(back.at(id).sentence_id == id);
  }
}

TEST_CASE("metaphor_count examples") {
  CHECK(metaphor_count({"x", {}}) == 0);
  CHECK(metaphor_count({"x", {0, 0, 0}}) == 0);
  CHECK(metaphor_count({"x", {1, 0, 1, 1}}) == 3);
}

TEST_CASE("metaphor_count is bounded and matches a brute-force sum") {
  Prng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    TokenAnnotation a{"x", {}};
    const auto n = uniform_below(rng, 51);
    int expect = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      a.labels.push_back(static_cast<std::uint8_t>(uniform_below(rng, 2)));
      expect += a.labels.back();
    }
    const int c = metaphor_count(a);
    CHECK(c == expect);
    CHECK(c >= 0);
    CHECK(c <= static_cast<int>(n));
  }
}

TEST_CASE("proxy_count uses normalized forms") {
  MetaphorLexicon lex;
  lex.lemmas = {"stone"};
  CHECK(proxy_count("heart of stone", lex) == 1);
  CHECK(proxy_count("Stone, STONE and stones", lex) == 2);
  CHECK(proxy_count("heart of stone", MetaphorLexicon{}) == 0);
}

TEST_CASE("genre_average_metaphors examples") {
  auto avg = genre_average_metaphors(
      {{feat(3), Genre::Poetry}, {feat(2), Genre::Poetry}, {feat(1), Genre::Novel},
       {feat(2), Genre::Novel}});
  CHECK(avg.at(Genre::Poetry).mean == 2.5);
  CHECK(avg.at(Genre::Novel).mean == 1.5);
  CHECK(format_two_decimals(avg.at(Genre::Poetry).mean) == "2.50");
  CHECK(format_two_decimals(avg.at(Genre::Novel).mean) == "1.50");

  auto third = genre_average_metaphors(
      {{feat(1), Genre::Drama}, {feat(1), Genre::Drama}, {feat(2), Genre::Drama}});
  CHECK(format_two_decimals(third.at(Genre::Drama).mean) == "1.33");

  auto zeros = genre_average_metaphors({{feat(0), Genre::Drama}, {feat(0), Genre::Drama}});
  CHECK(zeros.at(Genre::Drama).mean == 0.0);
  CHECK(zeros.count(Genre::Novel) == 0);
}

TEST_CASE("adding k to every count shifts each mean by k") {
  Prng rng(23);
  std::vector<std::pair<MetaphorFeature, Genre>> base;
  for (int i = 0; i < 90; ++i)
    base.push_back({feat(static_cast<int>(uniform_below(rng, 6))),
                    kAllGenres[uniform_below(rng, 3)]});
  const auto before = genre_average_metaphors(base);
  for (int k : {1, 3, 7}) {
    auto shifted = base;
    for (auto& [f, g] : shifted) f.count += k;
    const auto after = genre_average_metaphors(shifted);
    for (const auto& [g, a] : before)
      CHECK(after.at(g).mean == doctest::Approx(a.mean + k).epsilon(1e-12));
  }
}

TEST_CASE("annotations and an equivalent proxy give the same features") {
  DatasetManifest m;
  m.records.push_back({"a", "heart of stone", Language::EN, Genre::Poetry, Split::Train, 0});
  m.records.push_back({"b", "plain words here", Language::EN, Genre::Novel, Split::Test, 0});
  AnnotationMap ann;
  ann["a"] = {"a", {0, 0, 1}};
  ann["b"] = {"b", {0, 0, 0}};
  MetaphorLexicon lex;
  lex.lemmas = {"stone"};
  const auto from_ann = extract_metaphor(m, &ann, nullptr);
  const auto from_lex = extract_metaphor(m, nullptr, &lex);
  REQUIRE(from_ann.features.size() == 2);
  REQUIRE(from_lex.features.size() == 2);
  for (const auto& id : {"a", "b"}) {
    CHECK(from_ann.features.at(id).count == from_lex.features.at(id).count);
    CHECK(from_ann.features.at(id).source == MetaphorSource::Annotation);
    CHECK(from_lex.features.at(id).source == MetaphorSource::LexiconProxy);
  }
  const auto none = extract_metaphor(m, nullptr, nullptr);
  CHECK(none.missing.size() == 2);
}

TEST_CASE("metaphor sidecar round trip") {
  const fs::path dir = fs::temp_directory_path() / "gf_metaphor_test";
  fs::create_directories(dir);
  std::map<std::string, MetaphorFeature> fs_;
  fs_["a"] = {"a", 2, MetaphorSource::Annotation};
  fs_["b"] = {"b", 0, MetaphorSource::LexiconProxy};
  write_metaphor_sidecar(fs_, dir / "m.jsonl");
  CHECK(read_metaphor_sidecar(dir / "m.jsonl") == fs_);
  fs::remove_all(dir);
}
