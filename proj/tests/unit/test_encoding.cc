#include <doctest.h>

#include <cmath>

#include "genreforge/encoding.h"
#include "genreforge/error.h"
#include "genreforge/hashing.h"

using namespace genreforge;

namespace {

EncoderConfig small(int lo, int hi, std::size_t dim = 64) {
  EncoderConfig c;
  c.ngram_min = lo;
  c.ngram_max = hi;
  c.dim = dim;
  c.hash_seed = 9;
  return c;
}

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("empty sentence encodes to zeros") {
  const auto v = encode_sentence("", small(2, 4));
  CHECK(v.size() == 64);
  for (double x : v) CHECK(x == 0.0);
  for (double x : encode_sentence("a", small(2, 4))) CHECK(x == 0.0);
}

TEST_CASE("encoding is deterministic and lowercased") {
  const auto c = small(2, 4, 256);
  CHECK(encode_sentence("The cat sat.", c) == encode_sentence("The cat sat.", c));
  CHECK(encode_sentence("The  cat\tsat.", c) == encode_sentence("the cat sat.", c));
  EncoderConfig other = c;
  other.hash_seed = 10;
  CHECK(encode_sentence("The cat sat.", c) != encode_sentence("The cat sat.", other));
}

TEST_CASE("abc with bigrams matches a hand-built vector") {
  auto c = small(2, 2);
  c.normalize = false;
  std::vector<double> expect(64, 0.0);
  for (const char* g : {"ab", "bc"}) {
    const std::size_t b = seeded_hash(g, 9) & 63;
    const double s = (seeded_hash(g, mix64(9 ^ 0x5167a3e1ULL)) & 1) ? -1.0 : 1.0;
    expect[b] += s;
  }
  CHECK(encode_sentence("abc", c) == expect);
  c.normalize = true;
  CHECK(norm(encode_sentence("abc", c)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("non-empty sentences have unit norm") {
  const auto c = small(1, 5, 1024);
  for (const char* s : {"ab", "Ça été déjà vu", "Shall I compare thee to a summer's day?"})
    CHECK(norm(encode_sentence(s, c)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("encoder config validation") {
  CHECK(code_of([] { small(3, 2).validate(); }) == ErrorCode::kInvalidArgument);
  CHECK_THROWS_AS(small(2, 4, 100).validate(), Error);
  CHECK_THROWS_AS(small(2, 4, 32).validate(), Error);
  CHECK_NOTHROW(small(1, 6, 64).validate());
}

TEST_CASE("feature spec parsing and labels") {
  CHECK(FeatureSpec::parse("").empty());
  CHECK(FeatureSpec::parse("none").label() == "baseline");
  CHECK(FeatureSpec::parse("metre,syntax").label() == "syntax+metre");
  CHECK(FeatureSpec::parse("meter").metre);
  CHECK_THROWS_AS(FeatureSpec::parse("rhyme"), Error);
}

TEST_CASE("concat_features layout and z-scores") {
  const std::vector<double> s{0.5, -0.5};
  LinguisticFeatures f;
  f.syntax = SyntaxFeature{5, 13, 5.0 / 13.0};
  f.metaphor = 2;
  f.metre = StressMarks{1, 0, 1};
  FeatureSpec spec = FeatureSpec::parse("syntax,metaphor,metre");
  spec.pad_len = 4;
  FeatureStats stats;
  stats.depth = Moments{5.0, 2.0};
  stats.ratio = Moments{5.0 / 13.0, 0.1};
  stats.metaphor = Moments{1.0, 0.5};
  const auto in = concat_features(s, f, spec, stats);
  REQUIRE(in.values.size() == 2 + 2 + 1 + 4);
  CHECK(in.layout.segments.size() == 4);
  CHECK(in.layout.segments[1] == LayoutSegment{"syntax", 2, 2});
  CHECK(in.layout.segments[2] == LayoutSegment{"metaphor", 4, 1});
  CHECK(in.layout.segments[3] == LayoutSegment{"metre", 5, 4});
  CHECK(in.values[2] == 0.0);
  CHECK(in.values[3] == 0.0);
  CHECK(in.values[4] == 2.0);
  CHECK(std::vector<double>(in.values.begin() + 5, in.values.end()) ==
        std::vector<double>{1, 0, 1, 0});
}

TEST_CASE("zero std is floored") {
  CHECK(z_score(3.0, Moments{3.0, 0.0}) == 0.0);
  CHECK(z_score(3.0 + 1e-6, Moments{3.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("missing features and stats are reported") {
  const std::vector<double> s{1.0};
  LinguisticFeatures none;
  const FeatureSpec syn = FeatureSpec::parse("syntax");
  CHECK(code_of([&] { concat_features(s, none, syn, FeatureStats{}); }) ==
        ErrorCode::kMissingFeature);
  LinguisticFeatures f;
  f.syntax = SyntaxFeature{};
  CHECK(code_of([&] { concat_features(s, f, syn, FeatureStats{}); }) ==
        ErrorCode::kMissingStats);
  FeatureSpec met = FeatureSpec::parse("metre");
  met.pad_len = 3;
  CHECK(code_of([&] { concat_features(s, f, met, FeatureStats{}); }) ==
        ErrorCode::kMissingFeature);
}

TEST_CASE("baseline input is bit-identical to the sentence vector") {
  const auto v = encode_sentence("A rose is a rose.", small(2, 4, 128));
  const auto in = concat_features(v, LinguisticFeatures{}, FeatureSpec{}, FeatureStats{});
  CHECK(in.values == v);
  CHECK(in.layout.total() == 128);
}

TEST_CASE("stats come from the given train features only") {
  std::vector<LinguisticFeatures> train(4);
  for (int i = 0; i < 4; ++i) {
    train[i].syntax = SyntaxFeature{i + 1, 10, (i + 1) / 10.0};
    train[i].metaphor = i;
  }
  const auto stats = compute_feature_stats(train, FeatureSpec::parse("syntax,metaphor"));
  CHECK(stats.depth->mean == 2.5);
  CHECK(stats.depth->std == doctest::Approx(std::sqrt(1.25)).epsilon(1e-12));
  CHECK(stats.metaphor->mean == 1.5);

  // A far-out test value changes nothing because it never enters the stats.
  LinguisticFeatures test;
  test.syntax = SyntaxFeature{100, 100, 1.0};
  test.metaphor = 50;
  const auto spec = FeatureSpec::parse("syntax,metaphor");
  const auto again = compute_feature_stats(train, spec);
  CHECK(again == stats);
  const auto in = concat_features(std::vector<double>{0.0}, test, spec, stats);
  CHECK(in.values[1] == doctest::Approx((100 - 2.5) / std::sqrt(1.25)));

  train[0].syntax.reset();
  CHECK(code_of([&] { compute_feature_stats(train, spec); }) == ErrorCode::kMissingFeature);
}
