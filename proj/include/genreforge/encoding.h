#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genreforge/metaphor.h"
#include "genreforge/metre.h"
#include "genreforge/syntax.h"

namespace genreforge {

// Hashed character n-gram sentence encoder configuration.
struct EncoderConfig {
  int ngram_min = 2;
  int ngram_max = 4;
  std::size_t dim = 4096;  // power of two
  std::uint64_t hash_seed = 0;
  bool normalize = true;

  // Throws kInvalidArgument unless 1 <= min <= max <= 6 and dim is a power
  // of two >= 64.
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Bucket index and sign of one n-gram; the sign uses an independent seed.
std::size_t ngram_bucket(std::string_view ngram, const EncoderConfig& config);
double ngram_sign(std::string_view ngram, const EncoderConfig& config);

// Lowercased, whitespace-collapsed character n-gram counts, signed-hashed
// into `dim` buckets and optionally L2-normalized. Empty text -> zeros.
std::vector<double> encode_sentence(std::string_view text,
                                    const EncoderConfig& config);

enum class FeatureKind { Syntax, Metaphor, Metre };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view s);

// Kinds in block order: syntax, metaphor, metre.
struct FeatureSpec {
  bool syntax = false;
  bool metaphor = false;
  bool metre = false;
  std::size_t pad_len = 0;  // metre block width; 0 = derive from Train

  bool empty() const { return !syntax && !metaphor && !metre; }
  std::vector<FeatureKind> kinds() const;
  // "baseline", "syntax", "syntax+metre"
  std::string label() const;
  // Parses "syntax,metre"; "" or "none" -> no features.
  static FeatureSpec parse(std::string_view list);

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

struct LinguisticFeatures {
  std::optional<SyntaxFeature> syntax;
  std::optional<int> metaphor;
  std::optional<StressMarks> metre;
};

struct Moments {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation

  friend bool operator==(const Moments&, const Moments&) = default;
};

// Scalar feature moments, computed from Train records only.
struct FeatureStats {
  std::optional<Moments> depth;
  std::optional<Moments> ratio;
  std::optional<Moments> metaphor;

  friend bool operator==(const FeatureStats&, const FeatureStats&) = default;
};

// Moments of the requested scalar kinds over `train_features`.
// Throws kMissingFeature if any entry lacks a requested kind.
FeatureStats compute_feature_stats(
    std::span<const LinguisticFeatures> train_features, const FeatureSpec& spec);

inline constexpr double kStdFloor = 1e-6;
double z_score(double x, const Moments& m);

struct LayoutSegment {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;

  friend bool operator==(const LayoutSegment&, const LayoutSegment&) = default;
};

struct Layout {
  std::vector<LayoutSegment> segments;

  std::size_t total() const;
  friend bool operator==(const Layout&, const Layout&) = default;
};

// sentence[dim], then syntax[2], metaphor[1], metre[pad_len] as requested.
Layout make_layout(std::size_t dim, const FeatureSpec& spec);

struct InputVector {
  std::vector<double> values;
  Layout layout;
};

// I = S (+) F. Throws kMissingFeature / kMissingStats.
InputVector concat_features(std::span<const double> sentence_vec,
                            const LinguisticFeatures& features,
                            const FeatureSpec& spec, const FeatureStats& stats);

// Joined feature sidecars, looked up by sentence id.
struct FeatureStore {
  std::map<std::string, SyntaxFeature> syntax;
  std::map<std::string, MetaphorFeature> metaphor;
  std::map<std::string, MetrePattern> metre;

  LinguisticFeatures lookup(const std::string& sentence_id) const;
};

}  // namespace genreforge
