#include "genreforge/encoding.h"

#include <algorithm>
#include <cmath>

#include "genreforge/error.h"
#include "genreforge/hashing.h"
#include "genreforge/text.h"

namespace genreforge {

void EncoderConfig::validate() const {
  if (ngram_min < 1 || ngram_min > ngram_max || ngram_max > 6) {
    throw Error(ErrorCode::kInvalidArgument,
                "ngram_range must satisfy 1 <= min <= max <= 6");
  }
  if (dim < 64 || (dim & (dim - 1)) != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "dim must be a power of two >= 64, got " + std::to_string(dim));
  }
}

std::size_t ngram_bucket(std::string_view ngram, const EncoderConfig& config) {
  return static_cast<std::size_t>(seeded_hash(ngram, config.hash_seed) &
                                  (config.dim - 1));
}

double ngram_sign(std::string_view ngram, const EncoderConfig& config) {
  return (seeded_hash(ngram, mix64(config.hash_seed ^ 0x5167a3e1ULL)) & 1)
             ? -1.0
             : 1.0;
}

std::vector<double> encode_sentence(std::string_view text,
                                    const EncoderConfig& config) {
  config.validate();
  std::vector<double> v(config.dim, 0.0);
  const std::u32string cps =
      text::decode_utf8(text::normalize_whitespace_lower(text));
  std::string gram;
  for (int n = config.ngram_min; n <= config.ngram_max; ++n) {
    if (cps.size() < static_cast<std::size_t>(n)) break;
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      gram.clear();
      for (int k = 0; k < n; ++k) text::append_utf8(gram, cps[i + k]);
      v[ngram_bucket(gram, config)] += ngram_sign(gram, config);
    }
  }
  if (config.normalize) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (sq > 0.0) {
      const double inv = 1.0 / std::sqrt(sq);
      for (double& x : v) x *= inv;
    }
  }
  return v;
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Syntax: return "syntax";
    case FeatureKind::Metaphor: return "metaphor";
    case FeatureKind::Metre: return "metre";
  }
  return "?";
}

FeatureKind parse_feature_kind(std::string_view s) {
  const std::string lower = text::to_lower(text::trim(s));
  if (lower == "syntax") return FeatureKind::Syntax;
  if (lower == "metaphor") return FeatureKind::Metaphor;
  if (lower == "metre" || lower == "meter") return FeatureKind::Metre;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown feature kind '" + std::string(s) + "'");
}

std::vector<FeatureKind> FeatureSpec::kinds() const {
  std::vector<FeatureKind> out;
  if (syntax) out.push_back(FeatureKind::Syntax);
  if (metaphor) out.push_back(FeatureKind::Metaphor);
  if (metre) out.push_back(FeatureKind::Metre);
  return out;
}

std::string FeatureSpec::label() const {
  if (empty()) return "baseline";
  std::string out;
  for (FeatureKind k : kinds()) {
    if (!out.empty()) out += "+";
    out += to_string(k);
  }
  return out;
}

FeatureSpec FeatureSpec::parse(std::string_view list) {
  FeatureSpec spec;
  const std::string lower = text::to_lower(text::trim(list));
  if (lower.empty() || lower == "none" || lower == "baseline") return spec;
  std::size_t start = 0;
  while (start <= lower.size()) {
    std::size_t comma = lower.find_first_of(",+", start);
    if (comma == std::string::npos) comma = lower.size();
    const std::string_view item =
        std::string_view(lower).substr(start, comma - start);
    if (!text::trim(item).empty()) {
      switch (parse_feature_kind(item)) {
        case FeatureKind::Syntax: spec.syntax = true; break;
        case FeatureKind::Metaphor: spec.metaphor = true; break;
        case FeatureKind::Metre: spec.metre = true; break;
      }
    }
    start = comma + 1;
  }
  return spec;
}

namespace {

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(sq / static_cast<double>(xs.size()));
  return m;
}

}  // namespace

FeatureStats compute_feature_stats(
    std::span<const LinguisticFeatures> train_features, const FeatureSpec& spec) {
  FeatureStats stats;
  if (spec.syntax) {
    std::vector<double> d, r;
    for (const auto& f : train_features) {
      if (!f.syntax)
        throw Error(ErrorCode::kMissingFeature, "syntax feature missing");
      d.push_back(f.syntax->depth);
      r.push_back(f.syntax->ratio);
    }
    stats.depth = moments(d);
    stats.ratio = moments(r);
  }
  if (spec.metaphor) {
    std::vector<double> m;
    for (const auto& f : train_features) {
      if (!f.metaphor)
        throw Error(ErrorCode::kMissingFeature, "metaphor feature missing");
      m.push_back(*f.metaphor);
    }
    stats.metaphor = moments(m);
  }
  return stats;
}

double z_score(double x, const Moments& m) {
  return (x - m.mean) / std::max(m.std, kStdFloor);
}

std::size_t Layout::total() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.length;
  return n;
}

Layout make_layout(std::size_t dim, const FeatureSpec& spec) {
  Layout layout;
  std::size_t offset = 0;
  auto add = [&](const char* name, std::size_t len) {
    layout.segments.push_back({name, offset, len});
    offset += len;
  };
  add("sentence", dim);
  if (spec.syntax) add("syntax", 2);
  if (spec.metaphor) add("metaphor", 1);
  if (spec.metre) {
    if (spec.pad_len == 0) {
      throw Error(ErrorCode::kInvalidArgument, "metre block needs pad_len >= 1");
    }
    add("metre", spec.pad_len);
  }
  return layout;
}

InputVector concat_features(std::span<const double> sentence_vec,
                            const LinguisticFeatures& features,
                            const FeatureSpec& spec, const FeatureStats& stats) {
  InputVector out;
  out.layout = make_layout(sentence_vec.size(), spec);
  out.values.reserve(out.layout.total());
  out.values.assign(sentence_vec.begin(), sentence_vec.end());
  if (spec.syntax) {
    if (!features.syntax)
      throw Error(ErrorCode::kMissingFeature, "syntax feature missing");
    if (!stats.depth || !stats.ratio)
      throw Error(ErrorCode::kMissingStats, "no syntax statistics");
    out.values.push_back(z_score(features.syntax->depth, *stats.depth));
    out.values.push_back(z_score(features.syntax->ratio, *stats.ratio));
  }
  if (spec.metaphor) {
    if (!features.metaphor)
      throw Error(ErrorCode::kMissingFeature, "metaphor feature missing");
    if (!stats.metaphor)
      throw Error(ErrorCode::kMissingStats, "no metaphor statistics");
    out.values.push_back(z_score(*features.metaphor, *stats.metaphor));
  }
  if (spec.metre) {
    if (!features.metre)
      throw Error(ErrorCode::kMissingFeature, "metre feature missing");
    const auto& bits = *features.metre;
    for (std::size_t j = 0; j < spec.pad_len; ++j)
      out.values.push_back(j < bits.size() ? double(bits[j]) : 0.0);
  }
  return out;
}

LinguisticFeatures FeatureStore::lookup(const std::string& sentence_id) const {
  LinguisticFeatures f;
  if (auto it = syntax.find(sentence_id); it != syntax.end()) f.syntax = it->second;
  if (auto it = metaphor.find(sentence_id); it != metaphor.end())
    f.metaphor = it->second.count;
  if (auto it = metre.find(sentence_id); it != metre.end()) f.metre = it->second.bits;
  return f;
}

}  // namespace genreforge
