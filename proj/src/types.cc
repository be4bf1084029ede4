#include "genreforge/types.h"

#include <algorithm>
#include <cctype>

#include "genreforge/error.h"

namespace genreforge {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEndBeforeStart: return "EndBeforeStart";
    case ErrorCode::kAlreadySplit: return "AlreadySplit";
    case ErrorCode::kEmptyCell: return "EmptyCell";
    case ErrorCode::kSameGenre: return "SameGenre";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kCyclicHeads: return "CyclicHeads";
    case ErrorCode::kBadIndex: return "BadIndex";
    case ErrorCode::kZeroLength: return "ZeroLength";
    case ErrorCode::kBadStressString: return "BadStressString";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kUnsyllabifiable: return "Unsyllabifiable";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kNonBinaryLabel: return "NonBinaryLabel";
    case ErrorCode::kMissingFeature: return "MissingFeature";
    case ErrorCode::kMissingStats: return "MissingStats";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kLayoutMismatch: return "LayoutMismatch";
    case ErrorCode::kSingleClassTrainSet: return "SingleClassTrainSet";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kKeyMismatch: return "KeyMismatch";
  }
  return "Unknown";
}

std::string_view to_string(Language lang) {
  switch (lang) {
    case Language::EN: return "EN";
    case Language::FR: return "FR";
    case Language::DE: return "DE";
    case Language::ES: return "ES";
    case Language::IT: return "IT";
    case Language::PT: return "PT";
  }
  return "?";
}

std::string_view to_string(Genre genre) {
  switch (genre) {
    case Genre::Drama: return "Drama";
    case Genre::Poetry: return "Poetry";
    case Genre::Novel: return "Novel";
  }
  return "?";
}

std::string_view to_string(Split split) {
  return split == Split::Train ? "Train" : "Test";
}

std::string lower_code(Language lang) {
  std::string s(to_string(lang));
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return out;
}

}  // namespace

std::optional<Language> parse_language(std::string_view s) {
  const std::string u = upper(s);
  for (Language lang : kAllLanguages) {
    if (u == to_string(lang)) return lang;
  }
  return std::nullopt;
}

std::optional<Genre> parse_genre(std::string_view s) {
  const std::string u = upper(s);
  if (u == "DRAMA" || u == "D") return Genre::Drama;
  if (u == "POETRY" || u == "P") return Genre::Poetry;
  if (u == "NOVEL" || u == "N") return Genre::Novel;
  return std::nullopt;
}

std::optional<Split> parse_split(std::string_view s) {
  const std::string u = upper(s);
  if (u == "TRAIN") return Split::Train;
  if (u == "TEST") return Split::Test;
  return std::nullopt;
}

Language language_or_throw(std::string_view s) {
  if (auto lang = parse_language(s)) return *lang;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown language '" + std::string(s) + "'");
}

Genre genre_or_throw(std::string_view s) {
  if (auto genre = parse_genre(s)) return *genre;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown genre '" + std::string(s) + "'");
}

bool genre_name_less(Genre a, Genre b) { return to_string(a) < to_string(b); }

Task Task::make(Genre a, Genre b) {
  if (a == b) {
    throw Error(ErrorCode::kSameGenre,
                "task needs two distinct genres, got " +
                    std::string(to_string(a)) + " twice");
  }
  if (genre_name_less(b, a)) std::swap(a, b);
  return Task{a, b};
}

Task Task::parse(std::string_view s) {
  const auto sep = s.find_first_of(":-/");
  if (sep == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "task must look like P:N, got '" + std::string(s) + "'");
  }
  return make(genre_or_throw(s.substr(0, sep)),
              genre_or_throw(s.substr(sep + 1)));
}

std::string Task::id() const {
  return std::string(to_string(first)) + "-" + std::string(to_string(second));
}

}  // namespace genreforge
