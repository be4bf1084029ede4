#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace genreforge {

enum class Language { EN, FR, DE, ES, IT, PT };
enum class Genre { Drama, Poetry, Novel };
enum class Split { Train, Test };

inline constexpr std::array<Language, 6> kAllLanguages = {
    Language::EN, Language::FR, Language::DE,
    Language::ES, Language::IT, Language::PT};

// Table order used in count matrices: Drama, Poetry, Novel.
inline constexpr std::array<Genre, 3> kAllGenres = {Genre::Drama, Genre::Poetry,
                                                    Genre::Novel};

std::string_view to_string(Language lang);
std::string_view to_string(Genre genre);
std::string_view to_string(Split split);

// Lowercase language code ("en"), used for data file names.
std::string lower_code(Language lang);

std::optional<Language> parse_language(std::string_view s);
// Accepts "Drama", "drama", "DRAMA" and the one-letter forms D/P/N.
std::optional<Genre> parse_genre(std::string_view s);
std::optional<Split> parse_split(std::string_view s);

Language language_or_throw(std::string_view s);
Genre genre_or_throw(std::string_view s);

// Label order for binary tasks: Drama < Novel < Poetry (by name).
bool genre_name_less(Genre a, Genre b);

// Binary genre task. `first` always carries label 0, `second` label 1.
struct Task {
  Genre first;
  Genre second;

  // Canonicalizes the pair into label order; throws kSameGenre on a == b.
  static Task make(Genre a, Genre b);
  // Parses "P:N", "Poetry:Novel", "poetry-novel".
  static Task parse(std::string_view s);

  // "Novel-Poetry"
  std::string id() const;

  friend bool operator==(const Task&, const Task&) = default;
  friend auto operator<=>(const Task&, const Task&) = default;
};

}  // namespace genreforge
