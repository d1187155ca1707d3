#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/result.h"

namespace midistring {

inline constexpr int kGenreCount = 13;
inline constexpr int kStyleCount = 25;
inline constexpr int kMoodCount = 5;

enum class LabelTask { Genre, Style };

inline std::string_view label_task_name(LabelTask task) {
  return task == LabelTask::Genre ? "genre" : "style";
}

// Trim, lowercase, collapse internal whitespace.
std::string normalize_label(std::string_view raw);

// Configurable label sets. The loader enforces the 13/25/5 cardinalities;
// the type itself permits smaller slices for programmatic fixtures.
struct Taxonomy {
  std::vector<std::string> genres;
  std::vector<std::string> styles;
  std::vector<std::string> moods;

  std::optional<int> genre_index(std::string_view label) const;
  std::optional<int> style_index(std::string_view label) const;
  std::optional<int> mood_index(std::string_view label) const;
};

// Reads a JSON config with string-list keys "genres", "styles", "moods".
// Labels are normalized, then checked for emptiness, duplicates, and the
// 13/25/5 cardinalities.
Result<Taxonomy, std::string> load_taxonomy(const std::string& path);
Result<Taxonomy, std::string> parse_taxonomy(const std::string& json_text);

}  // namespace midistring
