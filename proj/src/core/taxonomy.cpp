#include "core/taxonomy.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace midistring {

std::string normalize_label(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

namespace {

std::optional<int> index_of(const std::vector<std::string>& labels,
                            std::string_view label) {
  const std::string key = normalize_label(label);
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    if (labels[i] == key) return i;
  }
  return std::nullopt;
}

Result<std::vector<std::string>, std::string> read_label_list(
    const nlohmann::json& doc, const char* key, int expected_count) {
  if (!doc.contains(key) || !doc[key].is_array()) {
    return std::string("missing string-list key \"") + key + "\"";
  }
  std::vector<std::string> labels;
  std::set<std::string> seen;
  for (const auto& item : doc[key]) {
    if (!item.is_string()) {
      return std::string("non-string entry under \"") + key + "\"";
    }
    std::string label = normalize_label(item.get<std::string>());
    if (label.empty()) {
      return std::string("empty label under \"") + key + "\"";
    }
    if (!seen.insert(label).second) {
      return "duplicate label \"" + label + "\" under \"" + key + "\"";
    }
    labels.push_back(std::move(label));
  }
  if (static_cast<int>(labels.size()) != expected_count) {
    std::ostringstream msg;
    msg << "\"" << key << "\" must list " << expected_count << " labels, got "
        << labels.size();
    return msg.str();
  }
  return labels;
}

}  // namespace

std::optional<int> Taxonomy::genre_index(std::string_view label) const {
  return index_of(genres, label);
}
std::optional<int> Taxonomy::style_index(std::string_view label) const {
  return index_of(styles, label);
}
std::optional<int> Taxonomy::mood_index(std::string_view label) const {
  return index_of(moods, label);
}

Result<Taxonomy, std::string> parse_taxonomy(const std::string& json_text) {
  nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    return std::string("taxonomy config is not a JSON object");
  }
  auto genres = read_label_list(doc, "genres", kGenreCount);
  if (!genres) return genres.error();
  auto styles = read_label_list(doc, "styles", kStyleCount);
  if (!styles) return styles.error();
  auto moods = read_label_list(doc, "moods", kMoodCount);
  if (!moods) return moods.error();
  return Taxonomy{genres.take(), styles.take(), moods.take()};
}

Result<Taxonomy, std::string> load_taxonomy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "cannot open taxonomy config: " + path;
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_taxonomy(buf.str());
}

}  // namespace midistring
