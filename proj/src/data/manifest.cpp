#include "data/manifest.h"

#include <set>
#include <sstream>

#include <json.hpp>

namespace midistring {

std::string make_song_id(const std::string& genre, const std::string& style,
                         int index) {
  return genre + "/" + style + "/" + std::to_string(index);
}

bool Manifest::contains(const std::string& id) const {
  return find(id) != nullptr;
}

const ManifestRow* Manifest::find(const std::string& id) const {
  for (const auto& row : rows) {
    if (row.id == id) return &row;
  }
  return nullptr;
}

std::vector<ManifestRow> Manifest::successes() const {
  std::vector<ManifestRow> out;
  for (const auto& row : rows) {
    if (row.success) out.push_back(row);
  }
  return out;
}

std::string manifest_row_to_json(const ManifestRow& row) {
  nlohmann::ordered_json doc;
  doc["id"] = row.id;
  doc["genre"] = row.genre;
  doc["style"] = row.style;
  doc["mood"] = row.mood;
  doc["temperature"] = row.temperature;
  doc["song_index"] = row.song_index;
  doc["json_path"] = row.json_path;
  doc["midi_path"] = row.midi_path;
  doc["note_count"] = row.note_count;
  doc["attempts"] = row.attempts;
  doc["outcome"] = row.success ? "success" : "failure";
  if (!row.error.empty()) doc["error"] = row.error;
  doc["json_sha256"] = row.json_sha256;
  doc["midi_sha256"] = row.midi_sha256;
  return doc.dump();
}

Result<ManifestRow, std::string> manifest_row_from_json(
    const std::string& line) {
  nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    return std::string("row is not a JSON object");
  }
  ManifestRow row;
  try {
    row.id = doc.at("id").get<std::string>();
    row.genre = doc.at("genre").get<std::string>();
    row.style = doc.at("style").get<std::string>();
    row.mood = doc.at("mood").get<std::string>();
    row.temperature = doc.at("temperature").get<double>();
    row.song_index = doc.at("song_index").get<int>();
    row.json_path = doc.value("json_path", "");
    row.midi_path = doc.value("midi_path", "");
    row.note_count = doc.value("note_count", 0);
    row.attempts = doc.value("attempts", 0);
    row.success = doc.at("outcome").get<std::string>() == "success";
    row.error = doc.value("error", "");
    row.json_sha256 = doc.value("json_sha256", "");
    row.midi_sha256 = doc.value("midi_sha256", "");
  } catch (const nlohmann::json::exception& e) {
    return std::string("row missing required field: ") + e.what();
  }
  return row;
}

Result<Manifest, std::string> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) return "cannot open manifest: " + path;
  Manifest manifest;
  std::set<std::string> seen;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    auto row = manifest_row_from_json(line);
    if (!row) {
      return "manifest line " + std::to_string(line_number) + ": " + row.error();
    }
    if (!seen.insert(row.value().id).second) {
      return "manifest line " + std::to_string(line_number) +
             ": duplicate song id " + row.value().id;
    }
    manifest.rows.push_back(row.take());
  }
  return manifest;
}

Result<bool, std::string> ManifestWriter::open(const std::string& path,
                                               bool truncate) {
  out_.open(path, truncate ? std::ios::trunc : std::ios::app);
  if (!out_) return "cannot open manifest for writing: " + path;
  return true;
}

Result<bool, std::string> ManifestWriter::append(const ManifestRow& row) {
  out_ << manifest_row_to_json(row) << '\n';
  out_.flush();
  if (!out_) return std::string("manifest write failed");
  return true;
}

void ManifestWriter::close() {
  if (out_.is_open()) out_.close();
}

}  // namespace midistring
