#include "data/stats.h"

#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace midistring {

namespace {

std::string format_temperature(double t) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", t);
  return buf;
}

}  // namespace

DatasetStats dataset_stats(const Manifest& manifest) {
  DatasetStats stats;
  for (const auto& row : manifest.rows) {
    if (!row.success) {
      ++stats.failures;
      continue;
    }
    ++stats.total_files;
    stats.total_note_events += row.note_count;
    ++stats.per_genre[row.genre];
    ++stats.per_style[row.style];
    ++stats.per_mood[row.mood];
    ++stats.per_temperature[format_temperature(row.temperature)];
  }
  return stats;
}

std::string stats_to_json(const DatasetStats& stats) {
  nlohmann::ordered_json doc;
  doc["total_files"] = stats.total_files;
  doc["failures"] = stats.failures;
  doc["total_note_events"] = stats.total_note_events;
  doc["genre_classes"] = stats.per_genre.size();
  doc["style_classes"] = stats.per_style.size();
  doc["per_genre"] = stats.per_genre;
  doc["per_style"] = stats.per_style;
  doc["per_mood"] = stats.per_mood;
  doc["per_temperature"] = stats.per_temperature;
  return doc.dump(2);
}

std::string stats_to_text(const DatasetStats& stats) {
  std::ostringstream out;
  out << "Characteristic            Description\n";
  out << "------------------------  -----------\n";
  out << "Total # Files             " << stats.total_files << "\n";
  out << "# of Genre Classes        " << stats.per_genre.size() << "\n";
  out << "# of Style Classes        " << stats.per_style.size() << "\n";
  out << "Tracks per File           4 (melody, chords, bass, rhythm)\n";
  out << "Sequence Length           8 bars (7680 ticks at 128 time steps)\n";
  out << "Total Note Events         " << stats.total_note_events << "\n";
  out << "Failed Generations        " << stats.failures << "\n";
  out << "Moods                     ";
  bool first = true;
  for (const auto& [mood, count] : stats.per_mood) {
    out << (first ? "" : ", ") << mood << " (" << count << ")";
    first = false;
  }
  out << "\nTemperatures              ";
  first = true;
  for (const auto& [temp, count] : stats.per_temperature) {
    out << (first ? "" : ", ") << temp << " (" << count << ")";
    first = false;
  }
  out << "\n";
  return out.str();
}

}  // namespace midistring
