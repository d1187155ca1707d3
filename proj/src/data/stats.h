#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "data/manifest.h"

namespace midistring {

// Aggregate report over a manifest, mirroring the dataset characteristics
// table: totals, per-class counts, and the temperature/mood histograms.
struct DatasetStats {
  int total_files = 0;  // successful generations
  int failures = 0;
  int64_t total_note_events = 0;
  std::map<std::string, int> per_genre;
  std::map<std::string, int> per_style;
  std::map<std::string, int> per_mood;
  std::map<std::string, int> per_temperature;  // key formatted "0.60"
};

DatasetStats dataset_stats(const Manifest& manifest);

std::string stats_to_json(const DatasetStats& stats);
std::string stats_to_text(const DatasetStats& stats);

}  // namespace midistring
