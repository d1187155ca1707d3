#pragma once

#include <string>
#include <vector>

#include "core/result.h"
#include "core/song.h"
#include "core/taxonomy.h"

namespace midistring {

struct LabeledSong {
  Song song;
  std::string label;
  int label_index = 0;
  std::string source_path;
};

struct LabeledSet {
  LabelTask task = LabelTask::Genre;
  std::vector<LabeledSong> items;
  std::vector<std::string> skipped;  // one line per rejected row
};

// Reads a two-column CSV (midi path, label), ingests each MIDI through the
// SMF reader with heuristic role mapping, and keeps rows whose label resolves
// in the task taxonomy. Unparseable files and unknown labels are skipped and
// reported, not fatal. Relative paths resolve against the CSV's directory.
Result<LabeledSet, std::string> ingest_labels(const std::string& csv_path,
                                              const Taxonomy& taxonomy,
                                              LabelTask task);

}  // namespace midistring
