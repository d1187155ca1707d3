#include "data/ingest.h"

#include <filesystem>
#include <fstream>

#include "midi/smf.h"

namespace midistring {

Result<LabeledSet, std::string> ingest_labels(const std::string& csv_path,
                                              const Taxonomy& taxonomy,
                                              LabelTask task) {
  std::ifstream in(csv_path);
  if (!in) return "cannot open label CSV: " + csv_path;
  const auto base_dir = std::filesystem::path(csv_path).parent_path();

  LabeledSet set;
  set.task = task;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
      line.pop_back();
    }
    if (line.empty()) continue;
    // Labels never contain commas; split at the last one so paths may.
    auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      set.skipped.push_back("line " + std::to_string(line_number) +
                            ": missing label column");
      continue;
    }
    std::string path_field = line.substr(0, comma);
    std::string label = normalize_label(line.substr(comma + 1));
    if (line_number == 1 && (path_field == "path" || path_field == "midi_path")) {
      continue;  // header row
    }

    auto index = task == LabelTask::Genre ? taxonomy.genre_index(label)
                                          : taxonomy.style_index(label);
    if (!index) {
      set.skipped.push_back("line " + std::to_string(line_number) +
                            ": label \"" + label + "\" not in " +
                            std::string(label_task_name(task)) + " taxonomy");
      continue;
    }

    std::filesystem::path midi_path(path_field);
    if (midi_path.is_relative()) midi_path = base_dir / midi_path;
    std::ifstream midi(midi_path, std::ios::binary);
    if (!midi) {
      set.skipped.push_back("line " + std::to_string(line_number) +
                            ": cannot read " + midi_path.string());
      continue;
    }
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(midi)),
                               std::istreambuf_iterator<char>());
    auto ingested = midi_to_song(bytes);
    if (!ingested) {
      set.skipped.push_back("line " + std::to_string(line_number) + ": " +
                            std::string(midi_error_kind_name(ingested.error().kind)) +
                            ": " + ingested.error().message);
      continue;
    }
    LabeledSong item;
    item.song = std::move(ingested.value().song);
    if (task == LabelTask::Genre) {
      item.song.meta.genre = label;
    } else {
      item.song.meta.style = label;
    }
    item.label = label;
    item.label_index = *index;
    item.source_path = midi_path.string();
    set.items.push_back(std::move(item));
  }
  if (set.items.empty()) {
    return std::string("no usable rows in ") + csv_path;
  }
  return set;
}

}  // namespace midistring
