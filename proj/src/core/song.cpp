#include "core/song.h"

#include <algorithm>

namespace midistring {

const std::vector<NoteEvent>& Song::notes(TrackRole role) const {
  static const std::vector<NoteEvent> kEmpty;
  auto it = tracks.find(role);
  return it == tracks.end() ? kEmpty : it->second;
}

void Song::sort_tracks() {
  for (auto& [role, notes] : tracks) {
    std::stable_sort(notes.begin(), notes.end(), note_order);
  }
}

int song_note_count(const Song& song) {
  int total = 0;
  for (const auto& [role, notes] : song.tracks) {
    total += static_cast<int>(notes.size());
  }
  return total;
}

}  // namespace midistring
