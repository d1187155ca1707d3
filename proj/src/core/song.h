#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/note.h"

namespace midistring {

enum class SongSource { LlmGenerated, MockGenerated, Ingested };

struct SongMeta {
  std::string genre;
  std::string style;
  std::string mood;
  double temperature = 0.0;
  int song_index = 0;
  SongSource source = SongSource::LlmGenerated;

  auto operator<=>(const SongMeta&) const = default;
};

// Four role-keyed tracks plus generation metadata. A role may be absent in
// partially-parsed intermediates; validate_song reports that as MissingTrack.
struct Song {
  std::map<TrackRole, std::vector<NoteEvent>> tracks;
  SongMeta meta;

  bool has_track(TrackRole role) const { return tracks.contains(role); }
  const std::vector<NoteEvent>& notes(TrackRole role) const;
  std::vector<NoteEvent>& notes(TrackRole role) { return tracks[role]; }

  // Sorts every track into canonical (start, pitch) order.
  void sort_tracks();

  bool operator==(const Song&) const = default;
};

int song_note_count(const Song& song);

}  // namespace midistring
