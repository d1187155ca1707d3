#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "core/note.h"
#include "core/rng.h"
#include "core/song.h"
#include "core/taxonomy.h"

namespace midistring::testing {

// Random valid song generator. Tracks never stack the same pitch on
// overlapping tick ranges (MIDI note pairing cannot represent that), and
// velocities stay >= 1 (a velocity-0 Note-On means Note-Off on the wire).
inline std::vector<NoteEvent> random_track(Rng& rng, bool rhythm, int count) {
  std::map<int, int> free_at;  // pitch -> earliest non-overlapping start
  std::vector<NoteEvent> notes;
  int cursor = rng.next_int(0, 240);
  int tries = 0;
  while (static_cast<int>(notes.size()) < count && tries < count * 8) {
    ++tries;
    int pitch = rhythm ? kDrumPitches[rng.next_below(3)] : rng.next_int(0, 127);
    int duration = kLegalDurations[rng.next_below(3)];
    int start = cursor;
    if (auto it = free_at.find(pitch); it != free_at.end()) {
      start = std::max(start, it->second);
    }
    if (start > kMaxStartTick) {
      cursor = std::max(0, cursor - 960);
      continue;
    }
    notes.push_back({pitch, duration, rng.next_int(1, 127), start});
    free_at[pitch] = start + duration;
    cursor = std::min(cursor + rng.next_int(0, 480), kMaxStartTick + 1);
  }
  if (notes.empty()) {
    notes.push_back({rhythm ? 38 : 60, 480, 90, 0});
  }
  std::sort(notes.begin(), notes.end(), note_order);
  return notes;
}

inline Song random_valid_song(Rng& rng) {
  Song song;
  song.meta = {"pop", "romantic", "happy", 0.8, 0, SongSource::MockGenerated};
  song.tracks[TrackRole::Melody] = random_track(rng, false, rng.next_int(4, 24));
  song.tracks[TrackRole::Chords] = random_track(rng, false, rng.next_int(4, 16));
  song.tracks[TrackRole::Bass] = random_track(rng, false, rng.next_int(2, 12));
  song.tracks[TrackRole::Rhythm] = random_track(rng, true, rng.next_int(4, 32));
  return song;
}

// Minimal hand-built song usable as a fixture.
inline Song tiny_song() {
  Song song;
  song.meta = {"pop", "romantic", "happy", 0.6, 0, SongSource::MockGenerated};
  song.tracks[TrackRole::Melody] = {{62, 480, 90, 0}, {64, 480, 88, 480}};
  song.tracks[TrackRole::Chords] = {{48, 960, 70, 0}, {52, 960, 70, 0}};
  song.tracks[TrackRole::Bass] = {{36, 480, 80, 0}, {36, 480, 80, 960}};
  song.tracks[TrackRole::Rhythm] = {{35, 240, 100, 0}, {42, 240, 60, 240}};
  return song;
}

inline Taxonomy tiny_taxonomy() {
  return Taxonomy{{"pop", "rock"}, {"romantic", "minimalist"}, {"happy", "sad"}};
}

}  // namespace midistring::testing
