#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/note.h"
#include "core/song.h"

namespace midistring {

enum class ValidationErrorKind {
  MissingTrack,
  EmptyTrack,
  PitchOutOfRange,
  InvalidDuration,
  VelocityOutOfRange,
  StartOutOfRange,
  InvalidDrumPitch,
  UnsortedTrack,
};

std::string_view validation_error_kind_name(ValidationErrorKind kind);

struct ValidationError {
  ValidationErrorKind kind;
  std::optional<TrackRole> role;
  std::optional<int> note_index;
  std::string detail;
};

std::string to_string(const ValidationError& error);

// Checks one note against the value constraints. Returns the first violated
// constraint, or nullopt when the note is legal. Drum-pitch restriction
// applies only when is_rhythm is set.
std::optional<ValidationError> validate_note(const NoteEvent& note,
                                             bool is_rhythm);

// Checks the whole song: all four tracks present and non-empty, every note
// legal, every track in canonical (start, pitch) order. Reports every
// violation, empty result means the song is valid.
std::vector<ValidationError> validate_song(const Song& song);

inline bool song_is_valid(const Song& song) { return validate_song(song).empty(); }

}  // namespace midistring
