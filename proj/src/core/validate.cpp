#include "core/validate.h"

#include <algorithm>
#include <sstream>

namespace midistring {

std::string_view validation_error_kind_name(ValidationErrorKind kind) {
  switch (kind) {
    case ValidationErrorKind::MissingTrack:       return "MissingTrack";
    case ValidationErrorKind::EmptyTrack:         return "EmptyTrack";
    case ValidationErrorKind::PitchOutOfRange:    return "PitchOutOfRange";
    case ValidationErrorKind::InvalidDuration:    return "InvalidDuration";
    case ValidationErrorKind::VelocityOutOfRange: return "VelocityOutOfRange";
    case ValidationErrorKind::StartOutOfRange:    return "StartOutOfRange";
    case ValidationErrorKind::InvalidDrumPitch:   return "InvalidDrumPitch";
    case ValidationErrorKind::UnsortedTrack:      return "UnsortedTrack";
  }
  return "?";
}

std::string to_string(const ValidationError& error) {
  std::ostringstream out;
  out << validation_error_kind_name(error.kind);
  if (error.role) out << " [" << role_name(*error.role) << "]";
  if (error.note_index) out << " note " << *error.note_index;
  if (!error.detail.empty()) out << ": " << error.detail;
  return out.str();
}

namespace {

ValidationError note_error(ValidationErrorKind kind, std::string detail) {
  return ValidationError{kind, std::nullopt, std::nullopt, std::move(detail)};
}

}  // namespace

std::optional<ValidationError> validate_note(const NoteEvent& note,
                                             bool is_rhythm) {
  if (note.pitch < 0 || note.pitch > 127) {
    return note_error(ValidationErrorKind::PitchOutOfRange,
                      "pitch " + std::to_string(note.pitch));
  }
  if (std::find(kLegalDurations.begin(), kLegalDurations.end(),
                note.duration) == kLegalDurations.end()) {
    return note_error(ValidationErrorKind::InvalidDuration,
                      "duration " + std::to_string(note.duration));
  }
  if (note.velocity < 0 || note.velocity > 127) {
    return note_error(ValidationErrorKind::VelocityOutOfRange,
                      "velocity " + std::to_string(note.velocity));
  }
  if (note.start < 0 || note.start > kMaxStartTick) {
    return note_error(ValidationErrorKind::StartOutOfRange,
                      "start " + std::to_string(note.start));
  }
  if (is_rhythm && std::find(kDrumPitches.begin(), kDrumPitches.end(),
                             note.pitch) == kDrumPitches.end()) {
    return note_error(ValidationErrorKind::InvalidDrumPitch,
                      "drum pitch " + std::to_string(note.pitch));
  }
  return std::nullopt;
}

std::vector<ValidationError> validate_song(const Song& song) {
  std::vector<ValidationError> errors;
  for (TrackRole role : kTrackRoles) {
    auto it = song.tracks.find(role);
    if (it == song.tracks.end()) {
      errors.push_back({ValidationErrorKind::MissingTrack, role, std::nullopt,
                        std::string(role_name(role)) + " track absent"});
      continue;
    }
    const auto& notes = it->second;
    if (notes.empty()) {
      errors.push_back({ValidationErrorKind::EmptyTrack, role, std::nullopt,
                        std::string(role_name(role)) + " track has no notes"});
      continue;
    }
    const bool is_rhythm = role == TrackRole::Rhythm;
    for (int i = 0; i < static_cast<int>(notes.size()); ++i) {
      if (auto err = validate_note(notes[i], is_rhythm)) {
        err->role = role;
        err->note_index = i;
        errors.push_back(std::move(*err));
      }
    }
    if (!std::is_sorted(notes.begin(), notes.end(), note_order)) {
      errors.push_back({ValidationErrorKind::UnsortedTrack, role, std::nullopt,
                        "notes not in (start, pitch) order"});
    }
  }
  return errors;
}

}  // namespace midistring
