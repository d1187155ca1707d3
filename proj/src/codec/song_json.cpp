#include "codec/song_json.h"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace midistring {

std::string_view codec_error_kind_name(CodecErrorKind kind) {
  switch (kind) {
    case CodecErrorKind::MalformedJson:    return "MalformedJson";
    case CodecErrorKind::WrongShape:       return "WrongShape";
    case CodecErrorKind::ValidationFailed: return "ValidationFailed";
    case CodecErrorKind::NoJsonFound:      return "NoJsonFound";
  }
  return "?";
}

std::string serialize_song(const Song& song) {
  if (!song_is_valid(song)) {
    throw std::invalid_argument("serialize_song: song fails validation");
  }
  std::ostringstream out;
  out << '{';
  bool first_track = true;
  for (TrackRole role : kTrackRoles) {
    if (!first_track) out << ", ";
    first_track = false;
    out << '"' << role_name(role) << "\": [";
    bool first_note = true;
    for (const NoteEvent& n : song.notes(role)) {
      if (!first_note) out << ", ";
      first_note = false;
      out << '[' << n.pitch << ", " << n.duration << ", " << n.velocity << ", "
          << n.start << ']';
    }
    out << ']';
  }
  out << '}';
  return out.str();
}

Result<Song, CodecError> parse_song(const std::string& text, SongMeta meta) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    return CodecError{CodecErrorKind::MalformedJson, "not parseable as JSON", {}};
  }
  if (!doc.is_object()) {
    return CodecError{CodecErrorKind::WrongShape, "top level is not an object", {}};
  }

  Song song;
  song.meta = std::move(meta);
  for (TrackRole role : kTrackRoles) {
    const std::string key(role_name(role));
    if (!doc.contains(key)) continue;  // reported as MissingTrack below
    const auto& track = doc[key];
    if (!track.is_array()) {
      return CodecError{CodecErrorKind::WrongShape,
                        "track \"" + key + "\" is not an array", {}};
    }
    std::vector<NoteEvent> notes;
    notes.reserve(track.size());
    for (size_t i = 0; i < track.size(); ++i) {
      const auto& tuple = track[i];
      if (!tuple.is_array() || tuple.size() != 4) {
        return CodecError{CodecErrorKind::WrongShape,
                          "track \"" + key + "\" note " + std::to_string(i) +
                              " is not a 4-element tuple", {}};
      }
      NoteEvent note;
      int* fields[4] = {&note.pitch, &note.duration, &note.velocity, &note.start};
      for (int f = 0; f < 4; ++f) {
        if (!tuple[f].is_number_integer()) {
          return CodecError{CodecErrorKind::WrongShape,
                            "track \"" + key + "\" note " + std::to_string(i) +
                                " has a non-integer element", {}};
        }
        *fields[f] = tuple[f].get<int>();
      }
      notes.push_back(note);
    }
    song.tracks[role] = std::move(notes);
  }

  song.sort_tracks();
  auto errors = validate_song(song);
  if (!errors.empty()) {
    std::string summary = to_string(errors.front());
    if (errors.size() > 1) {
      summary += " (+" + std::to_string(errors.size() - 1) + " more)";
    }
    return CodecError{CodecErrorKind::ValidationFailed, std::move(summary),
                      std::move(errors)};
  }
  return song;
}

}  // namespace midistring
