#include "core/note.h"

namespace midistring {

std::string_view role_name(TrackRole role) {
  switch (role) {
    case TrackRole::Melody: return "melody";
    case TrackRole::Chords: return "chords";
    case TrackRole::Bass:   return "bass";
    case TrackRole::Rhythm: return "rhythm";
  }
  return "?";
}

std::optional<TrackRole> role_from_name(std::string_view name) {
  for (TrackRole role : kTrackRoles) {
    if (role_name(role) == name) return role;
  }
  return std::nullopt;
}

}  // namespace midistring
