#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace midistring {

// One note event: the 4-tuple every track is built from.
struct NoteEvent {
  int pitch = 0;     // MIDI note number, 0..127
  int duration = 0;  // ticks; one of {240, 480, 960}
  int velocity = 0;  // 0..127
  int start = 0;     // ticks from sequence origin, 0..7680

  auto operator<=>(const NoteEvent&) const = default;
};

enum class TrackRole { Melody = 0, Chords = 1, Bass = 2, Rhythm = 3 };

inline constexpr std::array<TrackRole, 4> kTrackRoles = {
    TrackRole::Melody, TrackRole::Chords, TrackRole::Bass, TrackRole::Rhythm};

inline constexpr std::array<int, 3> kLegalDurations = {240, 480, 960};
inline constexpr std::array<int, 3> kDrumPitches = {35, 38, 42};
inline constexpr int kMaxStartTick = 7680;  // 8 bars of 4/4 at 480 TPQN
inline constexpr int kTicksPerQuarter = 480;

std::string_view role_name(TrackRole role);
std::optional<TrackRole> role_from_name(std::string_view name);

// Canonical note order within a track.
inline bool note_order(const NoteEvent& a, const NoteEvent& b) {
  return a.start != b.start ? a.start < b.start : a.pitch < b.pitch;
}

}  // namespace midistring
