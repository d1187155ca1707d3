#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/result.h"
#include "core/song.h"

namespace midistring {

// Writer layout constants. Division 480 keeps song ticks 1:1 with SMF ticks;
// tempo is fixed at 120 BPM.
inline constexpr int kSmfDivision = 480;
inline constexpr int kSmfFormat = 1;
inline constexpr uint32_t kTempoMicrosPerQuarter = 500000;
inline constexpr uint8_t kProgramPiano = 0;
inline constexpr uint8_t kProgramElectricBassFinger = 33;
inline constexpr uint8_t kDrumChannel = 9;  // wire encoding of "MIDI channel 10"

uint8_t role_channel(TrackRole role);  // melody 0, chords 1, bass 2, rhythm 9

// Serializes a validated song as an SMF format-1 byte stream: a tempo/time
// signature conductor track followed by one track per role. Note-Offs carry
// velocity 0. No running status, so equal songs produce identical bytes.
// Throws std::invalid_argument on an invalid song.
std::vector<uint8_t> song_to_midi(const Song& song);

enum class MidiErrorKind {
  BadHeader,
  TruncatedChunk,
  UnsupportedDivision,
  NoMappableTracks,
  RunawayVlq,
};

struct MidiError {
  MidiErrorKind kind;
  std::string message;
};

std::string_view midi_error_kind_name(MidiErrorKind kind);

// How source material was assigned to the four roles during ingestion.
struct RoleMappingReport {
  std::map<int, TrackRole> assignments;  // source candidate index -> role
  std::vector<std::string> notes;        // confidence notes, remap counts
};

struct IngestedSong {
  Song song;
  RoleMappingReport report;
};

// Explicit role map for midi_to_song, keyed by MTrk index in file order.
using TrackRoleMap = std::map<int, TrackRole>;

// The role map produced by song_to_midi's track layout (tracks 1..4).
TrackRoleMap writer_identity_mapping();

// Parses an SMF byte stream into a Song. Events are rescaled to division
// 480, durations snapped to the nearest of {240,480,960} (ties round up,
// notes shorter than 120 ticks dropped), starts clamped to [0,7680], and
// rhythm pitches snapped to the nearest of {35,38,42}. When no explicit
// mapping is given, roles are assigned heuristically: channel 10 becomes
// rhythm, the lowest mean pitch becomes bass, the densest chordal candidate
// becomes chords, and the busiest remaining candidate becomes melody.
// Format 0 files are treated as one multi-channel track.
Result<IngestedSong, MidiError> midi_to_song(
    const std::vector<uint8_t>& bytes,
    const std::optional<TrackRoleMap>& mapping = std::nullopt,
    SongMeta meta = {.source = SongSource::Ingested});

}  // namespace midistring
