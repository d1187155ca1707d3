#include <algorithm>
#include <stdexcept>

#include "core/validate.h"
#include "midi/smf.h"
#include "midi/vlq.h"

namespace midistring {

uint8_t role_channel(TrackRole role) {
  switch (role) {
    case TrackRole::Melody: return 0;
    case TrackRole::Chords: return 1;
    case TrackRole::Bass:   return 2;
    case TrackRole::Rhythm: return kDrumChannel;
  }
  return 0;
}

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void append_track_chunk(std::vector<uint8_t>& out,
                        const std::vector<uint8_t>& body) {
  out.push_back('M'); out.push_back('T'); out.push_back('r'); out.push_back('k');
  put_u32(out, static_cast<uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
}

struct WireEvent {
  int tick;
  bool is_on;  // offs sort before ons at equal ticks
  uint8_t pitch;
  uint8_t velocity;
};

void append_delta(std::vector<uint8_t>& body, int tick, int& cursor) {
  auto delta = encode_vlq(static_cast<uint32_t>(tick - cursor));
  body.insert(body.end(), delta.begin(), delta.end());
  cursor = tick;
}

std::vector<uint8_t> conductor_track() {
  std::vector<uint8_t> body;
  // Tempo: FF 51 03, 500000 us per quarter (120 BPM).
  body.insert(body.end(), {0x00, 0xFF, 0x51, 0x03});
  body.push_back(static_cast<uint8_t>(kTempoMicrosPerQuarter >> 16));
  body.push_back(static_cast<uint8_t>(kTempoMicrosPerQuarter >> 8));
  body.push_back(static_cast<uint8_t>(kTempoMicrosPerQuarter));
  // Time signature: 4/4, 24 MIDI clocks per metronome tick, 8 32nds/quarter.
  body.insert(body.end(), {0x00, 0xFF, 0x58, 0x04, 0x04, 0x02, 0x18, 0x08});
  // End of track.
  body.insert(body.end(), {0x00, 0xFF, 0x2F, 0x00});
  return body;
}

std::vector<uint8_t> role_track(const Song& song, TrackRole role) {
  const uint8_t channel = role_channel(role);
  std::vector<WireEvent> events;
  events.reserve(song.notes(role).size() * 2);
  for (const NoteEvent& n : song.notes(role)) {
    events.push_back({n.start, true, static_cast<uint8_t>(n.pitch),
                      static_cast<uint8_t>(n.velocity)});
    events.push_back({n.start + n.duration, false,
                      static_cast<uint8_t>(n.pitch), 0});
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const WireEvent& a, const WireEvent& b) {
                     if (a.tick != b.tick) return a.tick < b.tick;
                     if (a.is_on != b.is_on) return !a.is_on;  // offs first
                     return a.pitch < b.pitch;
                   });

  std::vector<uint8_t> body;
  int cursor = 0;
  if (channel != kDrumChannel) {
    const uint8_t program = role == TrackRole::Bass
                                ? kProgramElectricBassFinger
                                : kProgramPiano;
    body.push_back(0x00);
    body.push_back(static_cast<uint8_t>(0xC0 | channel));
    body.push_back(program);
  }
  for (const WireEvent& e : events) {
    append_delta(body, e.tick, cursor);
    body.push_back(static_cast<uint8_t>((e.is_on ? 0x90 : 0x80) | channel));
    body.push_back(e.pitch);
    body.push_back(e.velocity);
  }
  body.insert(body.end(), {0x00, 0xFF, 0x2F, 0x00});
  return body;
}

}  // namespace

std::vector<uint8_t> song_to_midi(const Song& song) {
  if (!song_is_valid(song)) {
    throw std::invalid_argument("song_to_midi: song fails validation");
  }
  std::vector<uint8_t> out;
  out.reserve(1024);
  out.push_back('M'); out.push_back('T'); out.push_back('h'); out.push_back('d');
  put_u32(out, 6);
  put_u16(out, kSmfFormat);
  put_u16(out, 5);  // conductor + four role tracks
  put_u16(out, kSmfDivision);
  append_track_chunk(out, conductor_track());
  for (TrackRole role : kTrackRoles) {
    append_track_chunk(out, role_track(song, role));
  }
  return out;
}

TrackRoleMap writer_identity_mapping() {
  return {{1, TrackRole::Melody},
          {2, TrackRole::Chords},
          {3, TrackRole::Bass},
          {4, TrackRole::Rhythm}};
}

}  // namespace midistring
