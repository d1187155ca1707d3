#include <algorithm>
#include <cstdlib>
#include <deque>
#include <map>
#include <sstream>
#include <tuple>

#include "core/validate.h"
#include "midi/smf.h"
#include "midi/vlq.h"

namespace midistring {

std::string_view midi_error_kind_name(MidiErrorKind kind) {
  switch (kind) {
    case MidiErrorKind::BadHeader:           return "BadHeader";
    case MidiErrorKind::TruncatedChunk:      return "TruncatedChunk";
    case MidiErrorKind::UnsupportedDivision: return "UnsupportedDivision";
    case MidiErrorKind::NoMappableTracks:    return "NoMappableTracks";
    case MidiErrorKind::RunawayVlq:          return "RunawayVlq";
  }
  return "?";
}

namespace {

struct RawNote {
  int pitch;
  int velocity;
  int64_t start;     // ticks at source division
  int64_t duration;  // ticks at source division
};

// Notes grouped by (MTrk index, channel); the unit role mapping works on.
struct Candidate {
  int track_index;
  int channel;
  std::vector<RawNote> notes;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

  size_t pos() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }
  bool need(size_t n) const { return remaining() >= n; }

  uint8_t peek() const { return bytes_[pos_]; }
  uint8_t u8() { return bytes_[pos_++]; }
  uint16_t u16() {
    uint16_t v = static_cast<uint16_t>((bytes_[pos_] << 8) | bytes_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  uint32_t u32() {
    uint32_t v = (uint32_t(bytes_[pos_]) << 24) | (uint32_t(bytes_[pos_ + 1]) << 16) |
                 (uint32_t(bytes_[pos_ + 2]) << 8) | bytes_[pos_ + 3];
    pos_ += 4;
    return v;
  }
  void skip(size_t n) { pos_ += n; }

  std::span<const uint8_t> tail() const {
    return std::span<const uint8_t>(bytes_).subspan(pos_);
  }

 private:
  const std::vector<uint8_t>& bytes_;
  size_t pos_ = 0;
};

int snap_duration(int64_t ticks) {
  int best = kLegalDurations[0];
  int64_t best_dist = std::llabs(ticks - best);
  for (int d : kLegalDurations) {
    int64_t dist = std::llabs(ticks - d);
    if (dist < best_dist || (dist == best_dist && d > best)) {
      best = d;
      best_dist = dist;
    }
  }
  return best;
}

int snap_drum_pitch(int pitch) {
  int best = kDrumPitches[0];
  int best_dist = std::abs(pitch - best);
  for (int p : kDrumPitches) {
    int dist = std::abs(pitch - p);
    if (dist < best_dist) {
      best = p;
      best_dist = dist;
    }
  }
  return best;
}

int data_bytes_for_status(uint8_t status) {
  switch (status & 0xF0) {
    case 0xC0:
    case 0xD0: return 1;
    default:   return 2;
  }
}

struct ParsedFile {
  int division;
  std::vector<Candidate> candidates;
  int dropped_unterminated = 0;
};

Result<ParsedFile, MidiError> parse_tracks(const std::vector<uint8_t>& bytes) {
  ByteReader r(bytes);
  if (!r.need(14)) {
    return MidiError{MidiErrorKind::BadHeader, "file shorter than an SMF header"};
  }
  if (!(r.u8() == 'M' && r.u8() == 'T' && r.u8() == 'h' && r.u8() == 'd')) {
    return MidiError{MidiErrorKind::BadHeader, "missing MThd magic"};
  }
  uint32_t header_len = r.u32();
  if (header_len < 6 || !r.need(header_len)) {
    return MidiError{MidiErrorKind::BadHeader, "malformed MThd length"};
  }
  r.u16();  // format; 0/1/2 are all parsed the same way here
  r.u16();  // declared track count; actual chunks are authoritative
  uint16_t division = r.u16();
  r.skip(header_len - 6);
  if (division & 0x8000) {
    return MidiError{MidiErrorKind::UnsupportedDivision,
                     "SMPTE division not supported"};
  }
  if (division == 0) {
    return MidiError{MidiErrorKind::BadHeader, "division is zero"};
  }

  ParsedFile parsed;
  parsed.division = division;

  // (track, channel, pitch) -> FIFO of pending Note-Ons (start, velocity).
  std::map<std::tuple<int, int, int>, std::deque<std::pair<int64_t, int>>> pending;
  std::map<std::pair<int, int>, std::vector<RawNote>> grouped;

  auto note_on = [&](int track, int channel, int pitch, int64_t tick, int vel) {
    pending[{track, channel, pitch}].emplace_back(tick, vel);
  };
  auto note_off = [&](int track, int channel, int pitch, int64_t tick) {
    auto it = pending.find({track, channel, pitch});
    if (it == pending.end() || it->second.empty()) return;  // orphan off
    auto [start, vel] = it->second.front();
    it->second.pop_front();
    grouped[{track, channel}].push_back(
        {pitch, vel, start, std::max<int64_t>(tick - start, 0)});
  };

  int track_index = -1;
  while (r.remaining() > 0) {
    if (!r.need(8)) {
      return MidiError{MidiErrorKind::TruncatedChunk, "truncated chunk header"};
    }
    char c0 = static_cast<char>(r.u8()), c1 = static_cast<char>(r.u8());
    char c2 = static_cast<char>(r.u8()), c3 = static_cast<char>(r.u8());
    uint32_t chunk_len = r.u32();
    if (!r.need(chunk_len)) {
      return MidiError{MidiErrorKind::TruncatedChunk,
                       "chunk body shorter than declared length"};
    }
    if (!(c0 == 'M' && c1 == 'T' && c2 == 'r' && c3 == 'k')) {
      r.skip(chunk_len);  // alien chunk types are skipped per the SMF spec
      continue;
    }
    ++track_index;

    const size_t track_end = r.pos() + chunk_len;
    int64_t now = 0;
    uint8_t running_status = 0;
    while (r.pos() < track_end) {
      auto delta = decode_vlq(r.tail());
      if (!delta) {
        bool runaway = delta.error().rfind("RunawayVlq", 0) == 0;
        return MidiError{runaway ? MidiErrorKind::RunawayVlq
                                 : MidiErrorKind::TruncatedChunk,
                         delta.error()};
      }
      r.skip(delta.value().consumed);
      now += delta.value().value;
      if (r.pos() >= track_end) {
        return MidiError{MidiErrorKind::TruncatedChunk, "delta with no event"};
      }

      uint8_t status = r.peek();
      if (status >= 0x80) {
        r.skip(1);
      } else if (running_status >= 0x80) {
        status = running_status;  // data byte re-read below
      } else {
        return MidiError{MidiErrorKind::TruncatedChunk,
                         "data byte with no running status"};
      }

      if (status == 0xFF) {  // meta event
        if (!r.need(1)) return MidiError{MidiErrorKind::TruncatedChunk, "truncated meta"};
        uint8_t meta_type = r.u8();
        auto len = decode_vlq(r.tail());
        if (!len) return MidiError{MidiErrorKind::TruncatedChunk, "truncated meta length"};
        r.skip(len.value().consumed);
        if (!r.need(len.value().value)) {
          return MidiError{MidiErrorKind::TruncatedChunk, "truncated meta body"};
        }
        r.skip(len.value().value);
        running_status = 0;
        if (meta_type == 0x2F) break;  // End of track
        continue;
      }
      if (status == 0xF0 || status == 0xF7) {  // sysex, skipped
        auto len = decode_vlq(r.tail());
        if (!len) return MidiError{MidiErrorKind::TruncatedChunk, "truncated sysex length"};
        r.skip(len.value().consumed);
        if (!r.need(len.value().value)) {
          return MidiError{MidiErrorKind::TruncatedChunk, "truncated sysex body"};
        }
        r.skip(len.value().value);
        running_status = 0;
        continue;
      }
      if (status >= 0xF0) {
        // Other system messages carry no data bytes in files.
        running_status = 0;
        continue;
      }

      running_status = status;
      const int need = data_bytes_for_status(status);
      if (!r.need(static_cast<size_t>(need))) {
        return MidiError{MidiErrorKind::TruncatedChunk, "truncated channel event"};
      }
      uint8_t d1 = r.u8();
      uint8_t d2 = need == 2 ? r.u8() : 0;
      const int channel = status & 0x0F;
      switch (status & 0xF0) {
        case 0x90:
          if (d2 > 0) {
            note_on(track_index, channel, d1, now, d2);
          } else {
            note_off(track_index, channel, d1, now);  // vel-0 NoteOn is an off
          }
          break;
        case 0x80:
          note_off(track_index, channel, d1, now);
          break;
        default:
          break;  // aftertouch, CC, program, pitch bend: ignored
      }
    }
    // Jump to the declared chunk end even if we stopped at End-Of-Track.
    if (r.pos() < track_end) r.skip(track_end - r.pos());
  }

  for (auto& [key, stack] : pending) {
    parsed.dropped_unterminated += static_cast<int>(stack.size());
  }
  for (auto& [key, notes] : grouped) {
    parsed.candidates.push_back({key.first, key.second, std::move(notes)});
  }
  if (parsed.candidates.empty()) {
    return MidiError{MidiErrorKind::NoMappableTracks, "no notes in any track"};
  }
  return parsed;
}

// Heuristic role assignment over the candidates that were not claimed by an
// explicit mapping. See header for the rules; every decision is reported.
void assign_roles_heuristically(const std::vector<Candidate>& candidates,
                                std::map<int, TrackRole>& chosen,
                                RoleMappingReport& report) {
  std::vector<int> open;
  for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
    if (!chosen.contains(i)) open.push_back(i);
  }
  auto claim = [&](int idx, TrackRole role, const std::string& why) {
    chosen[idx] = role;
    open.erase(std::find(open.begin(), open.end(), idx));
    std::ostringstream note;
    note << role_name(role) << " <- track " << candidates[idx].track_index
         << " channel " << candidates[idx].channel + 1 << " (" << why << ")";
    report.notes.push_back(note.str());
  };
  auto taken = [&](TrackRole role) {
    for (const auto& [idx, r] : chosen) {
      if (r == role) return true;
    }
    return false;
  };

  if (!taken(TrackRole::Rhythm)) {
    int best = -1;
    for (int idx : open) {
      if (candidates[idx].channel != kDrumChannel) continue;
      if (best < 0 || candidates[idx].notes.size() > candidates[best].notes.size()) {
        best = idx;
      }
    }
    if (best >= 0) claim(best, TrackRole::Rhythm, "channel 10");
  }
  if (!taken(TrackRole::Bass) && !open.empty()) {
    int best = -1;
    double best_mean = 0;
    for (int idx : open) {
      double sum = 0;
      for (const RawNote& n : candidates[idx].notes) sum += n.pitch;
      double mean = sum / static_cast<double>(candidates[idx].notes.size());
      if (best < 0 || mean < best_mean) {
        best = idx;
        best_mean = mean;
      }
    }
    std::ostringstream why;
    why << "lowest mean pitch " << best_mean;
    claim(best, TrackRole::Bass, why.str());
  }
  if (!taken(TrackRole::Chords) && !open.empty()) {
    int best = -1;
    int best_poly = 0;
    for (int idx : open) {
      std::map<int64_t, int> per_start;
      int poly = 0;
      for (const RawNote& n : candidates[idx].notes) {
        poly = std::max(poly, ++per_start[n.start]);
      }
      if (best < 0 || poly > best_poly) {
        best = idx;
        best_poly = poly;
      }
    }
    std::ostringstream why;
    why << "max simultaneous notes " << best_poly;
    claim(best, TrackRole::Chords, why.str());
  }
  if (!taken(TrackRole::Melody) && !open.empty()) {
    int best = -1;
    for (int idx : open) {
      if (best < 0 || candidates[idx].notes.size() > candidates[best].notes.size()) {
        best = idx;
      }
    }
    claim(best, TrackRole::Melody, "highest note count of the rest");
  }
  for (int idx : open) {
    std::ostringstream note;
    note << "unmapped: track " << candidates[idx].track_index << " channel "
         << candidates[idx].channel + 1 << " (" << candidates[idx].notes.size()
         << " notes)";
    report.notes.push_back(note.str());
  }
}

}  // namespace

Result<IngestedSong, MidiError> midi_to_song(
    const std::vector<uint8_t>& bytes,
    const std::optional<TrackRoleMap>& mapping, SongMeta meta) {
  auto parsed_result = parse_tracks(bytes);
  if (!parsed_result) return parsed_result.error();
  ParsedFile parsed = parsed_result.take();

  RoleMappingReport report;
  if (parsed.dropped_unterminated > 0) {
    report.notes.push_back(std::to_string(parsed.dropped_unterminated) +
                           " unterminated note-ons dropped");
  }

  // candidate index -> role
  std::map<int, TrackRole> chosen;
  if (mapping) {
    for (const auto& [track, role] : *mapping) {
      for (int i = 0; i < static_cast<int>(parsed.candidates.size()); ++i) {
        if (parsed.candidates[i].track_index == track) chosen[i] = role;
      }
    }
  } else {
    assign_roles_heuristically(parsed.candidates, chosen, report);
  }
  if (chosen.empty()) {
    return MidiError{MidiErrorKind::NoMappableTracks,
                     "explicit mapping matched no source tracks"};
  }

  Song song;
  song.meta = std::move(meta);
  int drum_remapped = 0;
  int dropped_short = 0;
  const int64_t div = parsed.division;
  for (const auto& [idx, role] : chosen) {
    auto& dest = song.tracks[role];
    for (const RawNote& raw : parsed.candidates[idx].notes) {
      // Rescale to 480 TPQN with round-half-up.
      int64_t start = (raw.start * kSmfDivision + div / 2) / div;
      int64_t duration = (raw.duration * kSmfDivision + div / 2) / div;
      if (duration < 120) {
        ++dropped_short;
        continue;
      }
      NoteEvent note;
      note.start = static_cast<int>(std::clamp<int64_t>(start, 0, kMaxStartTick));
      note.duration = snap_duration(duration);
      note.velocity = std::clamp(raw.velocity, 0, 127);
      note.pitch = std::clamp(raw.pitch, 0, 127);
      if (role == TrackRole::Rhythm) {
        int snapped = snap_drum_pitch(note.pitch);
        if (snapped != note.pitch) ++drum_remapped;
        note.pitch = snapped;
      }
      dest.push_back(note);
    }
    report.assignments[parsed.candidates[idx].track_index] = role;
  }
  song.sort_tracks();
  if (dropped_short > 0) {
    report.notes.push_back(std::to_string(dropped_short) +
                           " notes shorter than 120 ticks dropped");
  }
  if (drum_remapped > 0) {
    report.notes.push_back(std::to_string(drum_remapped) +
                           " rhythm pitches snapped to 35/38/42");
  }

  auto errors = validate_song(song);
  if (!errors.empty()) {
    std::ostringstream msg;
    msg << "mapped song fails validation: " << to_string(errors.front());
    if (errors.size() > 1) msg << " (+" << errors.size() - 1 << " more)";
    return MidiError{MidiErrorKind::NoMappableTracks, msg.str()};
  }
  return IngestedSong{std::move(song), std::move(report)};
}

}  // namespace midistring
