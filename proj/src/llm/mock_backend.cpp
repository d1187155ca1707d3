#include "llm/mock_backend.h"

#include <algorithm>
#include <bit>
#include <sstream>

#include "codec/extract.h"
#include "codec/song_json.h"
#include "core/validate.h"
#include "llm/prompts.h"

namespace midistring {

namespace {

constexpr int kGenreBaseOrigin = 36;  // melody band origin
constexpr int kGenreBaseStep = 3;
constexpr int kStyleBaseOrigin = 24;  // chord band origin
constexpr int kStyleBaseStep = 3;
constexpr int kPentatonic[5] = {0, 2, 4, 7, 9};

uint64_t fnv1a(std::string_view text) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string find_between(const std::string& text, std::string_view start,
                         std::string_view end) {
  auto from = text.find(start);
  if (from == std::string::npos) return "";
  from += start.size();
  auto to = text.find(end, from);
  if (to == std::string::npos) return "";
  return text.substr(from, to - from);
}

}  // namespace

MockBackend::MockBackend(uint64_t seed, Taxonomy taxonomy)
    : seed_(seed), taxonomy_(std::move(taxonomy)) {}

int MockBackend::genre_pitch_base(const std::string& genre) const {
  auto index = taxonomy_.genre_index(genre);
  int i = index ? *index
                : static_cast<int>(fnv1a(normalize_label(genre)) %
                                   std::max<size_t>(taxonomy_.genres.size(), 13));
  return kGenreBaseOrigin + kGenreBaseStep * i;
}

int MockBackend::style_chord_base(const std::string& style) const {
  auto index = taxonomy_.style_index(style);
  int i = index ? *index
                : static_cast<int>(fnv1a(normalize_label(style)) %
                                   std::max<size_t>(taxonomy_.styles.size(), 25));
  return kStyleBaseOrigin + kStyleBaseStep * i;
}

std::string MockBackend::answer_generation(
    const CompletionRequest& request) const {
  const std::string genre =
      normalize_label(find_between(request.prompt, "Compose a ", " song in "));
  const std::string style =
      normalize_label(find_between(request.prompt, " song in ", " manner"));
  const std::string mood = normalize_label(
      find_between(request.prompt, "mood should be ", "."));

  Rng rng(mix_seed(seed_, fnv1a(request.prompt),
                   std::bit_cast<uint64_t>(request.temperature)));

  // Jitter widens with temperature; 0.6 is the calm end of the schedule.
  const double heat = std::clamp((request.temperature - 0.6) / 0.4, 0.0, 1.5);
  const bool energetic = mood == "energetic" || mood == "happy";

  Song song;
  const int melody_base = genre_pitch_base(genre);
  const int chord_base = style_chord_base(style);
  const int bass_base = std::max(12, melody_base - 12);
  const int style_hash = static_cast<int>(fnv1a(style) % 4);

  // Melody: monophonic walk over the genre's pentatonic band. The walk
  // advances by the chosen duration, so notes never overlap. The opening
  // note anchors the band root.
  {
    auto& notes = song.tracks[TrackRole::Melody];
    int cursor = 0;
    while (cursor < kMaxStartTick) {
      const int degree = notes.empty() ? 0 : kPentatonic[rng.next_below(5)];
      const int octave =
          notes.empty() ? 0 : (rng.next_double() < 0.25 ? 12 : 0);
      const int duration = rng.next_double() < 0.6 ? 240 : 480;
      const int velocity = 70 + (energetic ? 15 : 0) + rng.next_int(-8, 18);
      notes.push_back({melody_base + degree + octave, duration,
                       std::clamp(velocity, 1, 127), cursor});
      cursor += duration;
      if (rng.next_double() < 0.10 + 0.15 * heat) cursor += 240;  // rest
    }
  }

  // Chords: one triad per half bar, root progression rotated by style.
  {
    auto& notes = song.tracks[TrackRole::Chords];
    const int progression[4] = {0, 5, 7, style_hash};
    for (int slot = 0; slot < 8; ++slot) {
      if (slot > 0 && rng.next_double() < 0.06 * heat) continue;
      const int root = chord_base + progression[slot % 4];
      const int velocity = std::clamp(60 + rng.next_int(-6, 10), 1, 127);
      for (int interval : {0, 4, 7}) {
        notes.push_back({root + interval, 960, velocity, slot * 960});
      }
    }
    if (notes.empty()) {
      notes.push_back({chord_base, 960, 64, 0});
    }
  }

  // Bass: root/fifth on the beat grid, pitch band tied to the genre.
  {
    auto& notes = song.tracks[TrackRole::Bass];
    for (int beat = 0; beat < 16; ++beat) {
      if (beat > 0 && rng.next_double() < 0.08 * heat) continue;
      const int pitch = bass_base + (beat % 4 == 2 ? 7 : 0);
      const int velocity = std::clamp(80 + rng.next_int(-10, 10), 1, 127);
      notes.push_back({pitch, 480, velocity, beat * 480});
    }
    if (notes.empty()) {
      notes.push_back({bass_base, 480, 80, 0});
    }
  }

  // Rhythm: backbeat whose kick period and hat density follow the style.
  {
    auto& notes = song.tracks[TrackRole::Rhythm];
    const int kick_period = style_hash % 2 == 0 ? 480 : 960;
    const int hat_period = style_hash < 2 ? 240 : 480;
    for (int t = 0; t < kMaxStartTick; t += kick_period) {
      if (rng.next_double() < 0.05 * heat) continue;
      notes.push_back({35, 240, std::clamp(100 + rng.next_int(-8, 8), 1, 127), t});
    }
    for (int t = 480; t < kMaxStartTick; t += 960) {  // snare on 2 and 4
      if (rng.next_double() < 0.05 * heat) continue;
      notes.push_back({38, 240, std::clamp(92 + rng.next_int(-8, 8), 1, 127), t});
    }
    for (int t = 0; t < kMaxStartTick; t += hat_period) {
      if (rng.next_double() < 0.10 + 0.10 * heat) continue;
      notes.push_back({42, 240, std::clamp(56 + rng.next_int(-10, 10), 1, 127), t});
    }
    if (notes.empty()) {
      notes.push_back({35, 240, 100, 0});
    }
  }

  song.sort_tracks();
  return serialize_song(song);
}

std::string MockBackend::answer_recognition(const std::string& prompt,
                                            LabelTask task) const {
  auto payload = extract_json_payload({prompt});
  if (!payload) return "Classification: unreadable";
  auto parsed = parse_song(payload.value(), {});
  if (!parsed) return "Classification: unreadable";
  const Song& song = parsed.value();

  std::ostringstream out;
  if (task == LabelTask::Genre) {
    int min_pitch = 127;
    for (const NoteEvent& n : song.notes(TrackRole::Melody)) {
      min_pitch = std::min(min_pitch, n.pitch);
    }
    int index = std::clamp((min_pitch - kGenreBaseOrigin + kGenreBaseStep / 2) /
                               kGenreBaseStep,
                           0, static_cast<int>(taxonomy_.genres.size()) - 1);
    out << "The melody occupies a band around MIDI pitch " << min_pitch
        << " over a steady backbeat.\n";
    out << "Classification: " << taxonomy_.genres[index];
  } else {
    int min_pitch = 127;
    for (const NoteEvent& n : song.notes(TrackRole::Chords)) {
      min_pitch = std::min(min_pitch, n.pitch);
    }
    int index = std::clamp((min_pitch - kStyleBaseOrigin + kStyleBaseStep / 2) /
                               kStyleBaseStep,
                           0, static_cast<int>(taxonomy_.styles.size()) - 1);
    out << "The chord voicings sit around MIDI pitch " << min_pitch << ".\n";
    out << "Classification: " << taxonomy_.styles[index];
  }
  return out.str();
}

Result<RawCompletion, BackendError> MockBackend::complete(
    const CompletionRequest& request) const {
  if (request.prompt.starts_with(kRecognitionQuestionGenre)) {
    return RawCompletion{answer_recognition(request.prompt, LabelTask::Genre)};
  }
  if (request.prompt.starts_with(kRecognitionQuestionStyle)) {
    return RawCompletion{answer_recognition(request.prompt, LabelTask::Style)};
  }
  return RawCompletion{answer_generation(request)};
}

}  // namespace midistring
