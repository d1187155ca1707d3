#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "core/result.h"
#include "core/song.h"

namespace midistring {

inline constexpr int kRollSteps = 128;   // 8 bars at 60 ticks per step
inline constexpr int kRollPitches = 128;
inline constexpr int kRollChannels = 4;  // melody, chords, bass, rhythm
inline constexpr int kTicksPerStep = 60;
inline constexpr int kPhraseSteps = 64;  // bars 1-4 / bars 5-8

// Binary occupancy tensor [channel][time][pitch], channel order
// melody, chords, bass, rhythm.
struct RollTensor {
  std::vector<uint8_t> data =
      std::vector<uint8_t>(kRollChannels * kRollSteps * kRollPitches, 0);

  uint8_t& at(int channel, int step, int pitch) {
    return data[(channel * kRollSteps + step) * kRollPitches + pitch];
  }
  uint8_t at(int channel, int step, int pitch) const {
    return data[(channel * kRollSteps + step) * kRollPitches + pitch];
  }
  int64_t active_cells() const;

  bool operator==(const RollTensor&) const = default;
};

// Binary occupancy matrix [time=64][pitch=128] for melody phrases.
struct PhraseRoll {
  std::vector<uint8_t> data = std::vector<uint8_t>(kPhraseSteps * kRollPitches, 0);

  uint8_t& at(int step, int pitch) { return data[step * kRollPitches + pitch]; }
  uint8_t at(int step, int pitch) const { return data[step * kRollPitches + pitch]; }
  int64_t active_cells() const;

  bool operator==(const PhraseRoll&) const = default;
};

// 60 ticks per step (7680 ticks / 128 steps). Ticks at or past 7680 fall
// outside the grid and return nullopt for the caller to clip.
std::optional<int> tick_to_step(int tick);

// Rasterizes a validated song onto the 4x128x128 grid: each note covers
// duration/60 steps from its start step, clipped at step 128. Overlaps
// saturate at 1.
RollTensor song_to_roll(const Song& song);

enum class PhraseSkipReason { EmptyHalf };

// Splits the melody channel at step 64 into (source, target) phrase rolls.
// Songs whose melody is silent in either half are skipped.
Result<std::pair<PhraseRoll, PhraseRoll>, PhraseSkipReason> melody_phrases(
    const Song& song);

}  // namespace midistring
