#include "roll/roll.h"

#include <numeric>
#include <stdexcept>

#include "core/validate.h"

namespace midistring {

int64_t RollTensor::active_cells() const {
  return std::accumulate(data.begin(), data.end(), int64_t{0});
}

int64_t PhraseRoll::active_cells() const {
  return std::accumulate(data.begin(), data.end(), int64_t{0});
}

std::optional<int> tick_to_step(int tick) {
  if (tick >= kRollSteps * kTicksPerStep) return std::nullopt;
  return tick / kTicksPerStep;
}

RollTensor song_to_roll(const Song& song) {
  if (!song_is_valid(song)) {
    throw std::invalid_argument("song_to_roll: song fails validation");
  }
  RollTensor roll;
  for (int channel = 0; channel < kRollChannels; ++channel) {
    for (const NoteEvent& note : song.notes(kTrackRoles[channel])) {
      auto start_step = tick_to_step(note.start);
      if (!start_step) continue;  // note begins past the grid
      const int steps = note.duration / kTicksPerStep;
      const int end = std::min(*start_step + steps, kRollSteps);
      for (int t = *start_step; t < end; ++t) {
        roll.at(channel, t, note.pitch) = 1;
      }
    }
  }
  return roll;
}

Result<std::pair<PhraseRoll, PhraseRoll>, PhraseSkipReason> melody_phrases(
    const Song& song) {
  RollTensor roll = song_to_roll(song);
  PhraseRoll source, target;
  for (int t = 0; t < kPhraseSteps; ++t) {
    for (int p = 0; p < kRollPitches; ++p) {
      source.at(t, p) = roll.at(0, t, p);
      target.at(t, p) = roll.at(0, t + kPhraseSteps, p);
    }
  }
  if (source.active_cells() == 0 || target.active_cells() == 0) {
    return PhraseSkipReason::EmptyHalf;
  }
  return std::make_pair(std::move(source), std::move(target));
}

}  // namespace midistring
