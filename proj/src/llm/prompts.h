#pragma once

#include <string>

#include "core/result.h"
#include "core/song.h"
#include "core/taxonomy.h"

namespace midistring {

// 0.6 + 0.04 * (index mod 10): period 10, values 0.60 through 0.96.
double temperature_for_index(int index);

// Generation prompt: "<genre> song in <style> manner" plus the mood word,
// the full track/tuple/value-set constraints, and the demand for a pure
// JSON string. Labels must resolve in the taxonomy.
Result<std::string, Error> build_generation_prompt(
    const std::string& genre, const std::string& style,
    const std::string& mood, const Taxonomy& taxonomy);

// Recognition prompt: the classification question followed by the song's
// canonical JSON. Requires a valid song.
std::string build_recognition_prompt(const Song& song, LabelTask task);

inline constexpr std::string_view kRecognitionQuestionGenre =
    "What genre is the song described in the following JSON for MIDI file?";
inline constexpr std::string_view kRecognitionQuestionStyle =
    "What style is the song described in the following JSON for MIDI file?";

}  // namespace midistring
