#include "llm/prompts.h"

#include <sstream>

#include "codec/song_json.h"

namespace midistring {

double temperature_for_index(int index) {
  return 0.6 + 0.04 * (index % 10);
}

Result<std::string, Error> build_generation_prompt(
    const std::string& genre, const std::string& style,
    const std::string& mood, const Taxonomy& taxonomy) {
  if (!taxonomy.genre_index(genre)) return Error("unknown genre label: " + genre);
  if (!taxonomy.style_index(style)) return Error("unknown style label: " + style);
  if (!taxonomy.mood_index(mood)) return Error("unknown mood label: " + mood);

  std::ostringstream out;
  out << "Compose a " << genre << " song in " << style
      << " manner. The overall mood should be " << mood << ".\n"
      << "Write an 8-bar piece in 4/4 time with four tracks: melody, chords, "
         "bass, and rhythm.\n"
      << "Encode the piece as a JSON object with exactly the keys \"melody\", "
         "\"chords\", \"bass\", and \"rhythm\". Each track is a list of "
         "(pitch, duration, velocity, start_time) tuples.\n"
      << "Constraints:\n"
      << "- pitch values range from 0 to 127\n"
      << "- duration values are 240 (eighth note), 480 (quarter note), or 960 "
         "(half note) ticks\n"
      << "- velocity ranges from 0 to 127\n"
      << "- start times span 0 to 7680 ticks\n"
      << "- the rhythm track may only use drum pitches 35 (kick), 38 (snare), "
         "and 42 (hi-hat)\n"
      << "- every track must contain at least one note\n"
      << "Return a pure JSON string as output, with no explanations, no "
         "markdown fences, and no text outside the JSON object.";
  return out.str();
}

std::string build_recognition_prompt(const Song& song, LabelTask task) {
  std::string prompt(task == LabelTask::Genre ? kRecognitionQuestionGenre
                                              : kRecognitionQuestionStyle);
  prompt += "\n";
  prompt += serialize_song(song);
  return prompt;
}

}  // namespace midistring
