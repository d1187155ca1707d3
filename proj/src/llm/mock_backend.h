#pragma once

#include <string>

#include "core/rng.h"
#include "core/taxonomy.h"
#include "llm/backend.h"

namespace midistring {

// Offline deterministic backend. Completions are a pure function of
// (prompt, temperature, seed).
//
// Generation prompts are answered with a valid JSON song whose statistical
// signature encodes the requested class pair: the melody/bass pitch band is
// a function of the genre, the chord band and drum pattern a function of the
// style, with seeded jitter scaled by temperature. Classes are therefore
// separable by construction.
//
// Recognition prompts are answered by inverting those templates from the
// embedded JSON and replying "Classification: <label>".
class MockBackend : public LlmBackend {
 public:
  MockBackend(uint64_t seed, Taxonomy taxonomy);

  Result<RawCompletion, BackendError> complete(
      const CompletionRequest& request) const override;
  std::string name() const override { return "mock"; }

  // Class templates, exposed so tests can assert separability directly.
  int genre_pitch_base(const std::string& genre) const;
  int style_chord_base(const std::string& style) const;

 private:
  std::string answer_generation(const CompletionRequest& request) const;
  std::string answer_recognition(const std::string& prompt,
                                 LabelTask task) const;

  uint64_t seed_;
  Taxonomy taxonomy_;
};

}  // namespace midistring
