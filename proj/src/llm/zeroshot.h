#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/result.h"
#include "core/song.h"
#include "core/taxonomy.h"
#include "llm/backend.h"

namespace midistring {

struct ZeroShotResult {
  std::optional<std::string> label;  // set only on a strict single match
  std::string raw_reply;
};

// Strict-match scan of a reply's final classification segment (text after
// the last "classification" marker, else the last non-empty line): exactly
// one task-taxonomy label must occur there, otherwise the reply is
// unmatched. Shorter labels subsumed by a longer label's occurrence do not
// count ("pop latin" names one style, not two).
ZeroShotResult match_reply_strict(const std::string& reply,
                                  const Taxonomy& taxonomy, LabelTask task);

// Asks the backend to classify a song's JSON and applies the strict matcher.
Result<ZeroShotResult, BackendError> zero_shot_classify(
    const LlmBackend& backend, const Song& song, LabelTask task,
    const Taxonomy& taxonomy);

}  // namespace midistring
