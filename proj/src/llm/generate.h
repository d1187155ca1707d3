#pragma once

#include <optional>
#include <string>

#include "core/result.h"
#include "core/song.h"
#include "core/taxonomy.h"
#include "data/manifest.h"
#include "llm/backend.h"

namespace midistring {

struct GenerationRecord {
  SongMeta meta;
  int attempts = 0;
  bool success = false;
  std::string error;  // last failure when unsuccessful
};

struct GenerationOutcome {
  std::optional<Song> song;
  GenerationRecord record;
};

// One prompt-complete-extract-parse-validate loop with retries. The meta's
// temperature follows the song-index schedule; the full prompt is resent on
// every attempt (no conversation state).
GenerationOutcome generate_song(const LlmBackend& backend,
                                const Taxonomy& taxonomy,
                                const std::string& genre,
                                const std::string& style,
                                const std::string& mood, int index,
                                int max_attempts = 3);

struct SweepConfig {
  int songs_per_combo = 50;
  std::string out_dir;
  uint64_t seed = 0;
  int concurrency = 1;
  bool resume = false;
  int max_attempts = 3;
  bool verbose = false;
};

// Full dataset sweep over |genres| x |styles| x songs_per_combo. Moods are a
// seeded per-song choice. Each success writes <genre>/<style>/<index>
// .song.json and .mid plus a manifest row; failures get a manifest row and
// never abort the sweep. Backend calls run concurrently up to
// config.concurrency, but rows land in (genre, style, index) order, so equal
// seeds give byte-identical manifests. With resume, triples already present
// in the manifest are skipped.
Result<Manifest, std::string> generate_dataset(const LlmBackend& backend,
                                               const Taxonomy& taxonomy,
                                               const SweepConfig& config);

}  // namespace midistring
