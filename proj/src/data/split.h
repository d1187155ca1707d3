#pragma once

#include <array>
#include <string>

#include "core/result.h"
#include "data/manifest.h"

namespace midistring {

enum class Stratify { Genre, Style, GenreStyle };

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  uint64_t seed = 0;
  Stratify stratify = Stratify::GenreStyle;
};

struct SplitResult {
  std::array<Manifest, 3> parts;  // train, val, test
  std::vector<std::string> warnings;
};

// Seeded stratified partition of the manifest's successful rows. Each
// stratum is shuffled and divided by largest remainder, so per-stratum
// counts differ from the exact ratios by less than one row. Strata smaller
// than the number of nonzero ratios are assigned best-effort with a warning.
Result<SplitResult, std::string> split_dataset(const Manifest& manifest,
                                               const SplitSpec& spec);

}  // namespace midistring
