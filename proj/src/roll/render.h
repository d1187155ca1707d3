#pragma once

#include <string>

#include "core/result.h"
#include "roll/roll.h"

namespace midistring {

// Renders a roll as an uncompressed 24-bit BMP: time left to right, pitch
// bottom to top, one color per channel, 4x4 pixels per cell. Equal rolls
// produce byte-identical files.
Result<bool, std::string> render_roll(const RollTensor& roll,
                                      const std::string& path);
Result<bool, std::string> render_roll(const PhraseRoll& roll,
                                      const std::string& path);

}  // namespace midistring
