#pragma once

#include <string>
#include <vector>

#include "core/result.h"
#include "core/song.h"
#include "core/validate.h"

namespace midistring {

enum class CodecErrorKind { MalformedJson, WrongShape, ValidationFailed, NoJsonFound };

struct CodecError {
  CodecErrorKind kind;
  std::string message;
  std::vector<ValidationError> validation_errors;  // set for ValidationFailed
};

std::string_view codec_error_kind_name(CodecErrorKind kind);

// Canonical JSON form of a validated song: fixed key order
// melody,chords,bass,rhythm; tuples as [pitch, duration, velocity, start];
// single space after separators; no trailing newline. Equal songs yield
// byte-identical strings. Throws std::invalid_argument on an invalid song.
std::string serialize_song(const Song& song);

// Inverse of serialize_song, tolerant of whitespace, key order, unknown keys,
// and unsorted notes (tracks are re-sorted before validation). Success
// implies the returned Song passes validate_song.
Result<Song, CodecError> parse_song(const std::string& text, SongMeta meta);

}  // namespace midistring
