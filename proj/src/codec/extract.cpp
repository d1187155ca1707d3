#include "codec/extract.h"

namespace midistring {

Result<std::string, CodecError> extract_json_payload(const RawCompletion& raw) {
  const std::string& text = raw.text;
  for (size_t open = text.find('{'); open != std::string::npos;
       open = text.find('{', open + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = open; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          return text.substr(open, i - open + 1);
        }
      }
    }
    // Unbalanced from this opener; try the next one.
  }
  return CodecError{CodecErrorKind::NoJsonFound,
                    "no balanced JSON object in completion", {}};
}

}  // namespace midistring
