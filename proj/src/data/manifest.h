#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "core/result.h"

namespace midistring {

// One generation outcome. Paths are stored relative to the manifest file.
struct ManifestRow {
  std::string id;  // "<genre>/<style>/<index>"
  std::string genre;
  std::string style;
  std::string mood;
  double temperature = 0.0;
  int song_index = 0;
  std::string json_path;
  std::string midi_path;
  int note_count = 0;
  int attempts = 0;
  bool success = false;
  std::string error;        // last error message on failure
  std::string json_sha256;  // content hashes, audited by `validate`
  std::string midi_sha256;

  bool operator==(const ManifestRow&) const = default;
};

std::string make_song_id(const std::string& genre, const std::string& style,
                         int index);

struct Manifest {
  std::vector<ManifestRow> rows;

  bool contains(const std::string& id) const;
  const ManifestRow* find(const std::string& id) const;
  std::vector<ManifestRow> successes() const;
};

std::string manifest_row_to_json(const ManifestRow& row);
Result<ManifestRow, std::string> manifest_row_from_json(const std::string& line);

// Line-delimited JSON, append-only. The reader rejects duplicate song ids
// and reports corrupt rows with their 1-based line number.
Result<Manifest, std::string> read_manifest(const std::string& path);

// Serialized appender; each row is flushed as one write.
class ManifestWriter {
 public:
  // truncate=false appends to an existing manifest (resume).
  Result<bool, std::string> open(const std::string& path, bool truncate);
  Result<bool, std::string> append(const ManifestRow& row);
  void close();

 private:
  std::ofstream out_;
};

}  // namespace midistring
