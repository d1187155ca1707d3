#include "llm/generate.h"

#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "codec/extract.h"
#include "codec/song_json.h"
#include "core/hash.h"
#include "core/rng.h"
#include "llm/prompts.h"
#include "midi/smf.h"

namespace midistring {

GenerationOutcome generate_song(const LlmBackend& backend,
                                const Taxonomy& taxonomy,
                                const std::string& genre,
                                const std::string& style,
                                const std::string& mood, int index,
                                int max_attempts) {
  GenerationOutcome outcome;
  outcome.record.meta = {genre, style, mood, temperature_for_index(index),
                         index,
                         backend.name() == "mock" ? SongSource::MockGenerated
                                                  : SongSource::LlmGenerated};

  auto prompt = build_generation_prompt(genre, style, mood, taxonomy);
  if (!prompt) {
    outcome.record.attempts = 1;
    outcome.record.error = prompt.error().message;
    return outcome;
  }
  CompletionRequest request{prompt.value(), outcome.record.meta.temperature,
                            kGenerationMaxTokens};

  for (int attempt = 1; attempt <= std::max(1, max_attempts); ++attempt) {
    outcome.record.attempts = attempt;
    auto completion = backend.complete(request);
    if (!completion) {
      outcome.record.error = "backend: " + completion.error().message;
      continue;
    }
    auto payload = extract_json_payload(completion.value());
    if (!payload) {
      outcome.record.error =
          std::string(codec_error_kind_name(payload.error().kind)) + ": " +
          payload.error().message;
      continue;
    }
    auto parsed = parse_song(payload.value(), outcome.record.meta);
    if (!parsed) {
      outcome.record.error =
          std::string(codec_error_kind_name(parsed.error().kind)) + ": " +
          parsed.error().message;
      continue;
    }
    outcome.song = parsed.take();
    outcome.record.success = true;
    outcome.record.error.clear();
    return outcome;
  }
  return outcome;
}

namespace {

struct WorkItem {
  int genre_index;
  int style_index;
  int song_index;
};

struct WorkResult {
  ManifestRow row;
  std::string json_text;           // empty on failure
  std::vector<uint8_t> midi_bytes; // empty on failure
};

std::string pick_mood(const Taxonomy& taxonomy, uint64_t seed, int genre_index,
                      int style_index, int song_index) {
  uint64_t combo = static_cast<uint64_t>(genre_index) * 1000 + style_index;
  Rng rng(mix_seed(mix_seed(seed, "mood"), combo, song_index));
  return taxonomy.moods[rng.next_below(taxonomy.moods.size())];
}

}  // namespace

Result<Manifest, std::string> generate_dataset(const LlmBackend& backend,
                                               const Taxonomy& taxonomy,
                                               const SweepConfig& config) {
  namespace fs = std::filesystem;
  if (config.out_dir.empty()) return std::string("output directory not set");
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) return "cannot create " + config.out_dir + ": " + ec.message();
  const fs::path out_dir(config.out_dir);
  const fs::path manifest_path = out_dir / "manifest.jsonl";

  Manifest existing;
  if (config.resume && fs::exists(manifest_path)) {
    auto loaded = read_manifest(manifest_path.string());
    if (!loaded) return "resume: " + loaded.error();
    existing = loaded.take();
  }

  std::vector<WorkItem> work;
  for (int g = 0; g < static_cast<int>(taxonomy.genres.size()); ++g) {
    for (int s = 0; s < static_cast<int>(taxonomy.styles.size()); ++s) {
      for (int i = 0; i < config.songs_per_combo; ++i) {
        if (config.resume &&
            existing.contains(make_song_id(taxonomy.genres[g],
                                           taxonomy.styles[s], i))) {
          continue;
        }
        work.push_back({g, s, i});
      }
    }
  }

  ManifestWriter writer;
  if (auto opened = writer.open(manifest_path.string(), !config.resume); !opened) {
    return opened.error();
  }

  Manifest manifest = existing;
  std::string io_error;

  const int threads = std::max(1, config.concurrency);
#pragma omp parallel for ordered schedule(dynamic, 1) num_threads(threads)
  for (size_t w = 0; w < work.size(); ++w) {
    const WorkItem item = work[w];
    const std::string& genre = taxonomy.genres[item.genre_index];
    const std::string& style = taxonomy.styles[item.style_index];
    const std::string mood = pick_mood(taxonomy, config.seed, item.genre_index,
                                       item.style_index, item.song_index);

    GenerationOutcome outcome = generate_song(
        backend, taxonomy, genre, style, mood, item.song_index,
        config.max_attempts);

    WorkResult result;
    result.row.id = make_song_id(genre, style, item.song_index);
    result.row.genre = genre;
    result.row.style = style;
    result.row.mood = mood;
    result.row.temperature = outcome.record.meta.temperature;
    result.row.song_index = item.song_index;
    result.row.attempts = outcome.record.attempts;
    result.row.success = outcome.record.success;
    result.row.error = outcome.record.error;
    if (outcome.song) {
      const fs::path rel =
          fs::path(genre) / style / std::to_string(item.song_index);
      result.row.json_path = (rel.string() + ".song.json");
      result.row.midi_path = (rel.string() + ".mid");
      result.row.note_count = song_note_count(*outcome.song);
      result.json_text = serialize_song(*outcome.song);
      result.midi_bytes = song_to_midi(*outcome.song);
      result.row.json_sha256 = sha256_hex(result.json_text);
      result.row.midi_sha256 = sha256_hex(result.midi_bytes);
    }

#pragma omp ordered
    {
      if (io_error.empty()) {
        if (result.row.success) {
          const fs::path json_path = out_dir / result.row.json_path;
          fs::create_directories(json_path.parent_path(), ec);
          std::ofstream json_out(json_path, std::ios::binary | std::ios::trunc);
          json_out << result.json_text;
          std::ofstream midi_out(out_dir / result.row.midi_path,
                                 std::ios::binary | std::ios::trunc);
          midi_out.write(reinterpret_cast<const char*>(result.midi_bytes.data()),
                         static_cast<std::streamsize>(result.midi_bytes.size()));
          if (!json_out || !midi_out) {
            io_error = "write failed under " + config.out_dir;
          }
        }
        if (io_error.empty()) {
          if (auto appended = writer.append(result.row); !appended) {
            io_error = appended.error();
          } else {
            manifest.rows.push_back(result.row);
            if (config.verbose) {
              std::fprintf(stderr, "[%zu/%zu] %s %s\n", manifest.rows.size(),
                           work.size() + existing.rows.size(),
                           result.row.id.c_str(),
                           result.row.success ? "ok" : "FAILED");
            }
          }
        }
      }
    }
  }

  writer.close();
  if (!io_error.empty()) return io_error;
  return manifest;
}

}  // namespace midistring
