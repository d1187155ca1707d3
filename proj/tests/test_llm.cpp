#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "codec/song_json.h"
#include "core/validate.h"
#include "data/stats.h"
#include "llm/generate.h"
#include "llm/http_backend.h"
#include "llm/mock_backend.h"
#include "llm/prompts.h"
#include "llm/zeroshot.h"
#include "helpers.h"

using namespace midistring;
using midistring::testing::tiny_taxonomy;

namespace {

// Replies with a fixed script, cycling when exhausted.
class ScriptedBackend : public LlmBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> replies)
      : replies_(std::move(replies)) {}
  Result<RawCompletion, BackendError> complete(
      const CompletionRequest&) const override {
    const std::string& reply = replies_[std::min(calls_, replies_.size() - 1)];
    ++calls_;
    return RawCompletion{reply};
  }
  std::string name() const override { return "scripted"; }
  size_t calls() const { return calls_; }

 private:
  std::vector<std::string> replies_;
  mutable size_t calls_ = 0;
};

Taxonomy full_taxonomy() {
  auto loaded = load_taxonomy(std::string(TEST_SOURCE_DIR) +
                              "/../configs/taxonomy.json");
  REQUIRE(loaded.ok());
  return loaded.value();
}

}  // namespace

TEST_CASE("temperature schedule: 0.6 + 0.04 * (index mod 10)") {
  CHECK(temperature_for_index(0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(temperature_for_index(5) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(temperature_for_index(9) == doctest::Approx(0.96).epsilon(1e-12));
  CHECK(temperature_for_index(10) == doctest::Approx(0.6).epsilon(1e-12));
  for (int i = 0; i < 100; ++i) {
    CHECK(temperature_for_index(i) ==
          doctest::Approx(temperature_for_index(i % 10)).epsilon(1e-15));
    CHECK(temperature_for_index(i) >= 0.6);
    CHECK(temperature_for_index(i) <= 0.96);
  }
}

TEST_CASE("generation prompt carries the template phrase and constraints") {
  Taxonomy tax = full_taxonomy();
  auto prompt = build_generation_prompt("jazz", "dance", "happy", tax);
  REQUIRE(prompt.ok());
  const std::string& text = prompt.value();
  CHECK(text.find("jazz song in dance manner") != std::string::npos);
  CHECK(text.find("happy") != std::string::npos);
  CHECK(text.find("melody") != std::string::npos);
  CHECK(text.find("pitch, duration, velocity, start_time") != std::string::npos);
  CHECK(text.find("240") != std::string::npos);
  CHECK(text.find("960") != std::string::npos);
  CHECK(text.find("35 (kick), 38 (snare), and 42 (hi-hat)") != std::string::npos);
  CHECK(text.find("8-bar") != std::string::npos);
  CHECK(text.find("0 to 7680") != std::string::npos);
  CHECK(text.find("pure JSON string as output") != std::string::npos);

  auto again = build_generation_prompt("jazz", "dance", "happy", tax);
  REQUIRE(again.ok());
  CHECK(again.value() == text);

  CHECK_FALSE(build_generation_prompt("polka", "dance", "happy", tax).ok());
}

TEST_CASE("recognition prompt swaps the task word and embeds the JSON") {
  Song song = testing::tiny_song();
  std::string genre_prompt = build_recognition_prompt(song, LabelTask::Genre);
  std::string style_prompt = build_recognition_prompt(song, LabelTask::Style);
  CHECK(genre_prompt.starts_with(
      "What genre is the song described in the following JSON for MIDI file?"));
  CHECK(style_prompt.starts_with(
      "What style is the song described in the following JSON for MIDI file?"));
  CHECK(genre_prompt.find(serialize_song(song)) != std::string::npos);
}

TEST_CASE("mock backend is a pure function of prompt, temperature, seed") {
  Taxonomy tax = tiny_taxonomy();
  MockBackend mock(7, tax);
  auto prompt = build_generation_prompt("pop", "romantic", "happy", tax);
  REQUIRE(prompt.ok());
  CompletionRequest request{prompt.value(), 0.72, kGenerationMaxTokens};
  auto a = mock.complete(request);
  auto b = mock.complete(request);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(a.value().text == b.value().text);

  request.temperature = 0.76;
  auto c = mock.complete(request);
  REQUIRE(c.ok());
  CHECK(c.value().text != a.value().text);

  MockBackend other(8, tax);
  auto d = other.complete({prompt.value(), 0.72, kGenerationMaxTokens});
  REQUIRE(d.ok());
  CHECK(d.value().text != a.value().text);
}

TEST_CASE("every mock completion parses and validates") {
  Taxonomy tax = full_taxonomy();
  MockBackend mock(42, tax);
  for (const auto& genre : {"pop_rock", "jazz", "folk"}) {
    for (const auto& style : {"dance", "punk"}) {
      for (int index : {0, 3, 9}) {
        auto prompt = build_generation_prompt(genre, style, "calm", tax);
        REQUIRE(prompt.ok());
        auto reply = mock.complete(
            {prompt.value(), temperature_for_index(index), 1200});
        REQUIRE(reply.ok());
        auto parsed = parse_song(reply.value().text, {});
        REQUIRE(parsed.ok());
        CHECK(validate_song(parsed.value()).empty());
      }
    }
  }
}

TEST_CASE("different genres use different pitch-set templates") {
  Taxonomy tax = full_taxonomy();
  MockBackend mock(42, tax);
  std::set<int> bases;
  for (const auto& genre : tax.genres) {
    bases.insert(mock.genre_pitch_base(genre));
  }
  CHECK(bases.size() == tax.genres.size());
  std::set<int> chord_bases;
  for (const auto& style : tax.styles) {
    chord_bases.insert(mock.style_chord_base(style));
  }
  CHECK(chord_bases.size() == tax.styles.size());
}

TEST_CASE("generate_song succeeds on attempt 1 with the mock backend") {
  Taxonomy tax = tiny_taxonomy();
  MockBackend mock(3, tax);
  auto outcome = generate_song(mock, tax, "pop", "romantic", "sad", 4);
  REQUIRE(outcome.record.success);
  CHECK(outcome.record.attempts == 1);
  REQUIRE(outcome.song.has_value());
  CHECK(validate_song(*outcome.song).empty());
  CHECK(outcome.song->meta.temperature == doctest::Approx(0.76));
  CHECK(outcome.song->meta.source == SongSource::MockGenerated);
}

TEST_CASE("generate_song retries and reports the last error") {
  Taxonomy tax = tiny_taxonomy();
  ScriptedBackend bad({"not json"});
  auto outcome = generate_song(bad, tax, "pop", "romantic", "sad", 0, 3);
  CHECK_FALSE(outcome.record.success);
  CHECK(outcome.record.attempts == 3);
  CHECK(bad.calls() == 3);
  CHECK(outcome.record.error.find("NoJsonFound") != std::string::npos);
}

TEST_CASE("generate_song accepts fenced JSON") {
  Taxonomy tax = tiny_taxonomy();
  Song song = testing::tiny_song();
  ScriptedBackend fenced({"```json\n" + serialize_song(song) + "\n```"});
  auto outcome = generate_song(fenced, tax, "pop", "romantic", "sad", 0);
  REQUIRE(outcome.record.success);
  CHECK(outcome.song->tracks == song.tracks);
}

TEST_CASE("generate_dataset sweeps combos, moods seeded, manifest ordered") {
  Taxonomy tax = tiny_taxonomy();
  MockBackend mock(11, tax);
  auto out_dir = std::filesystem::temp_directory_path() / "sweep_basic";
  std::filesystem::remove_all(out_dir);

  SweepConfig config;
  config.songs_per_combo = 3;
  config.out_dir = out_dir.string();
  config.seed = 5;
  config.concurrency = 1;
  auto manifest = generate_dataset(mock, tax, config);
  REQUIRE(manifest.ok());
  CHECK(manifest.value().rows.size() == 12);  // 2 x 2 x 3

  // Every file exists and every row succeeded.
  for (const auto& row : manifest.value().rows) {
    CHECK(row.success);
    CHECK(std::filesystem::exists(out_dir / row.json_path));
    CHECK(std::filesystem::exists(out_dir / row.midi_path));
  }

  // Sweep order: (genre, style, index) ascending.
  CHECK(manifest.value().rows[0].id == "pop/romantic/0");
  CHECK(manifest.value().rows[3].id == "pop/minimalist/0");
  CHECK(manifest.value().rows[11].id == "rock/minimalist/2");

  auto stats = dataset_stats(manifest.value());
  CHECK(stats.total_files == 12);
  CHECK(stats.per_genre.at("pop") == 6);
  CHECK(stats.per_style.at("minimalist") == 6);
}

TEST_CASE("generate_dataset is reproducible and concurrency-invariant") {
  Taxonomy tax = tiny_taxonomy();
  MockBackend mock(11, tax);
  auto dir_a = std::filesystem::temp_directory_path() / "sweep_a";
  auto dir_b = std::filesystem::temp_directory_path() / "sweep_b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);

  SweepConfig config;
  config.songs_per_combo = 4;
  config.seed = 9;
  config.out_dir = dir_a.string();
  config.concurrency = 1;
  auto a = generate_dataset(mock, tax, config);
  config.out_dir = dir_b.string();
  config.concurrency = 4;
  auto b = generate_dataset(mock, tax, config);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  REQUIRE(a.value().rows.size() == b.value().rows.size());
  for (size_t i = 0; i < a.value().rows.size(); ++i) {
    CHECK(a.value().rows[i] == b.value().rows[i]);
  }
}

TEST_CASE("generate_dataset resume skips existing triples") {
  Taxonomy tax = tiny_taxonomy();
  MockBackend mock(11, tax);
  auto full_dir = std::filesystem::temp_directory_path() / "sweep_full";
  auto resume_dir = std::filesystem::temp_directory_path() / "sweep_resume";
  std::filesystem::remove_all(full_dir);
  std::filesystem::remove_all(resume_dir);

  SweepConfig config;
  config.songs_per_combo = 3;
  config.seed = 13;
  config.out_dir = full_dir.string();
  auto full = generate_dataset(mock, tax, config);
  REQUIRE(full.ok());

  // Simulate an interrupted run: keep the first 5 manifest rows and files.
  std::filesystem::create_directories(resume_dir);
  {
    ManifestWriter writer;
    REQUIRE(writer.open((resume_dir / "manifest.jsonl").string(), true).ok());
    for (size_t i = 0; i < 5; ++i) {
      const auto& row = full.value().rows[i];
      REQUIRE(writer.append(row).ok());
      auto src_json = full_dir / row.json_path;
      auto dst_json = resume_dir / row.json_path;
      std::filesystem::create_directories(dst_json.parent_path());
      std::filesystem::copy_file(src_json, dst_json);
      std::filesystem::copy_file(full_dir / row.midi_path,
                                 resume_dir / row.midi_path);
    }
  }

  config.out_dir = resume_dir.string();
  config.resume = true;
  auto resumed = generate_dataset(mock, tax, config);
  REQUIRE(resumed.ok());
  REQUIRE(resumed.value().rows.size() == full.value().rows.size());
  for (size_t i = 0; i < full.value().rows.size(); ++i) {
    CHECK(resumed.value().rows[i] == full.value().rows[i]);
  }
  // The on-disk manifest also matches an uninterrupted run byte for byte.
  auto reread = read_manifest((resume_dir / "manifest.jsonl").string());
  REQUIRE(reread.ok());
  REQUIRE(reread.value().rows.size() == full.value().rows.size());
  for (size_t i = 0; i < full.value().rows.size(); ++i) {
    CHECK(reread.value().rows[i] == full.value().rows[i]);
  }
}

TEST_CASE("strict matcher: single label in final segment matches") {
  Taxonomy tax = full_taxonomy();
  auto r = match_reply_strict(
      "The bass implies a backbeat.\nClassification: Jazz", tax,
      LabelTask::Genre);
  REQUIRE(r.label.has_value());
  CHECK(*r.label == "jazz");
}

TEST_CASE("strict matcher: the two-label reply is unmatched") {
  // Mirrors the documented failure case: a reply naming two genres.
  Taxonomy tax = full_taxonomy();
  auto r = match_reply_strict(
      "Melody is stepwise.\nClassification: Pop_Rock / Folk - both fit.", tax,
      LabelTask::Genre);
  CHECK_FALSE(r.label.has_value());
}

TEST_CASE("strict matcher: no taxonomy label is unmatched") {
  Taxonomy tax = full_taxonomy();
  auto r = match_reply_strict("Classification: waltz", tax, LabelTask::Genre);
  CHECK_FALSE(r.label.has_value());
}

TEST_CASE("strict matcher: longer label subsumes its substring") {
  Taxonomy tax = full_taxonomy();
  // "pop latin" contains the style word "latin"... but also the genre
  // "latin"; within styles only pop_latin must match.
  auto r = match_reply_strict("Classification: Pop Latin", tax,
                              LabelTask::Style);
  REQUIRE(r.label.has_value());
  CHECK(*r.label == "pop_latin");
}

TEST_CASE("strict matcher: only the final segment counts") {
  Taxonomy tax = full_taxonomy();
  auto r = match_reply_strict(
      "Could be jazz, blues, or country overall.\n"
      "Classification: Country",
      tax, LabelTask::Genre);
  REQUIRE(r.label.has_value());
  CHECK(*r.label == "country");
}

TEST_CASE("zero_shot_classify against scripted and mock backends") {
  Taxonomy tax = full_taxonomy();
  Song song = testing::tiny_song();
  song.meta.genre = "jazz";

  ScriptedBackend known({"Classification: Jazz"});
  auto matched = zero_shot_classify(known, song, LabelTask::Genre, tax);
  REQUIRE(matched.ok());
  REQUIRE(matched.value().label.has_value());
  CHECK(*matched.value().label == "jazz");

  ScriptedBackend twolabels({"Classification: Pop_Rock / Folk"});
  auto unmatched = zero_shot_classify(twolabels, song, LabelTask::Genre, tax);
  REQUIRE(unmatched.ok());
  CHECK_FALSE(unmatched.value().label.has_value());
}

TEST_CASE("mock backend answers recognition prompts with its own class") {
  Taxonomy tax = full_taxonomy();
  MockBackend mock(21, tax);
  for (const auto& genre : {"electronic", "reggae", "vocal"}) {
    for (const auto& style : {"gospel", "rock_hard"}) {
      auto outcome = generate_song(mock, tax, genre, style, "calm", 2);
      REQUIRE(outcome.record.success);
      auto genre_result =
          zero_shot_classify(mock, *outcome.song, LabelTask::Genre, tax);
      REQUIRE(genre_result.ok());
      REQUIRE(genre_result.value().label.has_value());
      CHECK(*genre_result.value().label == genre);
      auto style_result =
          zero_shot_classify(mock, *outcome.song, LabelTask::Style, tax);
      REQUIRE(style_result.ok());
      REQUIRE(style_result.value().label.has_value());
      CHECK(*style_result.value().label == style);
    }
  }
}

TEST_CASE("remote backend speaks the chat-completions wire format") {
  httplib::Server server;
  std::string seen_auth, seen_body;
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                seen_auth = req.get_header_value("Authorization");
                seen_body = req.body;
                res.set_content(
                    "{\"choices\": [{\"message\": {\"role\": \"assistant\","
                    " \"content\": \"{\\\"melody\\\": []}\"}}]}",
                    "application/json");
              });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread runner([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  RemoteConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  config.api_key = "test-key";
  config.model = "test-model";
  RemoteHttpBackend backend(config);
  auto reply = backend.complete({"hello", 0.66, 1200});
  server.stop();
  runner.join();

  REQUIRE(reply.ok());
  CHECK(reply.value().text == "{\"melody\": []}");
  CHECK(seen_auth == "Bearer test-key");
  auto body = nlohmann::json::parse(seen_body);
  CHECK(body["model"] == "test-model");
  CHECK(body["temperature"] == doctest::Approx(0.66));
  CHECK(body["max_tokens"] == 1200);
  CHECK(body["messages"][0]["role"] == "user");
  CHECK(body["messages"][0]["content"] == "hello");
}

TEST_CASE("remote backend backs off on 429 and gives up on 4xx") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions",
              [&](const httplib::Request&, httplib::Response& res) {
                int n = ++hits;
                if (n <= 2) {
                  res.status = 429;
                  res.set_content("slow down", "text/plain");
                } else {
                  res.set_content(
                      "{\"choices\": [{\"message\": {\"content\": \"ok\"}}]}",
                      "application/json");
                }
              });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread runner([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  RemoteConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  config.api_key = "k";
  config.backoff_base_ms = 1;  // keep the test fast
  RemoteHttpBackend backend(config);
  auto reply = backend.complete({"x", 0.7, 10});
  REQUIRE(reply.ok());
  CHECK(reply.value().text == "ok");
  CHECK(hits.load() == 3);

  // Non-retryable client error surfaces immediately.
  hits = 99;  // handler now always succeeds; use a bad path instead
  RemoteConfig bad = config;
  bad.base_url = "http://127.0.0.1:" + std::to_string(port) + "/nope";
  bad.max_retries = 0;
  RemoteHttpBackend bad_backend(bad);
  auto error = bad_backend.complete({"x", 0.7, 10});
  server.stop();
  runner.join();
  REQUIRE_FALSE(error.ok());
  CHECK(error.error().http_status == 404);
}

TEST_CASE("remote config comes from the environment") {
  ::setenv("MIDISTRING_API_KEY", "secret", 1);
  ::setenv("MIDISTRING_API_BASE", "http://example.test/v2", 1);
  ::setenv("MIDISTRING_MODEL", "m5", 1);
  auto config = RemoteHttpBackend::config_from_env();
  REQUIRE(config.ok());
  CHECK(config.value().api_key == "secret");
  CHECK(config.value().base_url == "http://example.test/v2");
  CHECK(config.value().model == "m5");
  ::unsetenv("MIDISTRING_API_KEY");
  auto missing = RemoteHttpBackend::config_from_env();
  CHECK_FALSE(missing.ok());
}
