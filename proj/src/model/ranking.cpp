#include "model/ranking.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace midistring::model {

nn::Tensor phrase_to_tensor(const PhraseRoll& roll) {
  nn::Tensor out({kPhraseSteps, kRollPitches});
  for (int64_t i = 0; i < out.size(); ++i) {
    out.v[i] = static_cast<float>(roll.data[i]);
  }
  return out;
}

double candidate_cosine(const nn::Tensor& probs, const PhraseRoll& candidate) {
  double dot = 0, norm_p = 0, norm_c = 0;
  for (int64_t i = 0; i < probs.size(); ++i) {
    const double p = probs.v[i];
    const double c = candidate.data[i];
    dot += p * c;
    norm_p += p * p;
    norm_c += c * c;
  }
  if (norm_c == 0 || norm_p == 0) return -1.0;
  return dot / (std::sqrt(norm_p) * std::sqrt(norm_c));
}

RankOutcome rank_candidates(const MelodyTransformer<float>& model,
                            const RankedQuery& query) {
  RankOutcome outcome;
  outcome.scores.resize(query.candidates.size());

  nn::Tape<float> tape;
  auto bound = model.bind(tape, false);
  auto encoded = model.encode(tape, bound, phrase_to_tensor(query.source));
  const size_t mark = tape.node_count();

  for (size_t c = 0; c < query.candidates.size(); ++c) {
    const PhraseRoll& candidate = query.candidates[c];
    if (candidate.active_cells() == 0) {
      outcome.scores[c] = -1.0;
      outcome.degenerate.push_back(static_cast<int>(c));
      continue;
    }
    auto decoder_input =
        MelodyTransformer<float>::shift_right(phrase_to_tensor(candidate));
    auto probs = model.decode_probs(tape, bound, encoded, decoder_input);
    outcome.scores[c] = candidate_cosine(tape.value(probs), candidate);
    tape.truncate(mark);
  }

  outcome.order.resize(query.candidates.size());
  std::iota(outcome.order.begin(), outcome.order.end(), 0);
  std::stable_sort(outcome.order.begin(), outcome.order.end(),
                   [&](int a, int b) {
                     if (outcome.scores[a] != outcome.scores[b]) {
                       return outcome.scores[a] > outcome.scores[b];
                     }
                     return a < b;
                   });
  return outcome;
}

EvalReport eval_melody(const MelodyTransformer<float>& model,
                       const std::vector<RankedQuery>& queries, uint64_t seed,
                       const std::string& config_hash) {
  if (queries.empty()) {
    throw std::invalid_argument("eval_melody: no queries");
  }
  std::vector<int> ranks;
  ranks.reserve(queries.size());
  for (const RankedQuery& query : queries) {
    RankOutcome outcome = rank_candidates(model, query);
    for (size_t pos = 0; pos < outcome.order.size(); ++pos) {
      if (outcome.order[pos] == query.positive_index) {
        ranks.push_back(static_cast<int>(pos) + 1);
        break;
      }
    }
  }
  EvalReport report = melody_metrics_from_ranks(ranks);
  report.seed = seed;
  report.config_hash = config_hash;
  return report;
}

namespace {

nlohmann::ordered_json roll_to_json(const PhraseRoll& roll) {
  // Run-length counts over the flattened grid, starting with zeros.
  std::vector<int64_t> runs;
  uint8_t current = 0;
  int64_t length = 0;
  for (uint8_t cell : roll.data) {
    if (cell == current) {
      ++length;
    } else {
      runs.push_back(length);
      current = cell;
      length = 1;
    }
  }
  runs.push_back(length);
  return {{"rle", runs}};
}

Result<PhraseRoll, std::string> roll_from_json(const nlohmann::json& doc) {
  PhraseRoll roll;
  const int64_t total = static_cast<int64_t>(roll.data.size());
  if (doc.contains("rle")) {
    if (!doc["rle"].is_array()) return std::string("rle is not an array");
    int64_t at = 0;
    uint8_t current = 0;
    for (const auto& run : doc["rle"]) {
      if (!run.is_number_integer()) return std::string("rle run not integer");
      int64_t length = run.get<int64_t>();
      if (length < 0 || at + length > total) {
        return std::string("rle runs exceed the 64x128 grid");
      }
      for (int64_t i = 0; i < length; ++i) roll.data[at++] = current;
      current = current ? 0 : 1;
    }
    if (at != total) return std::string("rle runs do not cover the grid");
    return roll;
  }
  if (doc.contains("dense")) {
    const auto& rows = doc["dense"];
    if (!rows.is_array() || rows.size() != kPhraseSteps) {
      return std::string("dense must hold 64 rows");
    }
    for (int t = 0; t < kPhraseSteps; ++t) {
      const auto& row = rows[t];
      if (!row.is_array() || row.size() != kRollPitches) {
        return std::string("dense row must hold 128 cells");
      }
      for (int p = 0; p < kRollPitches; ++p) {
        int cell = row[p].get<int>();
        if (cell != 0 && cell != 1) return std::string("dense cell not 0/1");
        roll.at(t, p) = static_cast<uint8_t>(cell);
      }
    }
    return roll;
  }
  return std::string("roll needs an \"rle\" or \"dense\" key");
}

}  // namespace

Result<std::vector<RankedQuery>, std::string> read_queries(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) return "cannot open queries file: " + path;
  std::vector<RankedQuery> queries;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      return "queries line " + std::to_string(line_number) + ": " + why;
    };
    nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return fail("not a JSON object");
    if (!doc.contains("source") || !doc.contains("candidates") ||
        !doc.contains("positive_index")) {
      return fail("missing source/candidates/positive_index");
    }
    RankedQuery query;
    auto source = roll_from_json(doc["source"]);
    if (!source) return fail(source.error());
    query.source = source.take();
    if (!doc["candidates"].is_array() ||
        doc["candidates"].size() != kCandidatesPerQuery) {
      return fail("queries need exactly 50 candidates");
    }
    for (const auto& cand : doc["candidates"]) {
      auto roll = roll_from_json(cand);
      if (!roll) return fail(roll.error());
      query.candidates.push_back(roll.take());
    }
    query.positive_index = doc["positive_index"].get<int>();
    if (query.positive_index < 0 ||
        query.positive_index >= kCandidatesPerQuery) {
      return fail("positive_index out of range");
    }
    queries.push_back(std::move(query));
  }
  if (queries.empty()) return "no queries in " + path;
  return queries;
}

Result<bool, std::string> write_queries(
    const std::string& path, const std::vector<RankedQuery>& queries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) return "cannot open queries file for writing: " + path;
  for (const RankedQuery& query : queries) {
    nlohmann::ordered_json doc;
    doc["positive_index"] = query.positive_index;
    doc["source"] = roll_to_json(query.source);
    auto& candidates = doc["candidates"] = nlohmann::ordered_json::array();
    for (const PhraseRoll& cand : query.candidates) {
      candidates.push_back(roll_to_json(cand));
    }
    out << doc.dump() << '\n';
  }
  if (!out) return std::string("queries write failed");
  return true;
}

}  // namespace midistring::model
