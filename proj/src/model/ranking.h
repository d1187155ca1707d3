#pragma once

#include <string>
#include <vector>

#include "core/result.h"
#include "model/metrics.h"
#include "model/transformer.h"
#include "roll/roll.h"

namespace midistring::model {

inline constexpr int kCandidatesPerQuery = 50;

// One melody-completion evaluation unit: a source phrase, 50 candidate
// continuations, and the index of the true one.
struct RankedQuery {
  PhraseRoll source;
  std::vector<PhraseRoll> candidates;
  int positive_index = 0;
};

nn::Tensor phrase_to_tensor(const PhraseRoll& roll);

// Cosine similarity between a probability matrix and a binary candidate,
// -1 when either side is all zeros.
double candidate_cosine(const nn::Tensor& probs, const PhraseRoll& candidate);

struct RankOutcome {
  std::vector<int> order;        // candidate indices, best first
  std::vector<double> scores;    // cosine per candidate
  std::vector<int> degenerate;   // all-zero candidates, scored -1
};

// Scores each candidate by the cosine similarity between the teacher-forced
// decoder probability matrix (the candidate supplies the decoder input) and
// the candidate's own binary matrix. Ties break by candidate index.
RankOutcome rank_candidates(const MelodyTransformer<float>& model,
                            const RankedQuery& query);

// With one positive per query, AP = 1 / rank of the positive; MAP averages
// AP and HITS@k counts queries whose positive lands in the top k.
EvalReport eval_melody(const MelodyTransformer<float>& model,
                       const std::vector<RankedQuery>& queries, uint64_t seed,
                       const std::string& config_hash);

// Line-delimited JSON query files. Rolls serialize as run-length counts of
// alternating zero/one runs over the row-major 64x128 grid ("rle", starting
// with zeros) and may also be given dense as 64 rows of 128 zeros and ones.
Result<std::vector<RankedQuery>, std::string> read_queries(
    const std::string& path);
Result<bool, std::string> write_queries(const std::string& path,
                                        const std::vector<RankedQuery>& queries);

}  // namespace midistring::model
