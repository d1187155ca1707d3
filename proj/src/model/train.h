#pragma once

#include <string>
#include <vector>

#include "core/result.h"
#include "core/taxonomy.h"
#include "data/manifest.h"
#include "model/cnn.h"
#include "nn/adam.h"
#include "model/metrics.h"
#include "model/ranking.h"
#include "model/transformer.h"
#include "roll/roll.h"

namespace midistring::model {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  double lr = 1e-3;
  uint64_t seed = 0;
  bool verbose = false;
};

// Short hash identifying a training configuration inside reports.
std::string config_hash(const TrainConfig& config);

struct TrainLog {
  std::vector<double> epoch_losses;
  std::string config_hash;
};

// Everything a checkpoint persists besides the parameters.
struct TrainState {
  nn::AdamState<float> adam;
  uint64_t dropout_stream = 0;  // dropout streams consumed
  uint64_t shuffle_rng_state = 0;
};

struct TrainResult {
  TrainLog log;
  TrainState state;
};

// ---- classification ----

struct ClassifierSample {
  RollTensor roll;
  int genre = 0;
  int style = 0;
};

struct ClassifierDataset {
  std::vector<ClassifierSample> samples;
  std::vector<std::string> skipped;
};

// Loads every successful manifest row's .song.json into a labeled roll.
// base_dir is the directory the manifest's relative paths resolve against.
Result<ClassifierDataset, std::string> load_classifier_dataset(
    const Manifest& manifest, const std::string& base_dir,
    const Taxonomy& taxonomy);

nn::Tensor roll_to_tensor(const RollTensor& roll);

// Joint two-head training: loss = CE(genre) + CE(style) per batch, Adam.
Result<TrainResult, std::string> train_classifier(CnnClassifier<float>& model,
                                                  const ClassifierDataset& data,
                                                  const TrainConfig& config);

std::pair<int, int> classify_roll(const CnnClassifier<float>& model,
                                  const RollTensor& roll);

EvalReport eval_classifier(const CnnClassifier<float>& model,
                           const ClassifierDataset& data, LabelTask task,
                           const Taxonomy& taxonomy, uint64_t seed,
                           const std::string& config_hash);

// ---- melody completion ----

struct PhrasePair {
  PhraseRoll source;
  PhraseRoll target;
};

// Melody phrase pairs from manifest songs; songs whose melody is silent in
// either half are skipped.
Result<std::vector<PhrasePair>, std::string> load_phrase_pairs(
    const Manifest& manifest, const std::string& base_dir);

// Teacher-forced binary cross entropy training, Adam.
Result<TrainResult, std::string> train_melody(MelodyTransformer<float>& model,
                                              const std::vector<PhrasePair>& pairs,
                                              const TrainConfig& config);

// Builds ranking queries from manifest songs: each query's positive is the
// true continuation of its source phrase; negatives are target phrases of
// other songs, sampled and placed by the seed.
Result<std::vector<RankedQuery>, std::string> make_queries(
    const Manifest& manifest, const std::string& base_dir, int count,
    uint64_t seed);

// ---- checkpoints ----

Result<bool, std::string> save_cnn_checkpoint(const std::string& path,
                                              const CnnClassifier<float>& model,
                                              const TrainResult& result,
                                              uint64_t seed);
Result<CnnClassifier<float>, std::string> load_cnn_checkpoint(
    const std::string& path);

Result<bool, std::string> save_transformer_checkpoint(
    const std::string& path, const MelodyTransformer<float>& model,
    const TrainResult& result, uint64_t seed);
Result<MelodyTransformer<float>, std::string> load_transformer_checkpoint(
    const std::string& path);

}  // namespace midistring::model
