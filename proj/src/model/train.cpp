#include "model/train.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "codec/song_json.h"
#include "core/hash.h"
#include "core/rng.h"
#include "nn/adam.h"
#include "nn/checkpoint.h"

namespace midistring::model {

namespace fs = std::filesystem;

std::string config_hash(const TrainConfig& config) {
  std::ostringstream canon;
  canon << "epochs=" << config.epochs << ";batch=" << config.batch_size
        << ";lr=" << config.lr << ";seed=" << config.seed;
  return sha256_hex(canon.str()).substr(0, 12);
}

nn::Tensor roll_to_tensor(const RollTensor& roll) {
  nn::Tensor out({kRollChannels, kRollSteps, kRollPitches});
  for (int64_t i = 0; i < out.size(); ++i) {
    out.v[i] = static_cast<float>(roll.data[i]);
  }
  return out;
}

namespace {

Result<Song, std::string> load_song_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "cannot open " + path.string();
  std::ostringstream buf;
  buf << in.rdbuf();
  auto parsed = parse_song(buf.str(), {});
  if (!parsed) {
    return path.string() + ": " +
           std::string(codec_error_kind_name(parsed.error().kind)) + ": " +
           parsed.error().message;
  }
  return parsed.take();
}

}  // namespace

Result<ClassifierDataset, std::string> load_classifier_dataset(
    const Manifest& manifest, const std::string& base_dir,
    const Taxonomy& taxonomy) {
  ClassifierDataset data;
  for (const ManifestRow& row : manifest.successes()) {
    auto song = load_song_file(fs::path(base_dir) / row.json_path);
    if (!song) {
      data.skipped.push_back(song.error());
      continue;
    }
    auto genre = taxonomy.genre_index(row.genre);
    auto style = taxonomy.style_index(row.style);
    if (!genre || !style) {
      data.skipped.push_back(row.id + ": label outside taxonomy");
      continue;
    }
    data.samples.push_back(
        ClassifierSample{song_to_roll(song.value()), *genre, *style});
  }
  if (data.samples.empty()) {
    return std::string("no usable songs in manifest");
  }
  return data;
}

Result<TrainResult, std::string> train_classifier(CnnClassifier<float>& model,
                                                  const ClassifierDataset& data,
                                                  const TrainConfig& config) {
  if (data.samples.empty()) return std::string("empty dataset");
  if (config.epochs < 1 || config.batch_size < 1) {
    return std::string("epochs and batch size must be positive");
  }

  auto params = model.parameters();
  nn::AdamState<float> adam;
  adam.lr = static_cast<float>(config.lr);
  adam.init_like(params);

  Rng shuffle_rng(mix_seed(config.seed, "train-classify-shuffle"));
  const uint64_t dropout_seed = mix_seed(config.seed, "train-classify-dropout");
  uint64_t dropout_stream = 0;

  TrainResult result;
  TrainLog& log = result.log;
  log.config_hash = config_hash(config);
  std::vector<int> order(data.samples.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0;
    int batches = 0;
    for (size_t at = 0; at < order.size(); at += config.batch_size) {
      const size_t end = std::min(order.size(), at + config.batch_size);
      nn::Tape<float> tape;
      auto bound = model.bind(tape, true);
      std::vector<nn::Tape<float>::Var> genre_losses, style_losses;
      for (size_t i = at; i < end; ++i) {
        const ClassifierSample& sample = data.samples[order[i]];
        auto logits = model.forward(tape, bound, roll_to_tensor(sample.roll),
                                    true, dropout_seed, dropout_stream++);
        genre_losses.push_back(
            tape.softmax_cross_entropy(logits.genre, {sample.genre}));
        style_losses.push_back(
            tape.softmax_cross_entropy(logits.style, {sample.style}));
      }
      auto loss =
          tape.add(tape.mean_of(genre_losses), tape.mean_of(style_losses));
      tape.backward(loss);

      std::vector<const nn::Tensor*> grads;
      for (auto var : bound.vars) grads.push_back(&tape.grad(var));
      nn::adam_step(params, grads, adam);

      epoch_loss += tape.value(loss).v[0];
      ++batches;
    }
    log.epoch_losses.push_back(epoch_loss / std::max(1, batches));
    if (config.verbose) {
      std::fprintf(stderr, "epoch %d/%d loss %.4f\n", epoch + 1, config.epochs,
                   log.epoch_losses.back());
    }
  }
  result.state.adam = std::move(adam);
  result.state.dropout_stream = dropout_stream;
  result.state.shuffle_rng_state = shuffle_rng.state();
  return result;
}

std::pair<int, int> classify_roll(const CnnClassifier<float>& model,
                                  const RollTensor& roll) {
  nn::Tape<float> tape;
  auto bound = model.bind(tape, false);
  auto logits = model.forward(tape, bound, roll_to_tensor(roll), false, 0, 0);
  auto argmax = [&](nn::Tape<float>::Var var) {
    const auto& v = tape.value(var);
    int best = 0;
    for (int64_t i = 1; i < v.size(); ++i) {
      if (v.v[i] > v.v[best]) best = static_cast<int>(i);
    }
    return best;
  };
  return {argmax(logits.genre), argmax(logits.style)};
}

EvalReport eval_classifier(const CnnClassifier<float>& model,
                           const ClassifierDataset& data, LabelTask task,
                           const Taxonomy& taxonomy, uint64_t seed,
                           const std::string& config_hash_value) {
  if (data.samples.empty()) {
    throw std::invalid_argument("eval_classifier: empty evaluation set");
  }
  const auto& labels =
      task == LabelTask::Genre ? taxonomy.genres : taxonomy.styles;
  const int n_classes = static_cast<int>(labels.size());

  std::vector<int> y_true, y_pred;
  y_true.reserve(data.samples.size());
  y_pred.reserve(data.samples.size());

  nn::Tape<float> tape;
  auto bound = model.bind(tape, false);
  const size_t mark = tape.node_count();
  for (const ClassifierSample& sample : data.samples) {
    auto logits =
        model.forward(tape, bound, roll_to_tensor(sample.roll), false, 0, 0);
    auto head = task == LabelTask::Genre ? logits.genre : logits.style;
    const auto& v = tape.value(head);
    int best = 0;
    for (int64_t i = 1; i < v.size(); ++i) {
      if (v.v[i] > v.v[best]) best = static_cast<int>(i);
    }
    y_pred.push_back(best);
    y_true.push_back(task == LabelTask::Genre ? sample.genre : sample.style);
    tape.truncate(mark);
  }

  EvalReport report;
  report.task = std::string(label_task_name(task));
  report.sample_count = static_cast<int>(data.samples.size());
  report.seed = seed;
  report.config_hash = config_hash_value;
  report.metrics["weighted_f1"] = weighted_f1(y_true, y_pred, n_classes);

  int64_t correct = 0;
  std::vector<int64_t> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
  for (size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == y_pred[i]) {
      ++correct;
      ++tp[y_true[i]];
    } else {
      ++fn[y_true[i]];
      ++fp[y_pred[i]];
    }
  }
  report.metrics["accuracy"] =
      static_cast<double>(correct) / static_cast<double>(y_true.size());
  for (int c = 0; c < n_classes; ++c) {
    PerClassMetrics pc;
    pc.label = labels[c];
    pc.support = static_cast<int>(tp[c] + fn[c]);
    pc.precision = tp[c] + fp[c] > 0
                       ? static_cast<double>(tp[c]) / (tp[c] + fp[c])
                       : 0.0;
    pc.recall = pc.support > 0 ? static_cast<double>(tp[c]) / pc.support : 0.0;
    pc.f1 = pc.precision + pc.recall > 0
                ? 2 * pc.precision * pc.recall / (pc.precision + pc.recall)
                : 0.0;
    report.per_class.push_back(pc);
  }
  return report;
}

Result<std::vector<PhrasePair>, std::string> load_phrase_pairs(
    const Manifest& manifest, const std::string& base_dir) {
  std::vector<PhrasePair> pairs;
  for (const ManifestRow& row : manifest.successes()) {
    auto song = load_song_file(fs::path(base_dir) / row.json_path);
    if (!song) continue;
    auto phrases = melody_phrases(song.value());
    if (!phrases) continue;  // EmptyHalf
    pairs.push_back(PhrasePair{std::move(phrases.value().first),
                               std::move(phrases.value().second)});
  }
  if (pairs.empty()) {
    return std::string("no usable phrase pairs in manifest");
  }
  return pairs;
}

Result<TrainResult, std::string> train_melody(MelodyTransformer<float>& model,
                                              const std::vector<PhrasePair>& pairs,
                                              const TrainConfig& config) {
  if (pairs.empty()) return std::string("no phrase pairs");
  if (config.epochs < 1 || config.batch_size < 1) {
    return std::string("epochs and batch size must be positive");
  }

  auto params = model.parameters();
  nn::AdamState<float> adam;
  adam.lr = static_cast<float>(config.lr);
  adam.init_like(params);

  Rng shuffle_rng(mix_seed(config.seed, "train-melody-shuffle"));
  TrainResult result;
  TrainLog& log = result.log;
  log.config_hash = config_hash(config);
  std::vector<int> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0;
    int batches = 0;
    for (size_t at = 0; at < order.size(); at += config.batch_size) {
      const size_t end = std::min(order.size(), at + config.batch_size);
      nn::Tape<float> tape;
      auto bound = model.bind(tape, true);
      std::vector<nn::Tape<float>::Var> losses;
      for (size_t i = at; i < end; ++i) {
        const PhrasePair& pair = pairs[order[i]];
        auto target = phrase_to_tensor(pair.target);
        auto probs = model.forward_probs(tape, bound,
                                         phrase_to_tensor(pair.source), target);
        losses.push_back(tape.binary_cross_entropy(probs, std::move(target)));
      }
      auto loss = tape.mean_of(losses);
      tape.backward(loss);

      std::vector<const nn::Tensor*> grads;
      for (auto var : bound.vars) grads.push_back(&tape.grad(var));
      nn::adam_step(params, grads, adam);

      epoch_loss += tape.value(loss).v[0];
      ++batches;
    }
    log.epoch_losses.push_back(epoch_loss / std::max(1, batches));
    if (config.verbose) {
      std::fprintf(stderr, "epoch %d/%d bce %.5f\n", epoch + 1, config.epochs,
                   log.epoch_losses.back());
    }
  }
  result.state.adam = std::move(adam);
  result.state.shuffle_rng_state = shuffle_rng.state();
  return result;
}

Result<std::vector<RankedQuery>, std::string> make_queries(
    const Manifest& manifest, const std::string& base_dir, int count,
    uint64_t seed) {
  auto pairs = load_phrase_pairs(manifest, base_dir);
  if (!pairs) return pairs.error();
  const auto& all = pairs.value();
  if (static_cast<int>(all.size()) < kCandidatesPerQuery) {
    return "need at least " + std::to_string(kCandidatesPerQuery) +
           " phrase pairs, have " + std::to_string(all.size());
  }

  Rng rng(mix_seed(seed, "make-queries"));
  std::vector<RankedQuery> queries;
  queries.reserve(static_cast<size_t>(count));
  for (int q = 0; q < count; ++q) {
    const int source_index = static_cast<int>(rng.next_below(all.size()));
    RankedQuery query;
    query.source = all[source_index].source;
    query.positive_index =
        static_cast<int>(rng.next_below(kCandidatesPerQuery));
    for (int c = 0; c < kCandidatesPerQuery; ++c) {
      if (c == query.positive_index) {
        query.candidates.push_back(all[source_index].target);
        continue;
      }
      int negative;
      do {
        negative = static_cast<int>(rng.next_below(all.size()));
      } while (negative == source_index);
      query.candidates.push_back(all[negative].target);
    }
    queries.push_back(std::move(query));
  }
  return queries;
}

namespace {

constexpr const char* kKindKey = "meta.kind";

void save_params(nn::Checkpoint& checkpoint,
                 const std::vector<std::string>& names,
                 std::vector<const nn::Tensor*> params) {
  for (size_t i = 0; i < names.size(); ++i) {
    checkpoint.put_f32("param." + names[i], *params[i]);
  }
}

void save_optimizer(nn::Checkpoint& checkpoint,
                    const std::vector<std::string>& names,
                    const TrainState& state) {
  if (state.adam.m.size() == names.size()) {
    for (size_t i = 0; i < names.size(); ++i) {
      checkpoint.put_f32("adam.m." + names[i], state.adam.m[i]);
      checkpoint.put_f32("adam.v." + names[i], state.adam.v[i]);
    }
  }
  checkpoint.put_u64("adam.t", static_cast<uint64_t>(state.adam.t));
  checkpoint.put_u64("rng.dropout_stream", state.dropout_stream);
  checkpoint.put_u64("rng.shuffle_state", state.shuffle_rng_state);
}

}  // namespace

Result<bool, std::string> save_cnn_checkpoint(const std::string& path,
                                              const CnnClassifier<float>& model,
                                              const TrainResult& result,
                                              uint64_t seed) {
  nn::Checkpoint checkpoint;
  checkpoint.put_u64(kKindKey, 1);
  checkpoint.put_u64("meta.input_hw", static_cast<uint64_t>(model.input_hw()));
  checkpoint.put_u64("meta.genres", static_cast<uint64_t>(model.genre_classes()));
  checkpoint.put_u64("meta.styles", static_cast<uint64_t>(model.style_classes()));
  checkpoint.put_u64("meta.seed", seed);
  nn::Tensor losses({static_cast<int>(result.log.epoch_losses.size())});
  for (size_t i = 0; i < result.log.epoch_losses.size(); ++i) {
    losses.v[i] = static_cast<float>(result.log.epoch_losses[i]);
  }
  checkpoint.put_f32("meta.epoch_losses", losses);
  save_params(checkpoint, CnnClassifier<float>::parameter_names(),
              model.parameters());
  save_optimizer(checkpoint, CnnClassifier<float>::parameter_names(),
                 result.state);
  return checkpoint.save(path);
}

Result<CnnClassifier<float>, std::string> load_cnn_checkpoint(
    const std::string& path) {
  auto loaded = nn::Checkpoint::load(path);
  if (!loaded) return loaded.error();
  const nn::Checkpoint& checkpoint = loaded.value();
  auto kind = checkpoint.get_u64(kKindKey);
  if (!kind || kind.value() != 1) {
    return "not a classifier checkpoint: " + path;
  }
  auto input_hw = checkpoint.get_u64("meta.input_hw");
  auto genres = checkpoint.get_u64("meta.genres");
  auto styles = checkpoint.get_u64("meta.styles");
  if (!input_hw || !genres || !styles) {
    return std::string("checkpoint missing metadata");
  }
  CnnClassifier<float> model(static_cast<int>(input_hw.value()),
                             static_cast<int>(genres.value()),
                             static_cast<int>(styles.value()));
  auto params = model.parameters();
  auto names = CnnClassifier<float>::parameter_names();
  for (size_t i = 0; i < names.size(); ++i) {
    auto tensor = checkpoint.get_f32("param." + names[i]);
    if (!tensor) return tensor.error();
    if (tensor.value().shape != params[i]->shape) {
      return "checkpoint shape mismatch for " + names[i];
    }
    *params[i] = tensor.take();
  }
  return model;
}

Result<bool, std::string> save_transformer_checkpoint(
    const std::string& path, const MelodyTransformer<float>& model,
    const TrainResult& result, uint64_t seed) {
  nn::Checkpoint checkpoint;
  checkpoint.put_u64(kKindKey, 2);
  checkpoint.put_u64("meta.seed", seed);
  nn::Tensor losses({static_cast<int>(result.log.epoch_losses.size())});
  for (size_t i = 0; i < result.log.epoch_losses.size(); ++i) {
    losses.v[i] = static_cast<float>(result.log.epoch_losses[i]);
  }
  checkpoint.put_f32("meta.epoch_losses", losses);
  save_params(checkpoint, model.parameter_names(), model.parameters());
  save_optimizer(checkpoint, model.parameter_names(), result.state);
  return checkpoint.save(path);
}

Result<MelodyTransformer<float>, std::string> load_transformer_checkpoint(
    const std::string& path) {
  auto loaded = nn::Checkpoint::load(path);
  if (!loaded) return loaded.error();
  const nn::Checkpoint& checkpoint = loaded.value();
  auto kind = checkpoint.get_u64(kKindKey);
  if (!kind || kind.value() != 2) {
    return "not a melody checkpoint: " + path;
  }
  MelodyTransformer<float> model;
  auto params = model.parameters();
  const auto& names = model.parameter_names();
  for (size_t i = 0; i < names.size(); ++i) {
    auto tensor = checkpoint.get_f32("param." + names[i]);
    if (!tensor) return tensor.error();
    if (tensor.value().shape != params[i]->shape) {
      return "checkpoint shape mismatch for " + names[i];
    }
    *params[i] = tensor.take();
  }
  return model;
}

}  // namespace midistring::model
