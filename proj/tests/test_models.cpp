#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "core/rng.h"
#include "nn/gradcheck.h"
#include "llm/generate.h"
#include "llm/mock_backend.h"
#include "model/cnn.h"
#include "model/metrics.h"
#include "model/ranking.h"
#include "model/train.h"
#include "model/transformer.h"
#include "helpers.h"

using namespace midistring;
using namespace midistring::model;

namespace {

// Independent confusion-matrix implementation of weighted F1, written from
// the definition: per-class precision/recall out of explicit counting loops.
double weighted_f1_oracle(const std::vector<int>& y_true,
                          const std::vector<int>& y_pred, int n_classes) {
  double total = 0;
  for (int c = 0; c < n_classes; ++c) {
    int true_c = 0, pred_c = 0, both = 0;
    for (size_t i = 0; i < y_true.size(); ++i) {
      if (y_true[i] == c) ++true_c;
      if (y_pred[i] == c) ++pred_c;
      if (y_true[i] == c && y_pred[i] == c) ++both;
    }
    if (true_c == 0) continue;
    double p = pred_c > 0 ? double(both) / pred_c : 0.0;
    double r = double(both) / true_c;
    double f1 = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    total += f1 * (double(true_c) / double(y_true.size()));
  }
  return total;
}

PhraseRoll random_phrase(Rng& rng, int notes = 12) {
  PhraseRoll roll;
  for (int i = 0; i < notes; ++i) {
    roll.at(rng.next_int(0, kPhraseSteps - 1), rng.next_int(0, 127)) = 1;
  }
  return roll;
}

nn::TensorT<float> random_input(std::vector<int> shape, Rng& rng,
                                double density = 0.02) {
  nn::TensorT<float> out(std::move(shape));
  for (auto& x : out.v) {
    x = static_cast<float>(rng.next_range(0.0, 1.0) < density);
  }
  return out;
}

}  // namespace

TEST_CASE("weighted_f1 hand example and perfect agreement") {
  CHECK(weighted_f1({0, 0, 1}, {0, 0, 0}, 2) ==
        doctest::Approx(0.5333333333).epsilon(1e-9));
  CHECK(weighted_f1({0, 1, 2, 1}, {0, 1, 2, 1}, 3) == doctest::Approx(1.0));
  CHECK_THROWS(weighted_f1({0}, {0, 1}, 2));
  CHECK_THROWS(weighted_f1({5}, {0}, 2));
}

TEST_CASE("weighted_f1 agrees with the confusion-matrix oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int n_classes = rng.next_int(2, 15);
    const int n = rng.next_int(1, 60);
    std::vector<int> y_true(n), y_pred(n);
    for (int i = 0; i < n; ++i) {
      y_true[i] = rng.next_int(0, n_classes - 1);
      y_pred[i] = rng.next_int(0, n_classes - 1);
    }
    CHECK(std::abs(weighted_f1(y_true, y_pred, n_classes) -
                   weighted_f1_oracle(y_true, y_pred, n_classes)) < 1e-12);
  }
}

TEST_CASE("melody rank metrics match a brute-force oracle") {
  Rng rng(18);
  for (int trial = 0; trial < 300; ++trial) {
    const int queries = rng.next_int(1, 40);
    std::vector<int> ranks(queries);
    for (auto& r : ranks) r = rng.next_int(1, 50);

    auto report = melody_metrics_from_ranks(ranks);

    // Oracle: direct counting.
    double ap = 0;
    int h1 = 0, h5 = 0, h10 = 0, h25 = 0;
    for (int r : ranks) {
      ap += 1.0 / r;
      h1 += r <= 1;
      h5 += r <= 5;
      h10 += r <= 10;
      h25 += r <= 25;
    }
    CHECK(std::abs(report.metrics.at("map") - ap / queries) < 1e-12);
    CHECK(std::abs(report.metrics.at("hits@1") - double(h1) / queries) < 1e-12);
    CHECK(std::abs(report.metrics.at("hits@5") - double(h5) / queries) < 1e-12);
    CHECK(std::abs(report.metrics.at("hits@10") - double(h10) / queries) < 1e-12);
    CHECK(std::abs(report.metrics.at("hits@25") - double(h25) / queries) < 1e-12);
  }
}

TEST_CASE("chance anchors: 1/13, 0.04, k/50, H_50/50") {
  CHECK(chance_classification(13) == doctest::Approx(0.0769230769).epsilon(1e-9));
  CHECK(chance_classification(25) == doctest::Approx(0.04));
  CHECK(chance_hits_at(1) == doctest::Approx(0.02));
  CHECK(chance_hits_at(5) == doctest::Approx(0.10));
  CHECK(chance_hits_at(10) == doctest::Approx(0.20));
  CHECK(chance_hits_at(25) == doctest::Approx(0.50));
  CHECK(chance_map(50) == doctest::Approx(0.08998410676658847).epsilon(1e-12));
}

TEST_CASE("candidate_cosine hand values and degenerate candidates") {
  nn::Tensor probs({kPhraseSteps, kRollPitches});
  probs.v[0] = 1.0f;  // [1, 0, 0, ...]
  PhraseRoll cand;
  cand.data[0] = 1;
  cand.data[1] = 1;  // [1, 1, 0, ...]
  CHECK(candidate_cosine(probs, cand) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));

  PhraseRoll zero;
  CHECK(candidate_cosine(probs, zero) == -1.0);
}

TEST_CASE("cnn flatten width and head shapes") {
  CnnClassifier<float> model(128, 13, 25);
  CHECK(model.flat_width() == 65536);  // 64 * 32 * 32
  model.init_weights(3);

  nn::Tape<float> tape;
  auto bound = model.bind(tape, false);
  Rng rng(4);
  auto logits =
      model.forward(tape, bound, random_input({4, 128, 128}, rng), false, 0, 0);
  CHECK(tape.value(logits.genre).shape == std::vector<int>{1, 13});
  CHECK(tape.value(logits.style).shape == std::vector<int>{1, 25});
  for (float v : tape.value(logits.genre).v) CHECK(std::isfinite(v));
  for (float v : tape.value(logits.style).v) CHECK(std::isfinite(v));

  // Zero input also produces finite logits.
  auto zeros = model.forward(tape, bound, nn::TensorT<float>({4, 128, 128}),
                             false, 0, 0);
  for (float v : tape.value(zeros.genre).v) CHECK(std::isfinite(v));

  // Eval mode is deterministic.
  nn::Tape<float> tape2;
  auto bound2 = model.bind(tape2, false);
  auto input = random_input({4, 128, 128}, rng);
  auto a = model.forward(tape2, bound2, input, false, 0, 0);
  auto b = model.forward(tape2, bound2, input, false, 0, 0);
  CHECK(tape2.value(a.genre).v == tape2.value(b.genre).v);
  CHECK(tape2.value(a.style).v == tape2.value(b.style).v);
}

TEST_CASE("cnn gradients pass a sampled finite-difference check") {
  CnnClassifier<double> model(8, 3, 4);
  model.init_weights(11);
  Rng rng(12);
  auto input = nn::TensorT<double>({4, 8, 8});
  for (auto& x : input.v) x = rng.next_range(0.0, 1.0) < 0.3 ? 1.0 : 0.0;

  auto snapshot = [&] {
    std::vector<nn::TensorT<double>> params;
    for (auto* p : model.parameters()) params.push_back(*p);
    return params;
  }();

  auto run = [&](const std::vector<nn::TensorT<double>>& params,
                 bool with_grads, std::vector<nn::TensorT<double>>* grads) {
    CnnClassifier<double> m(8, 3, 4);
    auto target = m.parameters();
    for (size_t i = 0; i < target.size(); ++i) *target[i] = params[i];
    nn::Tape<double> tape;
    auto bound = m.bind(tape, with_grads);
    auto logits = m.forward(tape, bound, input, false, 0, 0);
    auto loss = tape.add(tape.softmax_cross_entropy(logits.genre, {1}),
                         tape.softmax_cross_entropy(logits.style, {2}));
    if (with_grads) {
      tape.backward(loss);
      for (auto var : bound.vars) grads->push_back(tape.grad(var));
    }
    return tape.value(loss).v[0];
  };

  nn::GradCheckProblem problem;
  problem.loss = [&](const std::vector<nn::TensorT<double>>& p) {
    return run(p, false, nullptr);
  };
  problem.gradients = [&](const std::vector<nn::TensorT<double>>& p) {
    std::vector<nn::TensorT<double>> grads;
    run(p, true, &grads);
    return grads;
  };
  CHECK(nn::gradient_check(problem, snapshot, 1e-4, 400, 99) < 1e-4);
}

TEST_CASE("transformer outputs live in (0,1) and eval is deterministic") {
  MelodyTransformer<float> model;
  model.init_weights(21);
  Rng rng(22);
  PhraseRoll source = random_phrase(rng), target = random_phrase(rng);

  nn::Tape<float> tape;
  auto bound = model.bind(tape, false);
  auto probs = model.forward_probs(tape, bound, phrase_to_tensor(source),
                                   phrase_to_tensor(target));
  CHECK(tape.value(probs).shape == std::vector<int>{64, 128});
  for (float v : tape.value(probs).v) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }
  auto again = model.forward_probs(tape, bound, phrase_to_tensor(source),
                                   phrase_to_tensor(target));
  CHECK(tape.value(again).v == tape.value(probs).v);
}

TEST_CASE("causal mask: changing target row t only affects later rows") {
  MelodyTransformer<float> model;
  model.init_weights(31);
  Rng rng(32);
  PhraseRoll source = random_phrase(rng);
  PhraseRoll target = random_phrase(rng, 30);

  nn::Tape<float> tape;
  auto bound = model.bind(tape, false);
  auto base = tape.value(model.forward_probs(
      tape, bound, phrase_to_tensor(source), phrase_to_tensor(target)));

  const int t = 20;
  PhraseRoll perturbed = target;
  for (int p = 0; p < kRollPitches; ++p) {
    perturbed.at(t, p) = 1 - perturbed.at(t, p);
  }
  auto changed = tape.value(model.forward_probs(
      tape, bound, phrase_to_tensor(source), phrase_to_tensor(perturbed)));

  // Teacher forcing shifts the decoder input right: a change to target row t
  // enters at decoder row t+1, so probabilities at rows <= t are untouched.
  for (int row = 0; row <= t; ++row) {
    for (int p = 0; p < kRollPitches; ++p) {
      CHECK(base.v[row * kRollPitches + p] ==
            changed.v[row * kRollPitches + p]);
    }
  }
  bool later_changed = false;
  for (int row = t + 1; row < kPhraseSteps && !later_changed; ++row) {
    for (int p = 0; p < kRollPitches; ++p) {
      if (base.v[row * kRollPitches + p] != changed.v[row * kRollPitches + p]) {
        later_changed = true;
        break;
      }
    }
  }
  CHECK(later_changed);
}

TEST_CASE("transformer gradients pass a sampled finite-difference check") {
  // Full stack at T=4 via truncated phrase tensors.
  MelodyTransformer<double> model;
  model.init_weights(41);
  Rng rng(42);
  nn::TensorT<double> source({4, 128}), target({4, 128});
  for (auto& x : source.v) x = rng.next_range(0.0, 1.0) < 0.1 ? 1.0 : 0.0;
  for (auto& x : target.v) x = rng.next_range(0.0, 1.0) < 0.1 ? 1.0 : 0.0;

  auto snapshot = [&] {
    std::vector<nn::TensorT<double>> params;
    for (auto* p : model.parameters()) params.push_back(*p);
    return params;
  }();

  auto run = [&](const std::vector<nn::TensorT<double>>& params,
                 bool with_grads, std::vector<nn::TensorT<double>>* grads) {
    MelodyTransformer<double> m;
    auto target_params = m.parameters();
    for (size_t i = 0; i < target_params.size(); ++i) {
      *target_params[i] = params[i];
    }
    nn::Tape<double> tape;
    auto bound = m.bind(tape, with_grads);
    auto probs = m.forward_probs(tape, bound, source, target);
    auto loss = tape.binary_cross_entropy(probs, target);
    if (with_grads) {
      tape.backward(loss);
      for (auto var : bound.vars) grads->push_back(tape.grad(var));
    }
    return tape.value(loss).v[0];
  };

  nn::GradCheckProblem problem;
  problem.loss = [&](const std::vector<nn::TensorT<double>>& p) {
    return run(p, false, nullptr);
  };
  problem.gradients = [&](const std::vector<nn::TensorT<double>>& p) {
    std::vector<nn::TensorT<double>> grads;
    run(p, true, &grads);
    return grads;
  };
  CHECK(nn::gradient_check(problem, snapshot, 1e-4, 250, 7) < 1e-4);
}

TEST_CASE("rank_candidates returns a permutation with index tie-breaks") {
  MelodyTransformer<float> model;
  model.init_weights(51);
  Rng rng(52);

  RankedQuery query;
  query.source = random_phrase(rng);
  PhraseRoll repeated = random_phrase(rng);
  for (int c = 0; c < 10; ++c) query.candidates.push_back(repeated);
  query.candidates.push_back(PhraseRoll{});  // degenerate all-zero
  query.positive_index = 0;

  auto outcome = rank_candidates(model, query);
  std::set<int> seen(outcome.order.begin(), outcome.order.end());
  CHECK(seen.size() == query.candidates.size());

  // Identical candidates score identically and stay in index order.
  for (int c = 0; c < 9; ++c) {
    CHECK(outcome.scores[c] == doctest::Approx(outcome.scores[c + 1]));
    CHECK(outcome.order[c] == c);
  }
  // The all-zero candidate scores -1 and lands last.
  CHECK(outcome.scores[10] == -1.0);
  CHECK(outcome.order.back() == 10);
  REQUIRE(outcome.degenerate.size() == 1);
  CHECK(outcome.degenerate[0] == 10);
}

TEST_CASE("query files round-trip through RLE JSONL") {
  Rng rng(61);
  std::vector<RankedQuery> queries;
  for (int q = 0; q < 3; ++q) {
    RankedQuery query;
    query.source = random_phrase(rng);
    for (int c = 0; c < kCandidatesPerQuery; ++c) {
      query.candidates.push_back(random_phrase(rng, rng.next_int(0, 20)));
    }
    query.positive_index = rng.next_int(0, kCandidatesPerQuery - 1);
    queries.push_back(query);
  }
  auto path =
      (std::filesystem::temp_directory_path() / "queries.jsonl").string();
  REQUIRE(write_queries(path, queries).ok());
  auto loaded = read_queries(path);
  REQUIRE(loaded.ok());
  REQUIRE(loaded.value().size() == queries.size());
  for (size_t q = 0; q < queries.size(); ++q) {
    CHECK(loaded.value()[q].positive_index == queries[q].positive_index);
    CHECK(loaded.value()[q].source == queries[q].source);
    CHECK(loaded.value()[q].candidates == queries[q].candidates);
  }

  // Dense encoding parses too.
  std::string dense_line = R"({"positive_index": 0, "source": {"dense": [)";
  for (int t = 0; t < kPhraseSteps; ++t) {
    dense_line += t ? ",[" : "[";
    for (int p = 0; p < kRollPitches; ++p) {
      dense_line += p ? ",0" : "1";
    }
    dense_line += "]";
  }
  dense_line += R"(]}, "candidates": [)";
  for (int c = 0; c < kCandidatesPerQuery; ++c) {
    dense_line += c ? "," : "";
    dense_line += R"({"rle": [8192]})";
  }
  dense_line += "]}";
  auto dense_path =
      (std::filesystem::temp_directory_path() / "dense.jsonl").string();
  std::ofstream(dense_path) << dense_line << "\n";
  auto dense = read_queries(dense_path);
  REQUIRE(dense.ok());
  CHECK(dense.value()[0].source.at(0, 0) == 1);
  CHECK(dense.value()[0].source.active_cells() == kPhraseSteps);

  CHECK_FALSE(read_queries("/nonexistent/queries.jsonl").ok());
}

TEST_CASE("tiny cnn memorizes a toy dataset deterministically") {
  auto build_data = [] {
    ClassifierDataset data;
    Rng rng(71);
    for (int i = 0; i < 8; ++i) {
      ClassifierSample sample;
      sample.genre = i % 2;
      sample.style = i % 2;
      // Distinct pitch bands per class.
      for (int t = 0; t < 64; ++t) {
        sample.roll.at(0, t, sample.genre == 0 ? 40 : 80) = 1;
        sample.roll.at(1, t, sample.genre == 0 ? 30 : 90) = 1;
      }
      data.samples.push_back(sample);
    }
    return data;
  };

  auto train_once = [&] {
    CnnClassifier<float> model(128, 2, 2);
    model.init_weights(5);
    TrainConfig config;
    config.epochs = 6;
    config.batch_size = 4;
    config.seed = 5;
    auto data = build_data();
    auto log = train_classifier(model, data, config);
    REQUIRE(log.ok());
    return std::make_pair(std::move(model), log.take());
  };

  auto [model, result] = train_once();
  auto data = build_data();
  int correct = 0;
  for (const auto& sample : data.samples) {
    auto [genre, style] = classify_roll(model, sample.roll);
    correct += genre == sample.genre;
  }
  CHECK(correct == 8);
  CHECK(result.log.epoch_losses.front() > result.log.epoch_losses.back());

  // Same seed, same checkpoint bytes.
  auto [model2, result2] = train_once();
  auto p1 = model.parameters();
  auto p2 = model2.parameters();
  for (size_t i = 0; i < p1.size(); ++i) CHECK(p1[i]->v == p2[i]->v);
  CHECK(result.log.epoch_losses == result2.log.epoch_losses);
}

TEST_CASE("classifier initial loss sits near ln13 + ln25") {
  CnnClassifier<float> model(128, 13, 25);
  model.init_weights(81);
  Rng rng(82);
  nn::Tape<float> tape;
  auto bound = model.bind(tape, false);
  double total = 0;
  const int samples = 8;
  for (int i = 0; i < samples; ++i) {
    auto logits =
        model.forward(tape, bound, random_input({4, 128, 128}, rng), false, 0, 0);
    auto loss = tape.add(
        tape.softmax_cross_entropy(logits.genre, {rng.next_int(0, 12)}),
        tape.softmax_cross_entropy(logits.style, {rng.next_int(0, 24)}));
    total += tape.value(loss).v[0];
  }
  CHECK(total / samples ==
        doctest::Approx(std::log(13.0) + std::log(25.0)).epsilon(0.15));
}

TEST_CASE("transformer initial BCE sits near ln 2") {
  MelodyTransformer<float> model;
  model.init_weights(91);
  Rng rng(92);
  nn::Tape<float> tape;
  auto bound = model.bind(tape, false);
  auto target = phrase_to_tensor(random_phrase(rng));
  auto probs = model.forward_probs(tape, bound,
                                   phrase_to_tensor(random_phrase(rng)), target);
  auto loss = tape.binary_cross_entropy(probs, target);
  CHECK(tape.value(loss).v[0] == doctest::Approx(std::log(2.0)).epsilon(0.25));
}

TEST_CASE("model checkpoints round trip through disk") {
  auto dir = std::filesystem::temp_directory_path();
  CnnClassifier<float> model(128, 13, 25);
  model.init_weights(101);
  TrainResult result;
  result.log.epoch_losses = {5.7, 3.2};
  auto cnn_path = (dir / "cnn.ckpt").string();
  REQUIRE(save_cnn_checkpoint(cnn_path, model, result, 101).ok());
  auto loaded = load_cnn_checkpoint(cnn_path);
  REQUIRE(loaded.ok());
  auto p1 = model.parameters();
  auto p2 = loaded.value().parameters();
  for (size_t i = 0; i < p1.size(); ++i) CHECK(p1[i]->v == p2[i]->v);

  MelodyTransformer<float> melody;
  melody.init_weights(102);
  auto melody_path = (dir / "melody.ckpt").string();
  REQUIRE(save_transformer_checkpoint(melody_path, melody, result, 102).ok());
  auto loaded_melody = load_transformer_checkpoint(melody_path);
  REQUIRE(loaded_melody.ok());
  auto m1 = melody.parameters();
  auto m2 = loaded_melody.value().parameters();
  for (size_t i = 0; i < m1.size(); ++i) CHECK(m1[i]->v == m2[i]->v);

  // Kind mismatch is refused.
  CHECK_FALSE(load_cnn_checkpoint(melody_path).ok());
  CHECK_FALSE(load_transformer_checkpoint(cnn_path).ok());
}

TEST_CASE("phrase pairs and queries come out of a mock sweep") {
  Taxonomy tax = testing::tiny_taxonomy();
  MockBackend mock(111, tax);
  auto out_dir = std::filesystem::temp_directory_path() / "model_sweep";
  std::filesystem::remove_all(out_dir);
  SweepConfig config;
  config.songs_per_combo = 15;
  config.out_dir = out_dir.string();
  config.seed = 112;
  auto manifest = generate_dataset(mock, tax, config);
  REQUIRE(manifest.ok());

  auto pairs = load_phrase_pairs(manifest.value(), out_dir.string());
  REQUIRE(pairs.ok());
  CHECK(pairs.value().size() == manifest.value().rows.size());

  auto queries = make_queries(manifest.value(), out_dir.string(), 5, 113);
  REQUIRE(queries.ok());
  CHECK(queries.value().size() == 5);
  for (const auto& query : queries.value()) {
    CHECK(query.candidates.size() == kCandidatesPerQuery);
    CHECK(query.positive_index >= 0);
    CHECK(query.positive_index < kCandidatesPerQuery);
    // The positive really is a continuation phrase (non-empty).
    CHECK(query.candidates[query.positive_index].active_cells() > 0);
  }
  auto again = make_queries(manifest.value(), out_dir.string(), 5, 113);
  REQUIRE(again.ok());
  for (size_t q = 0; q < 5; ++q) {
    CHECK(again.value()[q].positive_index == queries.value()[q].positive_index);
    CHECK(again.value()[q].source == queries.value()[q].source);
  }

  auto dataset = load_classifier_dataset(manifest.value(), out_dir.string(), tax);
  REQUIRE(dataset.ok());
  CHECK(dataset.value().samples.size() == manifest.value().rows.size());
}
