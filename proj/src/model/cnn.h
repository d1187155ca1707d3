#pragma once

#include <string>
#include <vector>

#include "nn/init.h"
#include "nn/tape.h"
#include "nn/tensor.h"

namespace midistring::model {

using nn::Tape;
using nn::TensorT;

// Two-conv classifier over 4-channel piano rolls with separate genre and
// style heads. On the 128x128 input the trunk runs
//   conv 4->32 (3x3) + relu + 2x2 pool
//   conv 32->64 (3x3) + relu + 2x2 pool
//   flatten 64*32*32 = 65536 -> fc 128 + relu + 50% dropout
// input_hw is parameterized so gradient checks can run the full stack on
// small inputs.
template <typename T>
class CnnClassifier {
 public:
  CnnClassifier(int input_hw, int genre_classes, int style_classes)
      : input_hw_(input_hw),
        genre_classes_(genre_classes),
        style_classes_(style_classes),
        flat_width_(64 * (input_hw / 4) * (input_hw / 4)),
        conv1_w_({32, 4, 3, 3}),
        conv1_b_({32}),
        conv2_w_({64, 32, 3, 3}),
        conv2_b_({64}),
        fc_w_({flat_width_, 128}),
        fc_b_({128}),
        genre_w_({128, genre_classes}),
        genre_b_({genre_classes}),
        style_w_({128, style_classes}),
        style_b_({style_classes}) {}

  void init_weights(uint64_t seed) {
    Rng rng(mix_seed(seed, "cnn-init"));
    nn::kaiming_uniform(conv1_w_, 4 * 9, rng);
    nn::kaiming_uniform(conv2_w_, 32 * 9, rng);
    nn::kaiming_uniform(fc_w_, flat_width_, rng);
    nn::kaiming_uniform(genre_w_, 128, rng);
    nn::kaiming_uniform(style_w_, 128, rng);
  }

  int input_hw() const { return input_hw_; }
  int genre_classes() const { return genre_classes_; }
  int style_classes() const { return style_classes_; }
  int flat_width() const { return flat_width_; }

  std::vector<TensorT<T>*> parameters() {
    return {&conv1_w_, &conv1_b_, &conv2_w_, &conv2_b_, &fc_w_,
            &fc_b_,    &genre_w_, &genre_b_, &style_w_, &style_b_};
  }
  std::vector<const TensorT<T>*> parameters() const {
    return {&conv1_w_, &conv1_b_, &conv2_w_, &conv2_b_, &fc_w_,
            &fc_b_,    &genre_w_, &genre_b_, &style_w_, &style_b_};
  }
  static std::vector<std::string> parameter_names() {
    return {"conv1.w", "conv1.b", "conv2.w", "conv2.b", "fc.w",
            "fc.b",    "genre.w", "genre.b", "style.w", "style.b"};
  }

  // Parameter leaves on a tape; one bind per tape, shared by every sample.
  struct Bound {
    std::vector<typename Tape<T>::Var> vars;
  };
  Bound bind(Tape<T>& tape, bool trainable) const {
    Bound bound;
    for (const TensorT<T>* p : parameters()) {
      bound.vars.push_back(tape.leaf(*p, trainable));
    }
    return bound;
  }

  struct Logits {
    typename Tape<T>::Var genre;
    typename Tape<T>::Var style;
  };

  // One sample forward. dropout_stream must be unique per (step, sample)
  // during training; ignored in eval mode.
  Logits forward(Tape<T>& tape, const Bound& bound, const TensorT<T>& input,
                 bool train_mode, uint64_t dropout_seed,
                 uint64_t dropout_stream) const {
    nn::check_shape(input, {4, input_hw_, input_hw_}, "cnn input");
    const auto& p = bound.vars;
    auto x = tape.leaf(input, false);
    x = tape.maxpool2(tape.relu(tape.conv2d(x, p[0], p[1])));
    x = tape.maxpool2(tape.relu(tape.conv2d(x, p[2], p[3])));
    auto flat = tape.flatten_rows(x);
    auto hidden = tape.relu(tape.linear(flat, p[4], p[5]));
    hidden = tape.dropout(hidden, static_cast<T>(0.5), dropout_seed,
                          dropout_stream, train_mode);
    return {tape.linear(hidden, p[6], p[7]), tape.linear(hidden, p[8], p[9])};
  }

 private:
  int input_hw_;
  int genre_classes_;
  int style_classes_;
  int flat_width_;
  TensorT<T> conv1_w_, conv1_b_;
  TensorT<T> conv2_w_, conv2_b_;
  TensorT<T> fc_w_, fc_b_;
  TensorT<T> genre_w_, genre_b_;
  TensorT<T> style_w_, style_b_;
};

}  // namespace midistring::model
