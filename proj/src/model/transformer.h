#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nn/init.h"
#include "nn/tape.h"
#include "nn/tensor.h"

namespace midistring::model {

using nn::Tape;
using nn::TensorT;

inline constexpr int kModelDim = 128;   // pitches map 1:1 to embedding dims
inline constexpr int kHeads = 4;
inline constexpr int kHeadDim = kModelDim / kHeads;
inline constexpr int kFeedForwardDim = 512;
inline constexpr int kEncoderLayers = 2;
inline constexpr int kDecoderLayers = 2;

// Encoder-decoder transformer for melody completion: 2 layers each side,
// 4 attention heads, 512-unit feedforward, post-layer-norm residuals,
// sinusoidal positions, per-pitch sigmoid outputs. Sequence length is free;
// training and ranking use 64-step phrases.
template <typename T>
class MelodyTransformer {
 public:
  using Var = typename Tape<T>::Var;

  MelodyTransformer() { build_layout(); }

  void init_weights(uint64_t seed) {
    Rng rng(mix_seed(seed, "transformer-init"));
    for (size_t i = 0; i < params_.size(); ++i) {
      TensorT<T>& p = params_[i];
      const std::string& name = names_[i];
      if (p.ndim() != 2) continue;  // biases and norm gains keep defaults
      if (name.find(".ff") != std::string::npos ||
          name.find("proj") != std::string::npos) {
        nn::kaiming_uniform(p, p.dim(0), rng);
      } else {
        nn::xavier_uniform(p, p.dim(0), p.dim(1), rng);
      }
    }
  }

  std::vector<TensorT<T>*> parameters() {
    std::vector<TensorT<T>*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(&p);
    return out;
  }
  std::vector<const TensorT<T>*> parameters() const {
    std::vector<const TensorT<T>*> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(&p);
    return out;
  }
  const std::vector<std::string>& parameter_names() const { return names_; }

  struct Bound {
    std::vector<Var> vars;
  };
  Bound bind(Tape<T>& tape, bool trainable) const {
    Bound bound;
    bound.vars.reserve(params_.size());
    for (const auto& p : params_) bound.vars.push_back(tape.leaf(p, trainable));
    return bound;
  }

  // Decoder input for teacher forcing: target shifted one step later with a
  // zero start-of-sequence row.
  static TensorT<T> shift_right(const TensorT<T>& target) {
    TensorT<T> shifted(target.shape);
    const int t = target.dim(0), d = target.dim(1);
    for (int i = 1; i < t; ++i) {
      for (int j = 0; j < d; ++j) {
        shifted.v[static_cast<int64_t>(i) * d + j] =
            target.v[static_cast<int64_t>(i - 1) * d + j];
      }
    }
    return shifted;
  }

  Var encode(Tape<T>& tape, const Bound& bound,
             const TensorT<T>& source) const {
    check_input(source, "encoder input");
    auto x = project(tape, bound, source, kEncProjW);
    for (int layer = 0; layer < kEncoderLayers; ++layer) {
      const int base = enc_base(layer);
      auto attended = attention(tape, bound, x, x, x, base + kAttnOffset,
                                /*causal=*/false);
      x = tape.layer_norm(tape.add(x, attended), bound.vars[base + kLn1Offset],
                          bound.vars[base + kLn1Offset + 1]);
      auto ff = feed_forward(tape, bound, x, base + kFfOffset);
      x = tape.layer_norm(tape.add(x, ff), bound.vars[base + kLn2Offset],
                          bound.vars[base + kLn2Offset + 1]);
    }
    return x;
  }

  Var decode_probs(Tape<T>& tape, const Bound& bound, Var encoded,
                   const TensorT<T>& decoder_input) const {
    check_input(decoder_input, "decoder input");
    auto x = project(tape, bound, decoder_input, kDecProjW);
    for (int layer = 0; layer < kDecoderLayers; ++layer) {
      const int base = dec_base(layer);
      auto self = attention(tape, bound, x, x, x, base + kSelfAttnOffset,
                            /*causal=*/true);
      x = tape.layer_norm(tape.add(x, self),
                          bound.vars[base + kDecLn1Offset],
                          bound.vars[base + kDecLn1Offset + 1]);
      auto cross = attention(tape, bound, x, encoded, encoded,
                             base + kCrossAttnOffset, /*causal=*/false);
      x = tape.layer_norm(tape.add(x, cross),
                          bound.vars[base + kDecLn2Offset],
                          bound.vars[base + kDecLn2Offset + 1]);
      auto ff = feed_forward(tape, bound, x, base + kDecFfOffset);
      x = tape.layer_norm(tape.add(x, ff),
                          bound.vars[base + kDecLn3Offset],
                          bound.vars[base + kDecLn3Offset + 1]);
    }
    auto logits = tape.linear(x, bound.vars[kOutProjW], bound.vars[kOutProjW + 1]);
    return tape.sigmoid(logits);
  }

  // Teacher-forced probabilities for (source, target) phrase rolls.
  Var forward_probs(Tape<T>& tape, const Bound& bound,
                    const TensorT<T>& source, const TensorT<T>& target) const {
    return decode_probs(tape, bound, encode(tape, bound, source),
                        shift_right(target));
  }

  static void check_input(const TensorT<T>& x, const char* what) {
    if (x.ndim() != 2 || x.dim(1) != kModelDim) {
      throw std::invalid_argument(std::string(what) +
                                  ": expected [T,128], got " +
                                  nn::shape_string(x.shape));
    }
  }

  static TensorT<T> positional_encoding(int steps) {
    TensorT<T> pe({steps, kModelDim});
    for (int t = 0; t < steps; ++t) {
      for (int i = 0; i < kModelDim / 2; ++i) {
        const double angle =
            t / std::pow(10000.0, (2.0 * i) / kModelDim);
        pe.v[static_cast<int64_t>(t) * kModelDim + 2 * i] =
            static_cast<T>(std::sin(angle));
        pe.v[static_cast<int64_t>(t) * kModelDim + 2 * i + 1] =
            static_cast<T>(std::cos(angle));
      }
    }
    return pe;
  }

 private:
  // Parameter layout:
  //   0: enc_proj.w/.b, dec_proj.w/.b, out_proj.w/.b
  //   per encoder layer: attn(wq bq wk bk wv bv wo bo) ln1(g b) ff(w1 b1 w2 b2) ln2(g b)
  //   per decoder layer: self-attn(8) ln1(2) cross-attn(8) ln2(2) ff(4) ln3(2)
  static constexpr int kEncProjW = 0;
  static constexpr int kDecProjW = 2;
  static constexpr int kOutProjW = 4;
  static constexpr int kGlobals = 6;
  static constexpr int kAttnSize = 7;  // wq bq wk wv bv wo bo
  static constexpr int kAttnOffset = 0;
  static constexpr int kLn1Offset = kAttnSize;
  static constexpr int kFfOffset = kLn1Offset + 2;
  static constexpr int kLn2Offset = kFfOffset + 4;
  static constexpr int kEncLayerSize = kLn2Offset + 2;
  static constexpr int kSelfAttnOffset = 0;
  static constexpr int kDecLn1Offset = kAttnSize;
  static constexpr int kCrossAttnOffset = kDecLn1Offset + 2;
  static constexpr int kDecLn2Offset = kCrossAttnOffset + kAttnSize;
  static constexpr int kDecFfOffset = kDecLn2Offset + 2;
  static constexpr int kDecLn3Offset = kDecFfOffset + 4;
  static constexpr int kDecLayerSize = kDecLn3Offset + 2;

  static constexpr int enc_base(int layer) {
    return kGlobals + layer * kEncLayerSize;
  }
  static constexpr int dec_base(int layer) {
    return kGlobals + kEncoderLayers * kEncLayerSize + layer * kDecLayerSize;
  }

  void add_param(const std::string& name, std::vector<int> shape,
                 T fill = T{0}) {
    names_.push_back(name);
    params_.emplace_back(std::move(shape));
    if (fill != T{0}) {
      for (auto& x : params_.back().v) x = fill;
    }
  }

  // No key bias: softmax scores are invariant to a per-key shift, so its
  // gradient is identically zero.
  void add_attention(const std::string& prefix) {
    for (const char* part : {"wq", "bq", "wk", "wv", "bv", "wo", "bo"}) {
      if (part[0] == 'w') {
        add_param(prefix + "." + part, {kModelDim, kModelDim});
      } else {
        add_param(prefix + "." + part, {kModelDim});
      }
    }
  }

  void add_layer_norm(const std::string& prefix) {
    add_param(prefix + ".g", {kModelDim}, T{1});
    add_param(prefix + ".b", {kModelDim});
  }

  void add_feed_forward(const std::string& prefix) {
    add_param(prefix + ".w1", {kModelDim, kFeedForwardDim});
    add_param(prefix + ".b1", {kFeedForwardDim});
    add_param(prefix + ".w2", {kFeedForwardDim, kModelDim});
    add_param(prefix + ".b2", {kModelDim});
  }

  void build_layout() {
    add_param("enc_proj.w", {kModelDim, kModelDim});
    add_param("enc_proj.b", {kModelDim});
    add_param("dec_proj.w", {kModelDim, kModelDim});
    add_param("dec_proj.b", {kModelDim});
    add_param("out_proj.w", {kModelDim, kModelDim});
    add_param("out_proj.b", {kModelDim});
    for (int layer = 0; layer < kEncoderLayers; ++layer) {
      const std::string prefix = "enc" + std::to_string(layer);
      add_attention(prefix + ".attn");
      add_layer_norm(prefix + ".ln1");
      add_feed_forward(prefix + ".ff");
      add_layer_norm(prefix + ".ln2");
    }
    for (int layer = 0; layer < kDecoderLayers; ++layer) {
      const std::string prefix = "dec" + std::to_string(layer);
      add_attention(prefix + ".self");
      add_layer_norm(prefix + ".ln1");
      add_attention(prefix + ".cross");
      add_layer_norm(prefix + ".ln2");
      add_feed_forward(prefix + ".ff");
      add_layer_norm(prefix + ".ln3");
    }
  }

  Var project(Tape<T>& tape, const Bound& bound, const TensorT<T>& input,
              int proj_index) const {
    auto x = tape.leaf(input, false);
    auto projected = tape.linear(x, bound.vars[proj_index],
                                 bound.vars[proj_index + 1]);
    auto positions = tape.leaf(positional_encoding(input.dim(0)), false);
    return tape.add(projected, positions);
  }

  Var feed_forward(Tape<T>& tape, const Bound& bound, Var x, int base) const {
    auto hidden = tape.relu(
        tape.linear(x, bound.vars[base], bound.vars[base + 1]));
    return tape.linear(hidden, bound.vars[base + 2], bound.vars[base + 3]);
  }

  Var attention(Tape<T>& tape, const Bound& bound, Var q_in, Var k_in,
                Var v_in, int base, bool causal) const {
    auto q = tape.linear(q_in, bound.vars[base + 0], bound.vars[base + 1]);
    auto k = tape.matmul(k_in, bound.vars[base + 2]);
    auto v = tape.linear(v_in, bound.vars[base + 3], bound.vars[base + 4]);
    const int tq = tape.value(q).dim(0);
    const int tk = tape.value(k).dim(0);

    Var mask;
    if (causal) {
      TensorT<T> m({tq, tk});
      for (int i = 0; i < tq; ++i) {
        for (int j = i + 1; j < tk; ++j) {
          m.v[static_cast<int64_t>(i) * tk + j] = static_cast<T>(-1e9);
        }
      }
      mask = tape.leaf(std::move(m), false);
    }

    std::vector<Var> heads;
    heads.reserve(kHeads);
    const T scale = static_cast<T>(1.0 / std::sqrt(double(kHeadDim)));
    for (int h = 0; h < kHeads; ++h) {
      auto qh = tape.slice_cols(q, h * kHeadDim, (h + 1) * kHeadDim);
      auto kh = tape.slice_cols(k, h * kHeadDim, (h + 1) * kHeadDim);
      auto vh = tape.slice_cols(v, h * kHeadDim, (h + 1) * kHeadDim);
      auto scores = tape.scale(tape.matmul_nt(qh, kh), scale);
      if (causal) scores = tape.add(scores, mask);
      auto weights = tape.softmax_rows(scores);
      heads.push_back(tape.matmul(weights, vh));
    }
    auto merged = tape.concat_cols(heads);
    return tape.linear(merged, bound.vars[base + 5], bound.vars[base + 6]);
  }

  std::vector<TensorT<T>> params_;
  std::vector<std::string> names_;
};

}  // namespace midistring::model
