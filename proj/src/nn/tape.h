#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "core/rng.h"
#include "nn/kernels.h"
#include "nn/tensor.h"

namespace midistring::nn {

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kBceEps = 1e-7;

// Define-by-run reverse-mode tape. A tape owns every node created through
// it; backward() walks the nodes in reverse creation order, which is a
// topological order for any graph built this way. One tape per forward pass.
template <typename T>
class Tape {
 public:
  struct Var {
    int idx = -1;
    bool valid() const { return idx >= 0; }
  };

  Var leaf(TensorT<T> value, bool requires_grad = false) {
    return push(std::move(value), requires_grad, nullptr);
  }

  const TensorT<T>& value(Var v) const { return nodes_[v.idx].value; }
  const TensorT<T>& grad(Var v) const { return nodes_[v.idx].grad; }
  bool requires_grad(Var v) const { return nodes_[v.idx].requires_grad; }
  size_t node_count() const { return nodes_.size(); }

  // Drops every node created after a node_count() mark. Vars below the mark
  // stay valid; forward-only loops reuse one tape without growing it.
  void truncate(size_t mark) {
    if (mark < nodes_.size()) nodes_.resize(mark);
  }

  // ---- elementwise and structural ops ----

  Var add(Var a, Var b) {
    const auto& av = value(a);
    const auto& bv = value(b);
    if (!av.same_shape(bv)) throw std::invalid_argument("add: shape mismatch");
    TensorT<T> out = av;
    for (int64_t i = 0; i < out.size(); ++i) out.v[i] += bv.v[i];
    Var result = push(std::move(out), requires_grad(a) || requires_grad(b),
                      nullptr);
    set_back(result, [this, a, b, result] {
      const auto& gout = grad(result);
      if (requires_grad(a)) {
        auto& ga = ensure_grad(a);
        for (int64_t i = 0; i < gout.size(); ++i) ga.v[i] += gout.v[i];
      }
      if (requires_grad(b)) {
        auto& gb = ensure_grad(b);
        for (int64_t i = 0; i < gout.size(); ++i) gb.v[i] += gout.v[i];
      }
    });
    return result;
  }

  // x [N,M] plus a length-M bias on every row.
  Var add_bias_rows(Var x, Var b) {
    const auto& xv = value(x);
    const auto& bv = value(b);
    if (xv.ndim() != 2 || bv.ndim() != 1 || bv.dim(0) != xv.dim(1)) {
      throw std::invalid_argument("add_bias_rows: shape mismatch");
    }
    const int n = xv.dim(0), m = xv.dim(1);
    TensorT<T> out = xv;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) out.v[i * m + j] += bv.v[j];
    }
    Var result =
        push(std::move(out), requires_grad(x) || requires_grad(b), nullptr);
    set_back(result, [this, x, b, result, n, m] {
      const auto& gout = grad(result);
      if (requires_grad(x)) {
        auto& gx = ensure_grad(x);
        for (int64_t i = 0; i < gout.size(); ++i) gx.v[i] += gout.v[i];
      }
      if (requires_grad(b)) {
        auto& gb = ensure_grad(b);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < m; ++j) gb.v[j] += gout.v[i * m + j];
        }
      }
    });
    return result;
  }

  Var scale(Var a, T c) {
    TensorT<T> out = value(a);
    for (auto& x : out.v) x *= c;
    Var result = push(std::move(out), requires_grad(a), nullptr);
    set_back(result, [this, a, c, result] {
      if (!requires_grad(a)) return;
      const auto& gout = grad(result);
      auto& ga = ensure_grad(a);
      for (int64_t i = 0; i < gout.size(); ++i) ga.v[i] += c * gout.v[i];
    });
    return result;
  }

  Var relu(Var a) {
    TensorT<T> out = value(a);
    for (auto& x : out.v) x = x > T{0} ? x : T{0};
    Var result = push(std::move(out), requires_grad(a), nullptr);
    set_back(result, [this, a, result] {
      if (!requires_grad(a)) return;
      const auto& gout = grad(result);
      const auto& av = value(a);
      auto& ga = ensure_grad(a);
      for (int64_t i = 0; i < gout.size(); ++i) {
        if (av.v[i] > T{0}) ga.v[i] += gout.v[i];
      }
    });
    return result;
  }

  Var sigmoid(Var a) {
    TensorT<T> out = value(a);
    for (auto& x : out.v) x = T{1} / (T{1} + std::exp(-x));
    Var result = push(std::move(out), requires_grad(a), nullptr);
    set_back(result, [this, a, result] {
      if (!requires_grad(a)) return;
      const auto& gout = grad(result);
      const auto& yv = value(result);
      auto& ga = ensure_grad(a);
      for (int64_t i = 0; i < gout.size(); ++i) {
        ga.v[i] += gout.v[i] * yv.v[i] * (T{1} - yv.v[i]);
      }
    });
    return result;
  }

  // Inverted dropout: survivors scale by 1/(1-rate) so eval is the identity.
  // The mask stream is a pure function of (seed, counter).
  Var dropout(Var x, T rate, uint64_t seed, uint64_t counter, bool train) {
    if (!train || rate <= T{0}) return x;
    const auto& xv = value(x);
    std::vector<uint8_t> mask(static_cast<size_t>(xv.size()));
    Rng rng(mix_seed(mix_seed(seed, "dropout"), counter));
    for (auto& keep : mask) keep = rng.next_double() >= rate ? 1 : 0;
    const T inv_keep = T{1} / (T{1} - rate);
    TensorT<T> out = xv;
    for (int64_t i = 0; i < out.size(); ++i) {
      out.v[i] = mask[i] ? out.v[i] * inv_keep : T{0};
    }
    Var result = push(std::move(out), requires_grad(x), nullptr);
    set_back(result, [this, x, result, mask = std::move(mask), inv_keep] {
      if (!requires_grad(x)) return;
      const auto& gout = grad(result);
      auto& gx = ensure_grad(x);
      for (int64_t i = 0; i < gout.size(); ++i) {
        if (mask[i]) gx.v[i] += gout.v[i] * inv_keep;
      }
    });
    return result;
  }

  // Reshape to [1, numel].
  Var flatten_rows(Var x) {
    const auto& xv = value(x);
    TensorT<T> out({1, static_cast<int>(xv.size())}, xv.v);
    Var result = push(std::move(out), requires_grad(x), nullptr);
    set_back(result, [this, x, result] {
      if (!requires_grad(x)) return;
      const auto& gout = grad(result);
      auto& gx = ensure_grad(x);
      for (int64_t i = 0; i < gout.size(); ++i) gx.v[i] += gout.v[i];
    });
    return result;
  }

  Var transpose(Var a) {
    const auto& av = value(a);
    if (av.ndim() != 2) throw std::invalid_argument("transpose: need 2-D");
    const int n = av.dim(0), m = av.dim(1);
    TensorT<T> out({m, n});
    kernels::transpose(av.data(), out.data(), n, m);
    Var result = push(std::move(out), requires_grad(a), nullptr);
    set_back(result, [this, a, result, n, m] {
      if (!requires_grad(a)) return;
      const auto& gout = grad(result);  // [m, n]
      auto& ga = ensure_grad(a);        // [n, m]
      for (int j = 0; j < m; ++j) {
        for (int i = 0; i < n; ++i) {
          ga.v[static_cast<int64_t>(i) * m + j] +=
              gout.v[static_cast<int64_t>(j) * n + i];
        }
      }
    });
    return result;
  }

  Var slice_cols(Var a, int c0, int c1) {
    const auto& av = value(a);
    if (av.ndim() != 2 || c0 < 0 || c1 > av.dim(1) || c0 >= c1) {
      throw std::invalid_argument("slice_cols: bad range");
    }
    const int n = av.dim(0), m = av.dim(1), w = c1 - c0;
    TensorT<T> out({n, w});
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < w; ++j) {
        out.v[static_cast<int64_t>(i) * w + j] =
            av.v[static_cast<int64_t>(i) * m + c0 + j];
      }
    }
    Var result = push(std::move(out), requires_grad(a), nullptr);
    set_back(result, [this, a, result, n, m, w, c0] {
      if (!requires_grad(a)) return;
      const auto& gout = grad(result);
      auto& ga = ensure_grad(a);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < w; ++j) {
          ga.v[static_cast<int64_t>(i) * m + c0 + j] +=
              gout.v[static_cast<int64_t>(i) * w + j];
        }
      }
    });
    return result;
  }

  Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
    const int n = value(parts[0]).dim(0);
    int m = 0;
    bool rg = false;
    for (Var p : parts) {
      if (value(p).ndim() != 2 || value(p).dim(0) != n) {
        throw std::invalid_argument("concat_cols: shape mismatch");
      }
      m += value(p).dim(1);
      rg = rg || requires_grad(p);
    }
    TensorT<T> out({n, m});
    int at = 0;
    for (Var p : parts) {
      const auto& pv = value(p);
      const int w = pv.dim(1);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < w; ++j) {
          out.v[static_cast<int64_t>(i) * m + at + j] =
              pv.v[static_cast<int64_t>(i) * w + j];
        }
      }
      at += w;
    }
    Var result = push(std::move(out), rg, nullptr);
    set_back(result, [this, parts, result, n, m] {
      const auto& gout = grad(result);
      int at = 0;
      for (Var p : parts) {
        const int w = value(p).dim(1);
        if (requires_grad(p)) {
          auto& gp = ensure_grad(p);
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < w; ++j) {
              gp.v[static_cast<int64_t>(i) * w + j] +=
                  gout.v[static_cast<int64_t>(i) * m + at + j];
            }
          }
        }
        at += w;
      }
    });
    return result;
  }

  Var softmax_rows(Var a) {
    const auto& av = value(a);
    if (av.ndim() != 2) throw std::invalid_argument("softmax_rows: need 2-D");
    const int n = av.dim(0), m = av.dim(1);
    TensorT<T> out = av;
    for (int i = 0; i < n; ++i) {
      T* row = out.data() + static_cast<int64_t>(i) * m;
      T max = row[0];
      for (int j = 1; j < m; ++j) max = std::max(max, row[j]);
      T sum{0};
      for (int j = 0; j < m; ++j) {
        row[j] = std::exp(row[j] - max);
        sum += row[j];
      }
      for (int j = 0; j < m; ++j) row[j] /= sum;
    }
    Var result = push(std::move(out), requires_grad(a), nullptr);
    set_back(result, [this, a, result, n, m] {
      if (!requires_grad(a)) return;
      const auto& gout = grad(result);
      const auto& yv = value(result);
      auto& ga = ensure_grad(a);
      for (int i = 0; i < n; ++i) {
        const T* y = yv.data() + static_cast<int64_t>(i) * m;
        const T* gy = gout.data() + static_cast<int64_t>(i) * m;
        T dot{0};
        for (int j = 0; j < m; ++j) dot += gy[j] * y[j];
        T* gx = ga.data() + static_cast<int64_t>(i) * m;
        for (int j = 0; j < m; ++j) gx[j] += y[j] * (gy[j] - dot);
      }
    });
    return result;
  }

  // Row-wise layer normalization with learned gain and bias.
  Var layer_norm(Var x, Var gain, Var bias) {
    const auto& xv = value(x);
    const auto& gv = value(gain);
    const auto& bv = value(bias);
    if (xv.ndim() != 2 || gv.ndim() != 1 || bv.ndim() != 1 ||
        gv.dim(0) != xv.dim(1) || bv.dim(0) != xv.dim(1)) {
      throw std::invalid_argument("layer_norm: shape mismatch");
    }
    const int n = xv.dim(0), m = xv.dim(1);
    TensorT<T> out({n, m});
    TensorT<T> xhat({n, m});
    std::vector<T> inv_std(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const T* row = xv.data() + static_cast<int64_t>(i) * m;
      T mean{0};
      for (int j = 0; j < m; ++j) mean += row[j];
      mean /= static_cast<T>(m);
      T var{0};
      for (int j = 0; j < m; ++j) var += (row[j] - mean) * (row[j] - mean);
      var /= static_cast<T>(m);
      const T inv = T{1} / std::sqrt(var + static_cast<T>(kLayerNormEps));
      inv_std[i] = inv;
      for (int j = 0; j < m; ++j) {
        const T xh = (row[j] - mean) * inv;
        xhat.v[static_cast<int64_t>(i) * m + j] = xh;
        out.v[static_cast<int64_t>(i) * m + j] = gv.v[j] * xh + bv.v[j];
      }
    }
    Var result = push(std::move(out),
                      requires_grad(x) || requires_grad(gain) ||
                          requires_grad(bias),
                      nullptr);
    set_back(result, [this, x, gain, bias, result, n, m,
                      xhat = std::move(xhat), inv_std = std::move(inv_std)] {
      const auto& gout = grad(result);
      const auto& gv = value(gain);
      if (requires_grad(gain)) {
        auto& gg = ensure_grad(gain);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < m; ++j) {
            gg.v[j] += gout.v[static_cast<int64_t>(i) * m + j] *
                       xhat.v[static_cast<int64_t>(i) * m + j];
          }
        }
      }
      if (requires_grad(bias)) {
        auto& gb = ensure_grad(bias);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < m; ++j) {
            gb.v[j] += gout.v[static_cast<int64_t>(i) * m + j];
          }
        }
      }
      if (requires_grad(x)) {
        auto& gx = ensure_grad(x);
        for (int i = 0; i < n; ++i) {
          const T* gy = gout.data() + static_cast<int64_t>(i) * m;
          const T* xh = xhat.data() + static_cast<int64_t>(i) * m;
          T mean_g{0}, mean_gx{0};
          for (int j = 0; j < m; ++j) {
            const T g = gy[j] * gv.v[j];
            mean_g += g;
            mean_gx += g * xh[j];
          }
          mean_g /= static_cast<T>(m);
          mean_gx /= static_cast<T>(m);
          for (int j = 0; j < m; ++j) {
            const T g = gy[j] * gv.v[j];
            gx.v[static_cast<int64_t>(i) * m + j] +=
                (g - mean_g - xh[j] * mean_gx) * inv_std[i];
          }
        }
      }
    });
    return result;
  }

  // ---- matmuls and layers ----

  Var matmul(Var a, Var b) {
    const auto& av = value(a);
    const auto& bv = value(b);
    if (av.ndim() != 2 || bv.ndim() != 2 || av.dim(1) != bv.dim(0)) {
      throw std::invalid_argument("matmul: shape mismatch " +
                                  shape_string(av.shape) + " x " +
                                  shape_string(bv.shape));
    }
    const int n = av.dim(0), k = av.dim(1), m = bv.dim(1);
    TensorT<T> out({n, m});
    kernels::matmul_nn(av.data(), bv.data(), out.data(), n, k, m, false);
    Var result =
        push(std::move(out), requires_grad(a) || requires_grad(b), nullptr);
    set_back(result, [this, a, b, result, n, k, m] {
      const auto& gout = grad(result);
      if (requires_grad(a)) {  // dA += dOut * B^T
        auto& ga = ensure_grad(a);
        kernels::matmul_nt(gout.data(), value(b).data(), ga.data(), n, m, k,
                           true);
      }
      if (requires_grad(b)) {  // dB += A^T * dOut
        auto& gb = ensure_grad(b);
        kernels::matmul_tn(value(a).data(), gout.data(), gb.data(), k, n, m,
                           true);
      }
    });
    return result;
  }

  // a [N,K] times b [M,K] transposed -> [N,M].
  Var matmul_nt(Var a, Var b) {
    const auto& av = value(a);
    const auto& bv = value(b);
    if (av.ndim() != 2 || bv.ndim() != 2 || av.dim(1) != bv.dim(1)) {
      throw std::invalid_argument("matmul_nt: shape mismatch");
    }
    const int n = av.dim(0), k = av.dim(1), m = bv.dim(0);
    TensorT<T> out({n, m});
    kernels::matmul_nt(av.data(), bv.data(), out.data(), n, k, m, false);
    Var result =
        push(std::move(out), requires_grad(a) || requires_grad(b), nullptr);
    set_back(result, [this, a, b, result, n, k, m] {
      const auto& gout = grad(result);  // [n, m]
      if (requires_grad(a)) {           // dA += dOut * B
        auto& ga = ensure_grad(a);
        kernels::matmul_nn(gout.data(), value(b).data(), ga.data(), n, m, k,
                           true);
      }
      if (requires_grad(b)) {  // dB += dOut^T * A
        auto& gb = ensure_grad(b);
        kernels::matmul_tn(gout.data(), value(a).data(), gb.data(), m, n, k,
                           true);
      }
    });
    return result;
  }

  Var linear(Var x, Var w, Var b) { return add_bias_rows(matmul(x, w), b); }

  // x [C,H,W] * w [Cout,C,3,3] + b [Cout] -> [Cout,H,W], same padding.
  Var conv2d(Var x, Var w, Var b) {
    const auto& xv = value(x);
    const auto& wv = value(w);
    const auto& bv = value(b);
    if (xv.ndim() != 3 || wv.ndim() != 4 || wv.dim(1) != xv.dim(0) ||
        wv.dim(2) != 3 || wv.dim(3) != 3 || bv.ndim() != 1 ||
        bv.dim(0) != wv.dim(0)) {
      throw std::invalid_argument("conv2d: shape mismatch " +
                                  shape_string(xv.shape) + " vs " +
                                  shape_string(wv.shape));
    }
    const int c_in = xv.dim(0), h = xv.dim(1), width = xv.dim(2);
    const int c_out = wv.dim(0);
    TensorT<T> out({c_out, h, width});
    kernels::conv2d_forward(xv.data(), wv.data(), bv.data(), out.data(), c_in,
                            h, width, c_out);
    Var result = push(std::move(out),
                      requires_grad(x) || requires_grad(w) || requires_grad(b),
                      nullptr);
    set_back(result, [this, x, w, b, result, c_in, h, width, c_out] {
      const auto& gout = grad(result);
      if (requires_grad(x)) {
        auto& gx = ensure_grad(x);
        kernels::conv2d_backward_input(value(w).data(), gout.data(), gx.data(),
                                       c_in, h, width, c_out);
      }
      if (requires_grad(w) || requires_grad(b)) {
        auto& gw = ensure_grad(w);
        auto& gb = ensure_grad(b);
        kernels::conv2d_backward_params(value(x).data(), gout.data(),
                                        gw.data(), gb.data(), c_in, h, width,
                                        c_out);
      }
    });
    return result;
  }

  Var maxpool2(Var x) {
    const auto& xv = value(x);
    if (xv.ndim() != 3 || xv.dim(1) % 2 != 0 || xv.dim(2) % 2 != 0) {
      throw std::invalid_argument("maxpool2: need [C,H,W] with even H and W");
    }
    const int c = xv.dim(0), h = xv.dim(1), width = xv.dim(2);
    TensorT<T> out({c, h / 2, width / 2});
    std::vector<uint8_t> argmax(static_cast<size_t>(out.size()));
    kernels::maxpool2_forward(xv.data(), out.data(), argmax.data(), c, h,
                              width);
    Var result = push(std::move(out), requires_grad(x), nullptr);
    set_back(result, [this, x, result, c, h, width,
                      argmax = std::move(argmax)] {
      if (!requires_grad(x)) return;
      const auto& gout = grad(result);
      auto& gx = ensure_grad(x);
      kernels::maxpool2_backward(gout.data(), argmax.data(), gx.data(), c, h,
                                 width);
    });
    return result;
  }

  // ---- losses ----

  // Mean negative log softmax probability of the true class.
  Var softmax_cross_entropy(Var logits, std::vector<int> labels) {
    const auto& lv = value(logits);
    if (lv.ndim() != 2 || static_cast<int>(labels.size()) != lv.dim(0)) {
      throw std::invalid_argument("softmax_cross_entropy: shape mismatch");
    }
    const int n = lv.dim(0), k = lv.dim(1);
    for (int label : labels) {
      if (label < 0 || label >= k) {
        throw std::invalid_argument("softmax_cross_entropy: label out of range");
      }
    }
    TensorT<T> probs({n, k});
    T loss{0};
    for (int i = 0; i < n; ++i) {
      const T* row = lv.data() + static_cast<int64_t>(i) * k;
      T max = row[0];
      for (int j = 1; j < k; ++j) max = std::max(max, row[j]);
      T sum{0};
      for (int j = 0; j < k; ++j) sum += std::exp(row[j] - max);
      const T lse = max + std::log(sum);
      loss += lse - row[labels[i]];
      for (int j = 0; j < k; ++j) {
        probs.v[static_cast<int64_t>(i) * k + j] = std::exp(row[j] - lse);
      }
    }
    loss /= static_cast<T>(n);
    Var result =
        push(TensorT<T>({1}, {loss}), requires_grad(logits), nullptr);
    set_back(result, [this, logits, result, n, k, labels = std::move(labels),
                      probs = std::move(probs)] {
      if (!requires_grad(logits)) return;
      const T gout = grad(result).v[0];
      auto& gl = ensure_grad(logits);
      const T inv_n = T{1} / static_cast<T>(n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) {
          T g = probs.v[static_cast<int64_t>(i) * k + j];
          if (j == labels[i]) g -= T{1};
          gl.v[static_cast<int64_t>(i) * k + j] += gout * g * inv_n;
        }
      }
    });
    return result;
  }

  // Mean over all cells of -[t ln p + (1-t) ln(1-p)], p clamped away from
  // 0 and 1. Gradient is zero where the clamp is active.
  Var binary_cross_entropy(Var probs, TensorT<T> targets) {
    const auto& pv = value(probs);
    if (!pv.same_shape(targets)) {
      throw std::invalid_argument("binary_cross_entropy: shape mismatch");
    }
    const T eps = static_cast<T>(kBceEps);
    const int64_t count = pv.size();
    T loss{0};
    for (int64_t i = 0; i < count; ++i) {
      const T p = std::clamp(pv.v[i], eps, T{1} - eps);
      const T t = targets.v[i];
      loss -= t * std::log(p) + (T{1} - t) * std::log(T{1} - p);
    }
    loss /= static_cast<T>(count);
    Var result = push(TensorT<T>({1}, {loss}), requires_grad(probs), nullptr);
    set_back(result, [this, probs, result, targets = std::move(targets), eps,
                      count] {
      if (!requires_grad(probs)) return;
      const T gout = grad(result).v[0];
      const auto& pv = value(probs);
      auto& gp = ensure_grad(probs);
      const T inv_count = T{1} / static_cast<T>(count);
      for (int64_t i = 0; i < count; ++i) {
        if (pv.v[i] <= eps || pv.v[i] >= T{1} - eps) continue;
        const T p = pv.v[i];
        const T t = targets.v[i];
        gp.v[i] += gout * (p - t) / (p * (T{1} - p)) * inv_count;
      }
    });
    return result;
  }

  Var mean_of(const std::vector<Var>& scalars) {
    if (scalars.empty()) throw std::invalid_argument("mean_of: empty");
    T sum{0};
    bool rg = false;
    for (Var s : scalars) {
      if (value(s).size() != 1) throw std::invalid_argument("mean_of: non-scalar");
      sum += value(s).v[0];
      rg = rg || requires_grad(s);
    }
    const T inv_n = T{1} / static_cast<T>(scalars.size());
    Var result = push(TensorT<T>({1}, {sum * inv_n}), rg, nullptr);
    set_back(result, [this, scalars, result, inv_n] {
      const T gout = grad(result).v[0];
      for (Var s : scalars) {
        if (requires_grad(s)) ensure_grad(s).v[0] += gout * inv_n;
      }
    });
    return result;
  }

  // ---- engine ----

  void backward(Var loss) {
    if (value(loss).size() != 1) {
      throw std::invalid_argument("backward: loss must be scalar");
    }
    ensure_grad(loss).v[0] = T{1};
    for (int i = loss.idx; i >= 0; --i) {
      Node& node = nodes_[i];
      if (node.back && node.requires_grad && !node.grad.v.empty()) {
        node.back();
      }
    }
  }

  TensorT<T>& ensure_grad(Var v) {
    Node& node = nodes_[v.idx];
    if (node.grad.v.empty()) node.grad = TensorT<T>(node.value.shape);
    return node.grad;
  }

 private:
  struct Node {
    TensorT<T> value;
    TensorT<T> grad;
    bool requires_grad = false;
    std::function<void()> back;
  };

  Var push(TensorT<T> value, bool requires_grad, std::function<void()> back) {
    nodes_.push_back(Node{std::move(value), {}, requires_grad, std::move(back)});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  void set_back(Var v, std::function<void()> back) {
    nodes_[v.idx].back = std::move(back);
  }

  std::vector<Node> nodes_;
};

}  // namespace midistring::nn
