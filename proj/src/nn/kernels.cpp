#include "nn/kernels.h"

#include <omp.h>

#include <algorithm>

namespace midistring::nn::kernels {

Config& config() {
  static Config instance;
  return instance;
}

void set_parallel(bool on, int threads) {
  config().parallel = on;
  config().threads = threads;
}

int effective_threads() {
  if (!config().parallel) return 1;
  return config().threads > 0 ? config().threads : omp_get_max_threads();
}

namespace {

// Inner routines are noinline so the serial and OpenMP drivers execute the
// exact same machine code; vectorization inside them is then identical and
// outputs stay bit-equal between the two paths.

template <typename T>
[[gnu::noinline]] void axpy(T* __restrict dst, T alpha,
                            const T* __restrict src, int n) {
  for (int i = 0; i < n; ++i) dst[i] += alpha * src[i];
}

template <typename T>
[[gnu::noinline]] T dot(const T* __restrict a, const T* __restrict b, int n) {
  T sum{0};
#pragma omp simd reduction(+ : sum)
  for (int i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

template <typename T>
[[gnu::noinline]] void fill_row(T* dst, T value, int n) {
  for (int i = 0; i < n; ++i) dst[i] = value;
}

// One output row of A*B: out[n,:] (+)= sum_k A[n,k] * B[k,:].
template <typename T>
[[gnu::noinline]] void matmul_nn_row(const T* a_row, const T* b, T* out_row,
                                     int k, int m, bool accumulate) {
  if (!accumulate) fill_row(out_row, T{0}, m);
  for (int kk = 0; kk < k; ++kk) {
    const T alpha = a_row[kk];
    if (alpha != T{0}) axpy(out_row, alpha, b + static_cast<int64_t>(kk) * m, m);
  }
}

// One output row of A^T*B: out[n,:] (+)= sum_k A[k,n] * B[k,:].
template <typename T>
[[gnu::noinline]] void matmul_tn_row(const T* a, const T* b, T* out_row, int n_index,
                                     int n, int k, int m, bool accumulate) {
  if (!accumulate) fill_row(out_row, T{0}, m);
  for (int kk = 0; kk < k; ++kk) {
    const T alpha = a[static_cast<int64_t>(kk) * n + n_index];
    if (alpha != T{0}) axpy(out_row, alpha, b + static_cast<int64_t>(kk) * m, m);
  }
}

// One output row of A*B^T: out[n,m] = dot(A[n,:], B[m,:]).
template <typename T>
[[gnu::noinline]] void matmul_nt_row(const T* a_row, const T* b, T* out_row,
                                     int k, int m, bool accumulate) {
  for (int mm = 0; mm < m; ++mm) {
    const T value = dot(a_row, b + static_cast<int64_t>(mm) * k, k);
    out_row[mm] = accumulate ? out_row[mm] + value : value;
  }
}

// One output channel plane of the 3x3 same-padding cross-correlation.
template <typename T>
[[gnu::noinline]] void conv2d_forward_channel(const T* in, const T* w,
                                              const T* bias, T* out, int c_in,
                                              int h, int width, int co) {
  T* plane = out + static_cast<int64_t>(co) * h * width;
  fill_row(plane, bias[co], h * width);
  const T* w_co = w + static_cast<int64_t>(co) * c_in * 9;
  for (int ci = 0; ci < c_in; ++ci) {
    const T* in_plane = in + static_cast<int64_t>(ci) * h * width;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const T weight = w_co[ci * 9 + ky * 3 + kx];
        if (weight == T{0}) continue;
        const int y0 = std::max(0, 1 - ky), y1 = std::min(h, h + 1 - ky);
        const int x0 = std::max(0, 1 - kx), x1 = std::min(width, width + 1 - kx);
        for (int y = y0; y < y1; ++y) {
          axpy(plane + y * width + x0, weight,
               in_plane + (y + ky - 1) * width + (x0 + kx - 1), x1 - x0);
        }
      }
    }
  }
}

// One input-channel plane of the gradient wrt the convolution input.
// Accumulates into gin; callers pass zeroed or previously accumulated grads.
template <typename T>
[[gnu::noinline]] void conv2d_backward_input_channel(const T* w, const T* gout,
                                                     T* gin, int c_in, int h,
                                                     int width, int c_out,
                                                     int ci) {
  T* plane = gin + static_cast<int64_t>(ci) * h * width;
  for (int co = 0; co < c_out; ++co) {
    const T* gout_plane = gout + static_cast<int64_t>(co) * h * width;
    const T* w_co = w + (static_cast<int64_t>(co) * c_in + ci) * 9;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const T weight = w_co[ky * 3 + kx];
        if (weight == T{0}) continue;
        // gin[iy,ix] += w[ky,kx] * gout[iy+1-ky, ix+1-kx] over valid range.
        const int y0 = std::max(0, ky - 1), y1 = std::min(h, h + ky - 1);
        const int x0 = std::max(0, kx - 1), x1 = std::min(width, width + kx - 1);
        for (int iy = y0; iy < y1; ++iy) {
          axpy(plane + iy * width + x0, weight,
               gout_plane + (iy + 1 - ky) * width + (x0 + 1 - kx), x1 - x0);
        }
      }
    }
  }
}

// Gradient wrt one filter's 3x3 taps plus its bias.
template <typename T>
[[gnu::noinline]] void conv2d_backward_filter(const T* in, const T* gout,
                                              T* gw, T* gbias, int c_in, int h,
                                              int width, int co) {
  const T* gout_plane = gout + static_cast<int64_t>(co) * h * width;
  T* gw_co = gw + static_cast<int64_t>(co) * c_in * 9;
  for (int ci = 0; ci < c_in; ++ci) {
    const T* in_plane = in + static_cast<int64_t>(ci) * h * width;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const int y0 = std::max(0, 1 - ky), y1 = std::min(h, h + 1 - ky);
        const int x0 = std::max(0, 1 - kx), x1 = std::min(width, width + 1 - kx);
        T sum{0};
        for (int y = y0; y < y1; ++y) {
          sum += dot(gout_plane + y * width + x0,
                     in_plane + (y + ky - 1) * width + (x0 + kx - 1), x1 - x0);
        }
        gw_co[ci * 9 + ky * 3 + kx] += sum;
      }
    }
  }
  T bias_sum{0};
  for (int i = 0; i < h * width; ++i) bias_sum += gout_plane[i];
  gbias[co] += bias_sum;
}

// One output row of 2x2/stride-2 max pooling over a single channel plane.
template <typename T>
[[gnu::noinline]] void maxpool2_row(const T* plane, T* out_plane,
                                    uint8_t* arg_plane, int width, int oy) {
  const int ow = width / 2;
  for (int ox = 0; ox < ow; ++ox) {
    const int y = oy * 2, x = ox * 2;
    const T v00 = plane[y * width + x];
    const T v01 = plane[y * width + x + 1];
    const T v10 = plane[(y + 1) * width + x];
    const T v11 = plane[(y + 1) * width + x + 1];
    T best = v00;
    uint8_t arg = 0;
    if (v01 > best) { best = v01; arg = 1; }
    if (v10 > best) { best = v10; arg = 2; }
    if (v11 > best) { best = v11; arg = 3; }
    out_plane[oy * ow + ox] = best;
    arg_plane[oy * ow + ox] = arg;
  }
}

}  // namespace

template <typename T>
void matmul_nn(const T* a, const T* b, T* out, int n, int k, int m,
               bool accumulate) {
  if (config().parallel) {
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int i = 0; i < n; ++i) {
      matmul_nn_row(a + static_cast<int64_t>(i) * k, b,
                    out + static_cast<int64_t>(i) * m, k, m, accumulate);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      matmul_nn_row(a + static_cast<int64_t>(i) * k, b,
                    out + static_cast<int64_t>(i) * m, k, m, accumulate);
    }
  }
}

template <typename T>
void matmul_tn(const T* a, const T* b, T* out, int n, int k, int m,
               bool accumulate) {
  if (config().parallel) {
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int i = 0; i < n; ++i) {
      matmul_tn_row(a, b, out + static_cast<int64_t>(i) * m, i, n, k, m,
                    accumulate);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      matmul_tn_row(a, b, out + static_cast<int64_t>(i) * m, i, n, k, m,
                    accumulate);
    }
  }
}

template <typename T>
void matmul_nt(const T* a, const T* b, T* out, int n, int k, int m,
               bool accumulate) {
  if (config().parallel) {
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int i = 0; i < n; ++i) {
      matmul_nt_row(a + static_cast<int64_t>(i) * k, b,
                    out + static_cast<int64_t>(i) * m, k, m, accumulate);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      matmul_nt_row(a + static_cast<int64_t>(i) * k, b,
                    out + static_cast<int64_t>(i) * m, k, m, accumulate);
    }
  }
}

template <typename T>
void transpose(const T* in, T* out, int n, int m) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      out[static_cast<int64_t>(j) * n + i] = in[static_cast<int64_t>(i) * m + j];
    }
  }
}

template <typename T>
void conv2d_forward(const T* in, const T* w, const T* bias, T* out, int c_in,
                    int h, int width, int c_out) {
  if (config().parallel) {
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int co = 0; co < c_out; ++co) {
      conv2d_forward_channel(in, w, bias, out, c_in, h, width, co);
    }
  } else {
    for (int co = 0; co < c_out; ++co) {
      conv2d_forward_channel(in, w, bias, out, c_in, h, width, co);
    }
  }
}

template <typename T>
void conv2d_backward_input(const T* w, const T* gout, T* gin, int c_in, int h,
                           int width, int c_out) {
  if (config().parallel) {
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int ci = 0; ci < c_in; ++ci) {
      conv2d_backward_input_channel(w, gout, gin, c_in, h, width, c_out, ci);
    }
  } else {
    for (int ci = 0; ci < c_in; ++ci) {
      conv2d_backward_input_channel(w, gout, gin, c_in, h, width, c_out, ci);
    }
  }
}

template <typename T>
void conv2d_backward_params(const T* in, const T* gout, T* gw, T* gbias,
                            int c_in, int h, int width, int c_out) {
  if (config().parallel) {
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int co = 0; co < c_out; ++co) {
      conv2d_backward_filter(in, gout, gw, gbias, c_in, h, width, co);
    }
  } else {
    for (int co = 0; co < c_out; ++co) {
      conv2d_backward_filter(in, gout, gw, gbias, c_in, h, width, co);
    }
  }
}

template <typename T>
void maxpool2_forward(const T* in, T* out, uint8_t* argmax, int c, int h,
                      int width) {
  const int oh = h / 2, ow = width / 2;
  if (config().parallel) {
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (int cc = 0; cc < c; ++cc) {
      for (int oy = 0; oy < oh; ++oy) {
        maxpool2_row(in + static_cast<int64_t>(cc) * h * width,
                     out + static_cast<int64_t>(cc) * oh * ow,
                     argmax + static_cast<int64_t>(cc) * oh * ow, width, oy);
      }
    }
  } else {
    for (int cc = 0; cc < c; ++cc) {
      for (int oy = 0; oy < oh; ++oy) {
        maxpool2_row(in + static_cast<int64_t>(cc) * h * width,
                     out + static_cast<int64_t>(cc) * oh * ow,
                     argmax + static_cast<int64_t>(cc) * oh * ow, width, oy);
      }
    }
  }
}

template <typename T>
void maxpool2_backward(const T* gout, const uint8_t* argmax, T* gin, int c,
                       int h, int width) {
  const int oh = h / 2, ow = width / 2;
  for (int cc = 0; cc < c; ++cc) {
    const T* gout_plane = gout + static_cast<int64_t>(cc) * oh * ow;
    const uint8_t* arg_plane = argmax + static_cast<int64_t>(cc) * oh * ow;
    T* gin_plane = gin + static_cast<int64_t>(cc) * h * width;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const uint8_t arg = arg_plane[oy * ow + ox];
        const int y = oy * 2 + (arg >> 1), x = ox * 2 + (arg & 1);
        gin_plane[y * width + x] += gout_plane[oy * ow + ox];
      }
    }
  }
}

#define MIDISTRING_INSTANTIATE(T)                                             \
  template void matmul_nn<T>(const T*, const T*, T*, int, int, int, bool);    \
  template void matmul_tn<T>(const T*, const T*, T*, int, int, int, bool);    \
  template void matmul_nt<T>(const T*, const T*, T*, int, int, int, bool);    \
  template void transpose<T>(const T*, T*, int, int);                         \
  template void conv2d_forward<T>(const T*, const T*, const T*, T*, int, int, \
                                  int, int);                                  \
  template void conv2d_backward_input<T>(const T*, const T*, T*, int, int,    \
                                         int, int);                           \
  template void conv2d_backward_params<T>(const T*, const T*, T*, T*, int,    \
                                          int, int, int);                     \
  template void maxpool2_forward<T>(const T*, T*, uint8_t*, int, int, int);   \
  template void maxpool2_backward<T>(const T*, const uint8_t*, T*, int, int,  \
                                     int);

MIDISTRING_INSTANTIATE(float)
MIDISTRING_INSTANTIATE(double)
#undef MIDISTRING_INSTANTIATE

}  // namespace midistring::nn::kernels
