#pragma once

#include <cstdint>

namespace midistring::nn::kernels {

// Runtime switch between the serial reference kernels and the OpenMP ones.
// Both paths drive the same noinline inner routines over disjoint output
// blocks, with a fixed accumulation order per output element, so results are
// bit-identical at every thread count. The serial path stays as the
// reference the tests compare against.
struct Config {
  bool parallel = true;
  int threads = 0;  // 0: OpenMP default
};

Config& config();
void set_parallel(bool on, int threads = 0);
int effective_threads();

// out[N,M] = A[N,K] * B[K,M]; accumulate adds into out instead of storing.
template <typename T>
void matmul_nn(const T* a, const T* b, T* out, int n, int k, int m,
               bool accumulate);

// out[N,M] = A[K,N]^T * B[K,M].
template <typename T>
void matmul_tn(const T* a, const T* b, T* out, int n, int k, int m,
               bool accumulate);

// out[N,M] = A[N,K] * B[M,K]^T.
template <typename T>
void matmul_nt(const T* a, const T* b, T* out, int n, int k, int m,
               bool accumulate);

// out[M,N] = in[N,M]^T.
template <typename T>
void transpose(const T* in, T* out, int n, int m);

// 3x3 same-padding cross-correlation, in [Cin,H,W] -> out [Cout,H,W].
template <typename T>
void conv2d_forward(const T* in, const T* w, const T* bias, T* out, int c_in,
                    int h, int width, int c_out);

template <typename T>
void conv2d_backward_input(const T* w, const T* gout, T* gin, int c_in, int h,
                           int width, int c_out);

template <typename T>
void conv2d_backward_params(const T* in, const T* gout, T* gw, T* gbias,
                            int c_in, int h, int width, int c_out);

// 2x2 max pooling, stride 2. argmax stores 0..3 (first index wins ties).
template <typename T>
void maxpool2_forward(const T* in, T* out, uint8_t* argmax, int c, int h,
                      int width);

template <typename T>
void maxpool2_backward(const T* gout, const uint8_t* argmax, T* gin, int c,
                       int h, int width);

}  // namespace midistring::nn::kernels
