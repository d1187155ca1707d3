#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "nn/adam.h"
#include "nn/checkpoint.h"
#include "nn/gradcheck.h"
#include "nn/init.h"
#include "nn/kernels.h"
#include "nn/tape.h"

using namespace midistring;
using namespace midistring::nn;

namespace {

template <typename T>
TensorT<T> random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  TensorT<T> out(std::move(shape));
  for (auto& x : out.v) x = static_cast<T>(rng.next_range(-scale, scale));
  return out;
}

// Forces the parallel path with several threads, runs fn, then restores.
template <typename Fn>
auto with_parallel(bool parallel, Fn&& fn) {
  kernels::set_parallel(parallel, parallel ? 4 : 0);
  auto out = fn();
  kernels::set_parallel(true, 0);
  return out;
}

}  // namespace

TEST_CASE("serial and OpenMP kernels are bit-identical") {
  Rng rng(2024);
  const int n = 17, k = 33, m = 29;
  auto a = random_tensor<float>({n, k}, rng);
  auto b = random_tensor<float>({k, m}, rng);
  auto bt = random_tensor<float>({m, k}, rng);
  auto at = random_tensor<float>({k, n}, rng);

  auto run_nn = [&](bool parallel) {
    return with_parallel(parallel, [&] {
      TensorT<float> out({n, m});
      kernels::matmul_nn(a.data(), b.data(), out.data(), n, k, m, false);
      return out;
    });
  };
  CHECK(run_nn(false).v == run_nn(true).v);

  auto run_nt = [&](bool parallel) {
    return with_parallel(parallel, [&] {
      TensorT<float> out({n, m});
      kernels::matmul_nt(a.data(), bt.data(), out.data(), n, k, m, false);
      return out;
    });
  };
  CHECK(run_nt(false).v == run_nt(true).v);

  auto run_tn = [&](bool parallel) {
    return with_parallel(parallel, [&] {
      TensorT<float> out({n, m});
      kernels::matmul_tn(at.data(), b.data(), out.data(), n, k, m, false);
      return out;
    });
  };
  CHECK(run_tn(false).v == run_tn(true).v);

  const int c_in = 3, h = 20, w = 16, c_out = 5;
  auto input = random_tensor<float>({c_in, h, w}, rng);
  auto weights = random_tensor<float>({c_out, c_in, 3, 3}, rng);
  auto bias = random_tensor<float>({c_out}, rng);
  auto gout = random_tensor<float>({c_out, h, w}, rng);

  auto run_conv = [&](bool parallel) {
    return with_parallel(parallel, [&] {
      TensorT<float> out({c_out, h, w});
      kernels::conv2d_forward(input.data(), weights.data(), bias.data(),
                              out.data(), c_in, h, w, c_out);
      return out;
    });
  };
  CHECK(run_conv(false).v == run_conv(true).v);

  auto run_conv_bwd = [&](bool parallel) {
    return with_parallel(parallel, [&] {
      TensorT<float> gin({c_in, h, w});
      TensorT<float> gw({c_out, c_in, 3, 3});
      TensorT<float> gb({c_out});
      kernels::conv2d_backward_input(weights.data(), gout.data(), gin.data(),
                                     c_in, h, w, c_out);
      kernels::conv2d_backward_params(input.data(), gout.data(), gw.data(),
                                      gb.data(), c_in, h, w, c_out);
      gin.v.insert(gin.v.end(), gw.v.begin(), gw.v.end());
      gin.v.insert(gin.v.end(), gb.v.begin(), gb.v.end());
      return gin.v;
    });
  };
  CHECK(run_conv_bwd(false) == run_conv_bwd(true));

  auto run_pool = [&](bool parallel) {
    return with_parallel(parallel, [&] {
      TensorT<float> out({c_in, h / 2, w / 2});
      std::vector<uint8_t> argmax(out.v.size());
      kernels::maxpool2_forward(input.data(), out.data(), argmax.data(), c_in,
                                h, w);
      return std::make_pair(out, argmax);
    });
  };
  CHECK(run_pool(false) == run_pool(true));
}

TEST_CASE("conv2d identity kernel copies the input channel") {
  Tape<double> tape;
  Rng rng(5);
  auto x = tape.leaf(random_tensor<double>({2, 6, 6}, rng), false);
  TensorT<double> w({1, 2, 3, 3});
  w.v[0 * 9 + 4] = 1.0;  // center tap of channel 0
  auto out = tape.conv2d(x, tape.leaf(w, false),
                         tape.leaf(TensorT<double>({1}), false));
  for (int i = 0; i < 36; ++i) {
    CHECK(tape.value(out).v[i] == doctest::Approx(tape.value(x).v[i]));
  }
}

TEST_CASE("conv2d all-ones kernel computes neighborhood sums") {
  Tape<double> tape;
  TensorT<double> input({1, 3, 3});
  for (auto& v : input.v) v = 1.0;
  TensorT<double> w({1, 1, 3, 3});
  for (auto& v : w.v) v = 1.0;
  auto out = tape.conv2d(tape.leaf(input, false), tape.leaf(w, false),
                         tape.leaf(TensorT<double>({1}), false));
  // Corners see a 2x2 patch, the center sees all nine.
  CHECK(tape.value(out).v[0] == doctest::Approx(4.0));
  CHECK(tape.value(out).v[2] == doctest::Approx(4.0));
  CHECK(tape.value(out).v[4] == doctest::Approx(9.0));
  CHECK(tape.value(out).v[1] == doctest::Approx(6.0));
}

TEST_CASE("maxpool2 picks window maxima and first tie index") {
  Tape<double> tape;
  TensorT<double> input({1, 2, 2}, {1, 2, 3, 4});
  auto x = tape.leaf(input, true);
  auto out = tape.maxpool2(x);
  CHECK(tape.value(out).v[0] == 4.0);

  Tape<double> tie_tape;
  auto tx = tie_tape.leaf(TensorT<double>({1, 2, 2}, {7, 7, 7, 7}), true);
  auto ty = tie_tape.maxpool2(tx);
  CHECK(tie_tape.value(ty).v[0] == 7.0);
  tie_tape.backward(tie_tape.scale(ty, 1.0));
  // Gradient lands on the first window index only.
  CHECK(tie_tape.grad(tx).v == std::vector<double>{1, 0, 0, 0});
}

TEST_CASE("linear identity and constant rows") {
  Tape<double> tape;
  TensorT<double> x({2, 3}, {1, 2, 3, 4, 5, 6});
  TensorT<double> eye({3, 3});
  for (int i = 0; i < 3; ++i) eye.v[i * 3 + i] = 1.0;
  auto out = tape.linear(tape.leaf(x, false), tape.leaf(eye, false),
                         tape.leaf(TensorT<double>({3}), false));
  CHECK(tape.value(out).v == x.v);

  TensorT<double> zero_w({3, 2});
  TensorT<double> bias({2}, {5, -1});
  auto out2 = tape.linear(tape.leaf(x, false), tape.leaf(zero_w, false),
                          tape.leaf(bias, false));
  CHECK(tape.value(out2).v == std::vector<double>{5, -1, 5, -1});
}

TEST_CASE("softmax rows are stochastic and T=1 attention is the identity") {
  Tape<double> tape;
  Rng rng(9);
  auto x = tape.leaf(random_tensor<double>({5, 7}, rng, 3.0), false);
  auto y = tape.softmax_rows(x);
  for (int i = 0; i < 5; ++i) {
    double sum = 0;
    for (int j = 0; j < 7; ++j) sum += tape.value(y).v[i * 7 + j];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  // Single-position softmax weight is exactly 1.
  Tape<double> one;
  auto s = one.softmax_rows(one.leaf(TensorT<double>({1, 1}, {3.7}), false));
  CHECK(one.value(s).v[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cross entropy matches uniform and one-hot limits") {
  Tape<double> tape;
  TensorT<double> uniform({1, 13});
  auto loss = tape.softmax_cross_entropy(tape.leaf(uniform, false), {4});
  CHECK(tape.value(loss).v[0] == doctest::Approx(std::log(13.0)).epsilon(1e-9));

  TensorT<double> confident({1, 5});
  confident.v[2] = 100.0;
  auto small = tape.softmax_cross_entropy(tape.leaf(confident, false), {2});
  CHECK(tape.value(small).v[0] < 1e-6);

  CHECK_THROWS(tape.softmax_cross_entropy(tape.leaf(uniform, false), {13}));
}

TEST_CASE("binary cross entropy at p=0.5 is ln 2 and p=t is near zero") {
  Tape<double> tape;
  TensorT<double> half({4, 4});
  for (auto& v : half.v) v = 0.5;
  TensorT<double> targets({4, 4});
  targets.v[0] = targets.v[5] = 1.0;
  auto loss = tape.binary_cross_entropy(tape.leaf(half, false), targets);
  CHECK(tape.value(loss).v[0] == doctest::Approx(std::log(2.0)).epsilon(1e-9));

  auto exact = tape.binary_cross_entropy(tape.leaf(targets, false), targets);
  CHECK(tape.value(exact).v[0] < 1e-5);
}

TEST_CASE("dropout keeps expectation and is the identity in eval mode") {
  Tape<float> tape;
  TensorT<float> ones({1, 20000});
  for (auto& v : ones.v) v = 1.0f;
  auto x = tape.leaf(ones, false);
  auto eval_out = tape.dropout(x, 0.5f, 7, 0, false);
  CHECK(tape.value(eval_out).v == ones.v);

  auto train_out = tape.dropout(x, 0.5f, 7, 0, true);
  double sum = 0;
  int zeros = 0;
  for (float v : tape.value(train_out).v) {
    sum += v;
    zeros += v == 0.0f;
  }
  CHECK(sum / 20000.0 == doctest::Approx(1.0).epsilon(0.05));
  CHECK(zeros > 8000);
  CHECK(zeros < 12000);

  // Same (seed, counter) gives the same mask; different counters differ.
  auto again = tape.dropout(x, 0.5f, 7, 0, true);
  CHECK(tape.value(again).v == tape.value(train_out).v);
  auto other = tape.dropout(x, 0.5f, 7, 1, true);
  CHECK(tape.value(other).v != tape.value(train_out).v);
}

TEST_CASE("adam first step moves by about lr and zero grads hold still") {
  TensorT<float> p({3}, {1.0f, -2.0f, 0.5f});
  TensorT<float> g({3}, {1.0f, 1.0f, 1.0f});
  AdamState<float> state;
  state.init_like({&p});
  adam_step<float>({&p}, {&g}, state);
  CHECK(p.v[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-6));
  CHECK(p.v[1] == doctest::Approx(-2.0 - 1e-3).epsilon(1e-6));

  TensorT<float> zero({3});
  auto before = p.v;
  for (int i = 0; i < 10; ++i) adam_step<float>({&p}, {&zero}, state);
  // First-moment decay keeps nudging briefly; restart from clean state.
  AdamState<float> fresh;
  TensorT<float> q({3}, {1.0f, 2.0f, 3.0f});
  fresh.init_like({&q});
  for (int i = 0; i < 10; ++i) adam_step<float>({&q}, {&zero}, fresh);
  CHECK(q.v == std::vector<float>{1.0f, 2.0f, 3.0f});
  (void)before;
}

TEST_CASE("adam trajectories are deterministic") {
  auto run = [] {
    Rng rng(123);
    TensorT<float> p = random_tensor<float>({64}, rng);
    AdamState<float> state;
    state.init_like({&p});
    for (int step = 0; step < 50; ++step) {
      TensorT<float> g({64});
      for (int64_t i = 0; i < g.size(); ++i) {
        g.v[i] = std::sin(0.1f * step + 0.01f * i) * p.v[i];
      }
      adam_step<float>({&p}, {&g}, state);
    }
    return p.v;
  };
  CHECK(run() == run());
}

TEST_CASE("gradient check: dense layers are exact to first order") {
  Rng rng(41);
  auto x0 = random_tensor<double>({3, 8}, rng);
  auto w0 = random_tensor<double>({8, 5}, rng);
  auto b0 = random_tensor<double>({5}, rng);

  GradCheckProblem problem;
  auto build = [&](const std::vector<TensorT<double>>& params, Tape<double>& tape,
                   bool with_grads) {
    auto x = tape.leaf(params[0], with_grads);
    auto w = tape.leaf(params[1], with_grads);
    auto b = tape.leaf(params[2], with_grads);
    auto out = tape.relu(tape.linear(x, w, b));
    // Fixed quadratic readout keeps the loss scalar and smooth.
    auto loss = tape.binary_cross_entropy(
        tape.sigmoid(out), TensorT<double>({3, 5}));
    return std::make_tuple(x, w, b, loss);
  };
  problem.loss = [&](const std::vector<TensorT<double>>& params) {
    Tape<double> tape;
    return tape.value(std::get<3>(build(params, tape, false))).v[0];
  };
  problem.gradients = [&](const std::vector<TensorT<double>>& params) {
    Tape<double> tape;
    auto [x, w, b, loss] = build(params, tape, true);
    tape.backward(loss);
    return std::vector<TensorT<double>>{tape.grad(x), tape.grad(w),
                                        tape.grad(b)};
  };
  CHECK(gradient_check(problem, {x0, w0, b0}) < 1e-6);
}

TEST_CASE("checkpoint round trip is bit exact") {
  Rng rng(77);
  Checkpoint checkpoint;
  auto t1 = random_tensor<float>({4, 7}, rng);
  auto t2 = random_tensor<double>({3}, rng);
  checkpoint.put_f32("layer.w", t1);
  checkpoint.put_f64("stats", t2);
  checkpoint.put_u64("step", 12345);

  auto path = (std::filesystem::temp_directory_path() / "ck.bin").string();
  REQUIRE(checkpoint.save(path).ok());
  auto loaded = Checkpoint::load(path);
  REQUIRE(loaded.ok());
  CHECK(loaded.value().get_f32("layer.w").value() == t1);
  CHECK(loaded.value().get_f64("stats").value() == t2);
  CHECK(loaded.value().get_u64("step").value() == 12345);
  CHECK_FALSE(loaded.value().get_f32("nope").ok());
  CHECK_FALSE(loaded.value().get_f64("layer.w").ok());

  // Same content, same bytes.
  auto path2 = (std::filesystem::temp_directory_path() / "ck2.bin").string();
  REQUIRE(loaded.value().save(path2).ok());
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  std::vector<char> bytes_a((std::istreambuf_iterator<char>(a)), {});
  std::vector<char> bytes_b((std::istreambuf_iterator<char>(b)), {});
  CHECK(bytes_a == bytes_b);

  std::ofstream(path2, std::ios::binary) << "junk";
  CHECK_FALSE(Checkpoint::load(path2).ok());
}
