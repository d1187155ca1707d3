#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "core/rng.h"
#include "nn/tensor.h"

namespace midistring::nn {

// Max over checked coordinates of
//   |analytic - central difference| / max(|analytic|, |numeric|, 1e-8).
// Runs at float64; finite differences are unreliable at float32.
struct GradCheckProblem {
  // Pure scalar loss of the parameters.
  std::function<double(const std::vector<TensorT<double>>&)> loss;
  // Analytic gradients in parameter order (one tape forward+backward).
  std::function<std::vector<TensorT<double>>(
      const std::vector<TensorT<double>>&)>
      gradients;
};

// max_coords < 0 checks every coordinate; otherwise a seeded sample of that
// many coordinates across all parameters.
inline double gradient_check(const GradCheckProblem& problem,
                             std::vector<TensorT<double>> params,
                             double eps = 1e-5, int64_t max_coords = -1,
                             uint64_t sample_seed = 1) {
  const std::vector<TensorT<double>> analytic = problem.gradients(params);

  int64_t total = 0;
  for (const auto& p : params) total += p.size();

  std::vector<std::pair<size_t, int64_t>> coords;
  if (max_coords < 0 || max_coords >= total) {
    coords.reserve(static_cast<size_t>(total));
    for (size_t pi = 0; pi < params.size(); ++pi) {
      for (int64_t j = 0; j < params[pi].size(); ++j) coords.push_back({pi, j});
    }
  } else {
    Rng rng(mix_seed(sample_seed, "gradcheck"));
    for (int64_t k = 0; k < max_coords; ++k) {
      int64_t flat = static_cast<int64_t>(rng.next_below(total));
      size_t pi = 0;
      while (flat >= params[pi].size()) {
        flat -= params[pi].size();
        ++pi;
      }
      coords.push_back({pi, flat});
    }
  }

  double max_rel = 0.0;
  for (auto [pi, j] : coords) {
    const double original = params[pi].v[j];
    params[pi].v[j] = original + eps;
    const double up = problem.loss(params);
    params[pi].v[j] = original - eps;
    const double down = problem.loss(params);
    params[pi].v[j] = original;

    const double numeric = (up - down) / (2.0 * eps);
    const double exact = analytic[pi].v[j];
    const double rel = std::abs(exact - numeric) /
                       std::max({std::abs(exact), std::abs(numeric), 1e-8});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace midistring::nn
