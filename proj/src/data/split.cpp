#include "data/split.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "core/rng.h"

namespace midistring {

Result<SplitResult, std::string> split_dataset(const Manifest& manifest,
                                               const SplitSpec& spec) {
  const std::array<double, 3> ratios = {spec.train, spec.val, spec.test};
  double total = 0;
  for (double r : ratios) {
    if (r < 0) return std::string("split ratios must be non-negative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    return std::string("split ratios must sum to 1");
  }

  auto stratum_key = [&](const ManifestRow& row) {
    switch (spec.stratify) {
      case Stratify::Genre:      return row.genre;
      case Stratify::Style:      return row.style;
      case Stratify::GenreStyle: return row.genre + "/" + row.style;
    }
    return std::string();
  };

  std::map<std::string, std::vector<ManifestRow>> strata;
  for (const auto& row : manifest.successes()) {
    strata[stratum_key(row)].push_back(row);
  }

  int nonzero_ratios = 0;
  for (double r : ratios) nonzero_ratios += r > 0 ? 1 : 0;

  SplitResult result;
  for (auto& [key, rows] : strata) {
    Rng rng(mix_seed(spec.seed, "split:" + key));
    rng.shuffle(rows);

    const int n = static_cast<int>(rows.size());
    if (n < nonzero_ratios) {
      result.warnings.push_back("stratum \"" + key + "\" has only " +
                                std::to_string(n) + " rows for " +
                                std::to_string(nonzero_ratios) + " parts");
    }
    // Largest remainder apportionment; ties resolved train > val > test.
    std::array<int, 3> counts;
    std::array<double, 3> remainders;
    int assigned = 0;
    for (int i = 0; i < 3; ++i) {
      double exact = ratios[i] * n;
      counts[i] = static_cast<int>(std::floor(exact));
      remainders[i] = exact - counts[i];
      assigned += counts[i];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return remainders[a] > remainders[b];
    });
    for (int i = 0; assigned < n; ++i) {
      ++counts[order[i % 3]];
      ++assigned;
    }

    int cursor = 0;
    for (int part = 0; part < 3; ++part) {
      for (int i = 0; i < counts[part]; ++i) {
        result.parts[part].rows.push_back(rows[cursor++]);
      }
    }
  }
  return result;
}

}  // namespace midistring
