#pragma once

#include <map>
#include <string>
#include <vector>

namespace midistring::model {

// Support-weighted mean of per-class F1. Classes with no true and no
// predicted instances contribute zero (they also carry zero weight).
double weighted_f1(const std::vector<int>& y_true,
                   const std::vector<int>& y_pred, int n_classes);

struct PerClassMetrics {
  std::string label;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  int support = 0;
};

struct EvalReport {
  std::string task;  // "genre", "style", or "melody"
  std::map<std::string, double> metrics;
  std::vector<PerClassMetrics> per_class;
  int sample_count = 0;
  uint64_t seed = 0;
  std::string config_hash;
};

std::string report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);

// Analytic chance anchors: uniform guessing over K classes, and uniform
// ranking of 1 positive among n candidates (HITS@k = k/n, expected
// reciprocal rank = H_n / n).
double chance_classification(int n_classes);
double chance_hits_at(int k, int candidates = 50);
double chance_map(int candidates = 50);

// MAP and HITS@{1,5,10,25} from 1-based positive ranks, one per query.
EvalReport melody_metrics_from_ranks(const std::vector<int>& ranks);

}  // namespace midistring::model
