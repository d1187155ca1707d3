#include "model/metrics.h"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace midistring::model {

double weighted_f1(const std::vector<int>& y_true,
                   const std::vector<int>& y_pred, int n_classes) {
  if (y_true.size() != y_pred.size() || y_true.empty()) {
    throw std::invalid_argument("weighted_f1: label vectors must match and be non-empty");
  }
  std::vector<int64_t> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
  for (size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= n_classes || y_pred[i] < 0 ||
        y_pred[i] >= n_classes) {
      throw std::invalid_argument("weighted_f1: label out of range");
    }
    if (y_true[i] == y_pred[i]) {
      ++tp[y_true[i]];
    } else {
      ++fn[y_true[i]];
      ++fp[y_pred[i]];
    }
  }
  double weighted = 0;
  const double n = static_cast<double>(y_true.size());
  for (int c = 0; c < n_classes; ++c) {
    const int64_t support = tp[c] + fn[c];
    if (support == 0) continue;
    const double precision =
        tp[c] + fp[c] > 0 ? double(tp[c]) / double(tp[c] + fp[c]) : 0.0;
    const double recall = double(tp[c]) / double(support);
    const double f1 = precision + recall > 0
                          ? 2 * precision * recall / (precision + recall)
                          : 0.0;
    weighted += f1 * double(support) / n;
  }
  return weighted;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json doc;
  doc["task"] = report.task;
  doc["metrics"] = report.metrics;
  doc["sample_count"] = report.sample_count;
  doc["seed"] = report.seed;
  doc["config_hash"] = report.config_hash;
  auto& per_class = doc["per_class"] = nlohmann::ordered_json::array();
  for (const auto& c : report.per_class) {
    per_class.push_back({{"label", c.label},
                         {"precision", c.precision},
                         {"recall", c.recall},
                         {"f1", c.f1},
                         {"support", c.support}});
  }
  return doc.dump(2);
}

std::string report_to_text(const EvalReport& report) {
  std::ostringstream out;
  out << "task: " << report.task << "  (n=" << report.sample_count
      << ", seed=" << report.seed << ", config=" << report.config_hash << ")\n";
  for (const auto& [name, value] : report.metrics) {
    out << "  " << name << ": " << value << "\n";
  }
  if (!report.per_class.empty()) {
    out << "  per-class F1:\n";
    for (const auto& c : report.per_class) {
      out << "    " << c.label << ": f1=" << c.f1 << " p=" << c.precision
          << " r=" << c.recall << " n=" << c.support << "\n";
    }
  }
  return out.str();
}

double chance_classification(int n_classes) { return 1.0 / n_classes; }

double chance_hits_at(int k, int candidates) {
  return static_cast<double>(k) / candidates;
}

double chance_map(int candidates) {
  double harmonic = 0;
  for (int r = 1; r <= candidates; ++r) harmonic += 1.0 / r;
  return harmonic / candidates;
}

EvalReport melody_metrics_from_ranks(const std::vector<int>& ranks) {
  if (ranks.empty()) {
    throw std::invalid_argument("melody_metrics_from_ranks: no ranks");
  }
  const std::vector<int> ks = {1, 5, 10, 25};
  std::vector<int64_t> hits(ks.size(), 0);
  double ap_sum = 0;
  for (int rank : ranks) {
    if (rank < 1) throw std::invalid_argument("ranks are 1-based");
    ap_sum += 1.0 / rank;
    for (size_t i = 0; i < ks.size(); ++i) {
      if (rank <= ks[i]) ++hits[i];
    }
  }
  EvalReport report;
  report.task = "melody";
  report.sample_count = static_cast<int>(ranks.size());
  report.metrics["map"] = ap_sum / static_cast<double>(ranks.size());
  for (size_t i = 0; i < ks.size(); ++i) {
    report.metrics["hits@" + std::to_string(ks[i])] =
        static_cast<double>(hits[i]) / static_cast<double>(ranks.size());
  }
  return report;
}

}  // namespace midistring::model
