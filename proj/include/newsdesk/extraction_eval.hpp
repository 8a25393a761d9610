#pragma once

#include <algorithm>
#include <tuple>
#include <vector>

#include "newsdesk/error.hpp"
#include "newsdesk/geometry.hpp"

namespace newsdesk {

// Box-level error taxonomy for card extraction against hand-labeled gold.
struct ErrorReport {
  int fp_multi = 0;    // prediction overlaps two or more gold cards
  int fp_empty = 0;    // prediction overlaps no gold card
  int fn_partial = 0;  // gold card overlapped but never matched
  int fn_missed = 0;   // gold card overlapped by nothing
  int n_gold = 0;
  int matched = 0;
  double pct_correct = 0;  // 100 * matched / n_gold; 0 when there is no gold

  friend bool operator==(const ErrorReport&, const ErrorReport&) = default;
};

inline ErrorReport evaluate_extraction(const std::vector<Rect>& predicted, const std::vector<Rect>& gold,
                                       double iou_match = 0.5) {
  if (!(iou_match > 0.0 && iou_match <= 1.0)) {
    throw Error(ErrorCode::kInvalidThreshold, "iou_match must lie in (0, 1]");
  }
  ErrorReport report;
  report.n_gold = static_cast<int>(gold.size());

  struct Candidate {
    double iou;
    std::size_t p;
    std::size_t g;
  };
  std::vector<Candidate> candidates;
  std::vector<int> overlaps_of_pred(predicted.size(), 0);
  std::vector<int> overlaps_of_gold(gold.size(), 0);
  for (std::size_t p = 0; p < predicted.size(); ++p) {
    for (std::size_t g = 0; g < gold.size(); ++g) {
      const double v = iou(predicted[p], gold[g]);
      if (v <= 0) continue;
      ++overlaps_of_pred[p];
      ++overlaps_of_gold[g];
      if (v >= iou_match) candidates.push_back({v, p, g});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.iou, a.p, a.g) < std::tie(a.iou, b.p, b.g);
  });
  std::vector<bool> pred_used(predicted.size(), false);
  std::vector<bool> gold_used(gold.size(), false);
  for (const auto& c : candidates) {
    if (pred_used[c.p] || gold_used[c.g]) continue;
    pred_used[c.p] = gold_used[c.g] = true;
    ++report.matched;
  }
  for (int n : overlaps_of_pred) {
    if (n >= 2) ++report.fp_multi;
    if (n == 0) ++report.fp_empty;
  }
  for (std::size_t g = 0; g < gold.size(); ++g) {
    if (overlaps_of_gold[g] == 0) {
      ++report.fn_missed;
    } else if (!gold_used[g]) {
      ++report.fn_partial;
    }
  }
  report.pct_correct = gold.empty() ? 0.0 : 100.0 * report.matched / static_cast<double>(gold.size());
  return report;
}

}  // namespace newsdesk
