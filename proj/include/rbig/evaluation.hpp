// Copyright 2026 The rbig Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RBIG_EVALUATION_HPP_
#define RBIG_EVALUATION_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "rbig/common.hpp"
#include "rbig/rng.hpp"

namespace rbig {

struct RocCurve {
  std::vector<double> thresholds;  // descending; starts at +inf
  std::vector<double> fpr;         // non-decreasing, 0 .. 1
  std::vector<double> tpr;         // non-decreasing, 0 .. 1
  double auc = 0.0;
};

struct PrCurve {
  std::vector<double> thresholds;  // descending
  std::vector<double> recall;
  std::vector<double> precision;
  double average_precision = 0.0;
};

namespace detail {

inline void check_labels(const Vector& scores, const std::vector<int>& labels,
                         Index& positives, Index& negatives) {
  if (scores.size() != static_cast<Index>(labels.size())) {
    throw DimensionMismatchError(
        "evaluation: scores and labels differ in length (" +
        std::to_string(scores.size()) + " vs " +
        std::to_string(labels.size()) + ")");
  }
  check_finite(scores, "evaluation");
  positives = 0;
  for (int v : labels) positives += (v != 0);
  negatives = static_cast<Index>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedCurveError(
        "evaluation: need both classes present (positives=" +
        std::to_string(positives) + ", negatives=" +
        std::to_string(negatives) + ")");
  }
}

// Indices ordered by descending score; ties keep input order (the grouping
// below makes tie order irrelevant for every emitted number).
inline std::vector<Index> descending_order(const Vector& scores) {
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&scores](Index a, Index b) {
                     return scores[a] > scores[b];
                   });
  return order;
}

}  // namespace detail

// ROC by sweeping all distinct score values as thresholds. Samples with
// equal scores move across the threshold together, which makes the
// trapezoidal area equal the tie-corrected Mann-Whitney statistic and the
// curve invariant under strictly increasing score transforms.
inline RocCurve roc_curve(const Vector& scores,
                          const std::vector<int>& labels) {
  Index P = 0, N = 0;
  detail::check_labels(scores, labels, P, N);
  std::vector<Index> order = detail::descending_order(scores);

  RocCurve curve;
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);

  double auc = 0.0;
  Index tp = 0, fp = 0;
  std::size_t i = 0;
  const std::size_t n = order.size();
  while (i < n) {
    const double threshold = scores[order[i]];
    Index tp_add = 0, fp_add = 0;
    while (i < n && scores[order[i]] == threshold) {
      if (labels[static_cast<std::size_t>(order[i])] != 0) {
        ++tp_add;
      } else {
        ++fp_add;
      }
      ++i;
    }
    const double fpr_prev = static_cast<double>(fp) / static_cast<double>(N);
    const double tpr_prev = static_cast<double>(tp) / static_cast<double>(P);
    tp += tp_add;
    fp += fp_add;
    const double fpr_now = static_cast<double>(fp) / static_cast<double>(N);
    const double tpr_now = static_cast<double>(tp) / static_cast<double>(P);
    auc += (fpr_now - fpr_prev) * (tpr_now + tpr_prev) * 0.5;
    curve.thresholds.push_back(threshold);
    curve.fpr.push_back(fpr_now);
    curve.tpr.push_back(tpr_now);
  }
  curve.auc = auc;
  return curve;
}

// Precision/recall over the same grouped thresholds; average precision by
// step-wise integration sum((R_k - R_{k-1}) * P_k).
inline PrCurve precision_recall(const Vector& scores,
                                const std::vector<int>& labels) {
  Index P = 0, N = 0;
  detail::check_labels(scores, labels, P, N);
  std::vector<Index> order = detail::descending_order(scores);

  PrCurve curve;
  double ap = 0.0;
  double recall_prev = 0.0;
  Index tp = 0, fp = 0;
  std::size_t i = 0;
  const std::size_t n = order.size();
  while (i < n) {
    const double threshold = scores[order[i]];
    while (i < n && scores[order[i]] == threshold) {
      if (labels[static_cast<std::size_t>(order[i])] != 0) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(P);
    const double precision =
        static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - recall_prev) * precision;
    recall_prev = recall;
    curve.thresholds.push_back(threshold);
    curve.recall.push_back(recall);
    curve.precision.push_back(precision);
  }
  curve.average_precision = ap;
  return curve;
}

struct PartialAucResult {
  double raw = 0.0;         // trapezoid area over fpr in [0, cap]
  double normalized = 0.0;  // raw / cap, so a perfect detector scores 1
};

inline PartialAucResult partial_auc(const RocCurve& curve, double fpr_cap) {
  if (!(fpr_cap > 0.0 && fpr_cap <= 1.0)) {
    throw InvalidArgumentError("partial_auc: cap must lie in (0, 1]");
  }
  double area = 0.0;
  for (std::size_t i = 1; i < curve.fpr.size(); ++i) {
    const double x0 = curve.fpr[i - 1];
    const double x1 = curve.fpr[i];
    const double y0 = curve.tpr[i - 1];
    const double y1 = curve.tpr[i];
    if (x0 >= fpr_cap) break;
    if (x1 <= fpr_cap) {
      area += (x1 - x0) * (y0 + y1) * 0.5;
    } else {
      // Segment crosses the cap: interpolate tpr at the cap.
      const double t = (fpr_cap - x0) / (x1 - x0);
      const double y_cap = y0 + t * (y1 - y0);
      area += (fpr_cap - x0) * (y0 + y_cap) * 0.5;
      break;
    }
  }
  return {area, area / fpr_cap};
}

struct BootstrapSummary {
  double median = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
  std::vector<double> values;  // one AUC per run, in run order
};

namespace detail {

// Linearly interpolated quantile of a sorted vector.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

// Pixel-level bootstrap of the AUC: each run resamples all l samples with
// replacement and recomputes the ROC area. Runs draw from generators spawned
// off the master seed by run index, so results do not depend on thread
// scheduling. Resamples that come out single-class are redrawn (at most 100
// times before giving up).
inline BootstrapSummary bootstrap_auc(const Vector& scores,
                                      const std::vector<int>& labels,
                                      int runs, const RngState& master) {
  Index P = 0, N = 0;
  detail::check_labels(scores, labels, P, N);
  if (runs < 1) {
    throw InvalidArgumentError("bootstrap_auc: runs must be >= 1");
  }
  const std::size_t l = labels.size();
  BootstrapSummary out;
  out.values.assign(static_cast<std::size_t>(runs), 0.0);
  std::vector<std::string> failures(static_cast<std::size_t>(runs));

  parallel_for(static_cast<std::size_t>(runs), [&](std::size_t lo,
                                                   std::size_t hi) {
    Vector s(static_cast<Index>(l));
    std::vector<int> y(l);
    for (std::size_t run = lo; run < hi; ++run) {
      RngState rng = master.spawn(run);
      bool ok = false;
      for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        int pos = 0;
        for (std::size_t i = 0; i < l; ++i) {
          const std::size_t j = rng.next_index(l);
          s[static_cast<Index>(i)] = scores[static_cast<Index>(j)];
          y[i] = labels[j];
          pos += (y[i] != 0);
        }
        if (pos == 0 || pos == static_cast<int>(l)) continue;
        out.values[run] = roc_curve(s, y).auc;
        ok = true;
      }
      if (!ok) {
        failures[run] = "bootstrap_auc: run " + std::to_string(run) +
                        " drew a single-class resample 100 times";
      }
    }
  });
  for (const std::string& f : failures) {
    if (!f.empty()) throw UndefinedCurveError(f);
  }

  std::vector<double> sorted = out.values;
  std::sort(sorted.begin(), sorted.end());
  out.min_value = sorted.front();
  out.max_value = sorted.back();
  out.median = detail::quantile_sorted(sorted, 0.5);
  out.q025 = detail::quantile_sorted(sorted, 0.025);
  out.q975 = detail::quantile_sorted(sorted, 0.975);
  return out;
}

}  // namespace rbig

#endif  // RBIG_EVALUATION_HPP_
