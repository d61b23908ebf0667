/*
 * Copyright 2026 The eocrc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "eocrc/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

namespace eocrc::calib {

using nlohmann::json;

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("roc_curve: scores and labels differ in length");
  }
  int64_t P = 0, N = 0;
  for (int y : labels) (y ? P : N)++;
  if (P == 0 || N == 0) throw SingleClassError("roc_curve needs both classes");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});

  int64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] ? tp : fp)++;
      ++i;
    }
    curve.points.push_back({s, static_cast<double>(tp) / static_cast<double>(P),
                            static_cast<double>(N - fp) / static_cast<double>(N)});
  }

  double auc = 0;
  for (size_t p = 0; p + 1 < curve.points.size(); ++p) {
    const double fpr0 = 1.0 - curve.points[p].specificity;
    const double fpr1 = 1.0 - curve.points[p + 1].specificity;
    auc += (fpr1 - fpr0) * (curve.points[p].sensitivity + curve.points[p + 1].sensitivity) / 2.0;
  }
  curve.auc = auc;
  return curve;
}

std::pair<double, double> youden_threshold(const RocCurve& curve) {
  if (curve.points.empty()) throw ConfigError("youden_threshold: empty curve");
  double best_j = -2.0;
  double best_thr = 0.0;
  for (const auto& p : curve.points) {
    const double j = p.sensitivity + p.specificity - 1.0;
    if (j > best_j || (j == best_j && p.threshold < best_thr)) {
      best_j = j;
      best_thr = p.threshold;
    }
  }
  return {best_thr, best_j};
}

ThresholdReport cv_threshold_with(const TrainerFn& trainer, const feat::DesignMatrix& matrix,
                                  int k, double target_prevalence, uint64_t seed, int workers) {
  if (k < 2) throw ConfigError("cv_threshold: k must be >= 2");
  if (!(target_prevalence > 0 && target_prevalence < 1)) {
    throw ConfigError("cv_threshold: target_prevalence must lie in (0, 1)");
  }
  const auto folds = models::stratified_folds(matrix.labels, k, derive_seed(seed, "calib.folds"));

  struct FoldOut {
    bool ok = false;
    double threshold = 0, j = 0;
  };
  std::vector<FoldOut> out(static_cast<size_t>(k));

  parallel_for(static_cast<size_t>(k), workers, [&](size_t f) {
    feat::DesignMatrix train;
    train.space = matrix.space;
    std::vector<size_t> fold_pos, fold_neg;
    for (size_t i = 0; i < matrix.rows.size(); ++i) {
      if (folds[i] == static_cast<int>(f)) {
        (matrix.labels[i] ? fold_pos : fold_neg).push_back(i);
      } else {
        train.rows.push_back(matrix.rows[i]);
        train.labels.push_back(matrix.labels[i]);
      }
    }
    if (fold_pos.empty() || fold_neg.empty()) {
      std::cerr << "cv_threshold: fold " << f << " validation set misses a class; skipped\n";
      return;
    }
    // Validation at the target prevalence: all held-out negatives, positives
    // subsampled to round(n_neg * p / (1-p)). Small folds keep at least two
    // positives; a single-positive fold degenerates Youden to that patient's
    // score.
    const auto n_neg = static_cast<double>(fold_neg.size());
    size_t n_pos = static_cast<size_t>(
        std::lround(n_neg * target_prevalence / (1.0 - target_prevalence)));
    n_pos = std::clamp<size_t>(n_pos, 2, fold_pos.size());
    Rng rng(derive_seed(seed, "calib.val" + std::to_string(f)));
    rng.shuffle(fold_pos);
    fold_pos.resize(n_pos);

    auto model = trainer(train, derive_seed(seed, "calib.fold" + std::to_string(f)));

    std::vector<double> scores;
    std::vector<int> labels;
    for (size_t i : fold_pos) {
      scores.push_back(model->score(matrix.rows[i]));
      labels.push_back(1);
    }
    for (size_t i : fold_neg) {
      scores.push_back(model->score(matrix.rows[i]));
      labels.push_back(0);
    }
    const auto curve = roc_curve(scores, labels);
    const auto [thr, j] = youden_threshold(curve);
    if (std::isinf(thr)) {
      std::cerr << "cv_threshold: fold " << f << " picked the degenerate endpoint; skipped\n";
      return;
    }
    out[f] = {true, thr, j};
  });

  ThresholdReport report;
  for (const auto& o : out) {
    if (!o.ok) {
      ++report.skipped_folds;
      continue;
    }
    report.per_fold_thresholds.push_back(o.threshold);
    report.per_fold_j.push_back(o.j);
  }
  if (report.per_fold_thresholds.empty()) {
    throw Error("cv_threshold: every fold was skipped");
  }
  double sum = 0;
  for (double t : report.per_fold_thresholds) sum += t;
  report.chosen_threshold = sum / static_cast<double>(report.per_fold_thresholds.size());
  return report;
}

ThresholdReport cv_threshold(models::ModelKind kind, const models::Hyperparams& hyper,
                             const feat::DesignMatrix& matrix, int k, double target_prevalence,
                             uint64_t seed, int workers) {
  return cv_threshold_with(
      [&](const feat::DesignMatrix& fold_train, uint64_t fold_seed) {
        return models::train(kind, fold_train, hyper, fold_seed);
      },
      matrix, k, target_prevalence, seed, workers);
}

json threshold_report_to_json(const ThresholdReport& r) {
  return json{{"chosen_threshold", r.chosen_threshold},
              {"per_fold_thresholds", r.per_fold_thresholds},
              {"per_fold_j", r.per_fold_j},
              {"skipped_folds", r.skipped_folds}};
}

json roc_to_json(const RocCurve& c) {
  json points = json::array();
  for (const auto& p : c.points) {
    json thr = std::isinf(p.threshold) ? json(nullptr) : json(p.threshold);
    points.push_back(json{{"threshold", std::move(thr)},
                          {"sensitivity", p.sensitivity},
                          {"specificity", p.specificity}});
  }
  return json{{"auc", c.auc}, {"points", std::move(points)}};
}

}  // namespace eocrc::calib
