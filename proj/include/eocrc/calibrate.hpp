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

#pragma once

#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eocrc/models.hpp"

// ROC construction and Youden-J threshold selection on prevalence-matched
// cross-validation folds.

namespace eocrc::calib {

struct RocPoint {
  double threshold = 0;  // predict positive iff score >= threshold
  double sensitivity = 0;
  double specificity = 0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // sorted by descending threshold
  double auc = 0;
};

// One point per distinct score plus the all-negative endpoint (threshold
// +infinity). AUC by trapezoid over (1 - specificity, sensitivity).
// Throws SingleClassError unless both classes are present.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

// Threshold maximizing J = sensitivity + specificity - 1; ties resolve to the
// smallest threshold (favors sensitivity). Returns (threshold, J).
std::pair<double, double> youden_threshold(const RocCurve& curve);

struct ThresholdReport {
  std::vector<double> per_fold_thresholds;
  std::vector<double> per_fold_j;
  double chosen_threshold = 0.5;  // arithmetic mean of per-fold thresholds
  int skipped_folds = 0;
};

// Trains on the balanced portion of each fold and reads the Youden threshold
// off a validation set subsampled to target_prevalence (positives subsampled,
// held-out negatives kept).
ThresholdReport cv_threshold(models::ModelKind kind, const models::Hyperparams& hyper,
                             const feat::DesignMatrix& matrix, int k = 10,
                             double target_prevalence = 0.01, uint64_t seed = 0,
                             int workers = 1);

// Protocol core with an injectable trainer, for tests and reuse.
using TrainerFn = std::function<std::unique_ptr<models::TrainedModel>(
    const feat::DesignMatrix& fold_train, uint64_t fold_seed)>;

ThresholdReport cv_threshold_with(const TrainerFn& trainer, const feat::DesignMatrix& matrix,
                                  int k, double target_prevalence, uint64_t seed,
                                  int workers = 1);

nlohmann::json threshold_report_to_json(const ThresholdReport& r);
nlohmann::json roc_to_json(const RocCurve& c);

}  // namespace eocrc::calib
