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
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eocrc/cohort.hpp"

// Confusion-matrix metrics, the multi-run test protocol, and cross-run
// aggregation with 95% confidence intervals.

namespace eocrc::eval {

struct ConfusionCounts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  int64_t tn = 0;
};

// Throws DimensionError on length mismatch.
ConfusionCounts confusion(std::span<const int> labels, std::span<const int> predictions);

// 0/0 ratios are reported as 0 with the matching degenerate flag set, so
// aggregates stay defined while an all-negative classifier still looks useless.
struct RunMetrics {
  double sensitivity = 0;
  double specificity = 0;
  double precision = 0;
  double npv = 0;
  double f1 = 0;
  bool sensitivity_degenerate = false;
  bool specificity_degenerate = false;
  bool precision_degenerate = false;
  bool npv_degenerate = false;
  bool f1_degenerate = false;
};

RunMetrics compute_metrics(const ConfusionCounts& c);

struct AggregateStat {
  double mean = 0;
  double stddev = 0;         // sample stddev, n-1 denominator
  double ci_half_width = 0;  // t_{0.975, n-1} * sd / sqrt(n)
};

struct AggregateReport {
  AggregateStat sensitivity, specificity, precision, npv, f1;
  int n_runs = 0;
};

AggregateReport aggregate(const std::vector<RunMetrics>& runs);

// Any predictor satisfying patient -> {0,1} plugs in here, so the ML and LLM
// arms share one harness.
using LabelPredictor = std::function<int(const cohort::PatientRecord&)>;

struct EvaluationResult {
  std::vector<RunMetrics> per_run;
  AggregateReport report;
  int skipped_runs = 0;  // runs with zero positives
};

EvaluationResult evaluate_runs(const LabelPredictor& predictor,
                               const std::vector<std::vector<cohort::PatientRecord>>& test_runs,
                               int workers = 1);

// --- reporting ---------------------------------------------------------------

nlohmann::json metrics_to_json(const RunMetrics& m);
nlohmann::json report_to_json(const std::string& model_name, const EvaluationResult& r);

// Comparison-table CSV: one row per model, mean/sd/ci95 per metric.
std::string csv_header();
std::string csv_row(const std::string& model_name, const AggregateReport& r);

}  // namespace eocrc::eval
