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

#include "eocrc/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

namespace eocrc::eval {

using nlohmann::json;

ConfusionCounts confusion(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.size() != predictions.size()) {
    throw DimensionError("confusion: labels and predictions differ in length");
  }
  ConfusionCounts c;
  for (size_t i = 0; i < labels.size(); ++i) {
    const bool truth = labels[i] != 0;
    const bool pred = predictions[i] != 0;
    if (truth && pred) ++c.tp;
    else if (!truth && pred) ++c.fp;
    else if (truth && !pred) ++c.fn;
    else ++c.tn;
  }
  return c;
}

namespace {

double ratio(int64_t num, int64_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

RunMetrics compute_metrics(const ConfusionCounts& c) {
  RunMetrics m;
  m.sensitivity = ratio(c.tp, c.tp + c.fn, m.sensitivity_degenerate);
  m.specificity = ratio(c.tn, c.tn + c.fp, m.specificity_degenerate);
  m.precision = ratio(c.tp, c.tp + c.fp, m.precision_degenerate);
  m.npv = ratio(c.tn, c.tn + c.fn, m.npv_degenerate);
  const double pr = m.precision + m.sensitivity;
  if (pr == 0.0) {
    m.f1 = 0.0;
    m.f1_degenerate = true;
  } else {
    m.f1 = 2.0 * m.precision * m.sensitivity / pr;
  }
  return m;
}

namespace {

AggregateStat stat_of(const std::vector<double>& xs) {
  AggregateStat s;
  const size_t n = xs.size();
  if (n == 0) return s;
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(n);
  if (n < 2) return s;
  double ss = 0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  boost::math::students_t_distribution<double> t(static_cast<double>(n - 1));
  s.ci_half_width = boost::math::quantile(t, 0.975) * s.stddev / std::sqrt(static_cast<double>(n));
  return s;
}

}  // namespace

AggregateReport aggregate(const std::vector<RunMetrics>& runs) {
  AggregateReport r;
  r.n_runs = static_cast<int>(runs.size());
  auto collect = [&](auto member) {
    std::vector<double> xs;
    xs.reserve(runs.size());
    for (const auto& m : runs) xs.push_back(m.*member);
    return stat_of(xs);
  };
  r.sensitivity = collect(&RunMetrics::sensitivity);
  r.specificity = collect(&RunMetrics::specificity);
  r.precision = collect(&RunMetrics::precision);
  r.npv = collect(&RunMetrics::npv);
  r.f1 = collect(&RunMetrics::f1);
  return r;
}

EvaluationResult evaluate_runs(const LabelPredictor& predictor,
                               const std::vector<std::vector<cohort::PatientRecord>>& test_runs,
                               int workers) {
  EvaluationResult result;
  std::vector<std::vector<int>> preds(test_runs.size());
  parallel_for(test_runs.size(), workers, [&](size_t r) {
    const auto& run = test_runs[r];
    std::vector<int> p(run.size());
    for (size_t i = 0; i < run.size(); ++i) p[i] = predictor(run[i]) ? 1 : 0;
    preds[r] = std::move(p);
  });

  for (size_t r = 0; r < test_runs.size(); ++r) {
    const auto& run = test_runs[r];
    std::vector<int> labels(run.size());
    int positives = 0;
    for (size_t i = 0; i < run.size(); ++i) {
      labels[i] = run[i].label == cohort::Label::CRC ? 1 : 0;
      positives += labels[i];
    }
    if (positives == 0) {
      std::cerr << "evaluate: run " << r << " has no positives; skipped\n";
      ++result.skipped_runs;
      continue;
    }
    result.per_run.push_back(compute_metrics(confusion(labels, preds[r])));
  }
  result.report = aggregate(result.per_run);
  return result;
}

json metrics_to_json(const RunMetrics& m) {
  return json{{"sensitivity", m.sensitivity}, {"specificity", m.specificity},
              {"precision", m.precision},     {"npv", m.npv},
              {"f1", m.f1},
              {"degenerate",
               json{{"sensitivity", m.sensitivity_degenerate},
                    {"specificity", m.specificity_degenerate},
                    {"precision", m.precision_degenerate},
                    {"npv", m.npv_degenerate},
                    {"f1", m.f1_degenerate}}}};
}

namespace {

json stat_json(const AggregateStat& s) {
  return json{{"mean", s.mean}, {"stddev", s.stddev}, {"ci95_half_width", s.ci_half_width}};
}

}  // namespace

json report_to_json(const std::string& model_name, const EvaluationResult& r) {
  json per_run = json::array();
  for (const auto& m : r.per_run) per_run.push_back(metrics_to_json(m));
  return json{{"model", model_name},
              {"n_runs", r.report.n_runs},
              {"skipped_runs", r.skipped_runs},
              {"per_run", std::move(per_run)},
              {"aggregate",
               json{{"sensitivity", stat_json(r.report.sensitivity)},
                    {"specificity", stat_json(r.report.specificity)},
                    {"precision", stat_json(r.report.precision)},
                    {"npv", stat_json(r.report.npv)},
                    {"f1", stat_json(r.report.f1)}}}};
}

std::string csv_header() {
  std::string h = "model";
  for (const char* m : {"sensitivity", "specificity", "precision", "npv", "f1"}) {
    h += std::string(",") + m + "_mean," + m + "_sd," + m + "_ci95";
  }
  return h;
}

std::string csv_row(const std::string& model_name, const AggregateReport& r) {
  char buf[64];
  std::string row = model_name;
  for (const AggregateStat* s :
       {&r.sensitivity, &r.specificity, &r.precision, &r.npv, &r.f1}) {
    std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%.6f", s->mean, s->stddev, s->ci_half_width);
    row += buf;
  }
  return row;
}

}  // namespace eocrc::eval
