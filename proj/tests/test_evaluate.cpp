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

#include <doctest.h>

#include <algorithm>

#include <nlohmann/json.hpp>

#include "eocrc/evaluate.hpp"

using namespace eocrc;
using namespace eocrc::eval;

TEST_CASE("confusion counts") {
  {
    const int labels[] = {1, 0};
    const int preds[] = {1, 0};
    auto c = confusion(labels, preds);
    CHECK(c.tp == 1);
    CHECK(c.tn == 1);
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);
  }
  {
    std::vector<int> labels(10, 1), preds(10, 0);
    auto c = confusion(labels, preds);
    CHECK(c.fn == 10);
    CHECK(c.tp == 0);
  }
  {
    auto c = confusion({}, {});
    CHECK(c.tp + c.fp + c.fn + c.tn == 0);
  }
  const int a[] = {1};
  const int b[] = {1, 0};
  CHECK_THROWS_AS(confusion(a, b), DimensionError);
}

TEST_CASE("metrics on the 10+990-shaped counts") {
  auto m = compute_metrics({7, 89, 3, 901});
  CHECK(m.sensitivity == doctest::Approx(0.7000).epsilon(1e-4));
  CHECK(m.specificity == doctest::Approx(0.9101).epsilon(1e-4));
  CHECK(m.precision == doctest::Approx(0.0729).epsilon(1e-3));
  CHECK(m.npv == doctest::Approx(0.9967).epsilon(1e-4));
  CHECK(m.f1 == doctest::Approx(0.1321).epsilon(1e-3));
}

TEST_CASE("perfect predictions give all ones") {
  auto m = compute_metrics({10, 0, 0, 90});
  CHECK(m.sensitivity == 1.0);
  CHECK(m.specificity == 1.0);
  CHECK(m.precision == 1.0);
  CHECK(m.npv == 1.0);
  CHECK(m.f1 == 1.0);
}

TEST_CASE("0/0 convention flags degenerate ratios") {
  auto m = compute_metrics({0, 0, 5, 95});  // nothing predicted positive
  CHECK(m.precision == 0.0);
  CHECK(m.precision_degenerate);
  CHECK_FALSE(m.sensitivity_degenerate);
  CHECK(m.f1 == 0.0);
}

TEST_CASE("sensitivity reconstructs tp exactly") {
  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    ConfusionCounts c{rng.uniform_int(1, 50), rng.uniform_int(0, 50), rng.uniform_int(0, 50),
                      rng.uniform_int(0, 50)};
    auto m = compute_metrics(c);
    CHECK(m.sensitivity * static_cast<double>(c.tp + c.fn) == doctest::Approx(c.tp).epsilon(1e-12));
  }
}

TEST_CASE("aggregation of identical runs has zero spread") {
  auto m = compute_metrics({7, 89, 3, 901});
  std::vector<RunMetrics> runs(10, m);
  auto r = aggregate(runs);
  CHECK(r.n_runs == 10);
  CHECK(r.f1.mean == doctest::Approx(0.1321).epsilon(1e-3));
  CHECK(r.f1.stddev == 0.0);
  CHECK(r.f1.ci_half_width == 0.0);
  CHECK(r.sensitivity.mean == doctest::Approx(0.7));
}

TEST_CASE("ci uses the t distribution with n-1 df") {
  // two runs: mean 0.5, sd sqrt(0.02) -> ci = t(1,0.975)=12.7062... * sd/sqrt(2)
  RunMetrics a, b;
  a.sensitivity = 0.4;
  b.sensitivity = 0.6;
  auto r = aggregate({a, b});
  const double sd = std::sqrt(0.02);
  CHECK(r.sensitivity.stddev == doctest::Approx(sd).epsilon(1e-12));
  CHECK(r.sensitivity.ci_half_width ==
        doctest::Approx(12.706204736432095 * sd / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("threshold sweep is monotone in sensitivity and specificity") {
  Rng rng(77);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 200; ++i) {
    scores.push_back(rng.uniform01());
    labels.push_back(rng.bernoulli(0.3) ? 1 : 0);
  }
  labels[0] = 1;
  labels[1] = 0;
  double last_sens = -1, last_spec = 2;
  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  for (double t : thresholds) {
    std::vector<int> preds(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] >= t ? 1 : 0;
    auto m = compute_metrics(confusion(labels, preds));
    CHECK(m.sensitivity >= last_sens);
    CHECK(m.specificity <= last_spec);
    last_sens = m.sensitivity;
    last_spec = m.specificity;
  }
}

TEST_CASE("evaluate_runs shares the harness across predictors and skips empty runs") {
  using cohort::Label;
  auto patient = [](std::string id, Label l, int age) {
    cohort::PatientRecord p;
    p.id = std::move(id);
    p.age_years = age;
    p.label = l;
    return p;
  };
  // Two runs of 4; predictor says positive iff age >= 40.
  std::vector<std::vector<cohort::PatientRecord>> runs(3);
  runs[0] = {patient("a", Label::CRC, 41), patient("b", Label::NonCRC, 20),
             patient("c", Label::NonCRC, 44), patient("d", Label::CRC, 20)};
  runs[1] = {patient("e", Label::CRC, 41), patient("f", Label::NonCRC, 20),
             patient("g", Label::NonCRC, 21), patient("h", Label::CRC, 43)};
  runs[2] = {patient("i", Label::NonCRC, 41), patient("j", Label::NonCRC, 20)};  // no positives

  auto result = evaluate_runs([](const cohort::PatientRecord& p) { return p.age_years >= 40; },
                              runs, 2);
  CHECK(result.skipped_runs == 1);
  REQUIRE(result.per_run.size() == 2);
  // run 0: tp=1 fn=1 fp=1 tn=1
  CHECK(result.per_run[0].sensitivity == doctest::Approx(0.5));
  // run 1: tp=2 fn=0 fp=0 tn=2
  CHECK(result.per_run[1].sensitivity == doctest::Approx(1.0));
  CHECK(result.report.n_runs == 2);
  CHECK(result.report.sensitivity.mean == doctest::Approx(0.75));

  auto j = report_to_json("probe", result);
  CHECK(j.at("model") == "probe");
  CHECK(j.at("aggregate").at("sensitivity").contains("ci95_half_width"));
  // Table-3 shape: exactly 5 metrics, each with mean and spread
  CHECK(j.at("aggregate").size() == 5);
}

TEST_CASE("csv row shape") {
  auto m = compute_metrics({7, 89, 3, 901});
  auto r = aggregate(std::vector<RunMetrics>(3, m));
  const std::string header = csv_header();
  const std::string row = csv_row("lr", r);
  CHECK(std::count(header.begin(), header.end(), ',') ==
        std::count(row.begin(), row.end(), ','));
  CHECK(row.substr(0, 3) == "lr,");
}
