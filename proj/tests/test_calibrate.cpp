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

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "eocrc/calibrate.hpp"
#include "test_util.hpp"

using namespace eocrc;
using namespace eocrc::calib;

namespace {

// Independent AUC oracle: count pairwise wins plus half-ties.
double pairwise_auc(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0;
  size_t pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Independent Youden oracle: exhaustive scan over candidate thresholds.
std::pair<double, double> youden_scan(std::span<const double> scores,
                                      std::span<const int> labels) {
  std::vector<double> cands(scores.begin(), scores.end());
  cands.push_back(std::numeric_limits<double>::infinity());
  int64_t P = 0, N = 0;
  for (int y : labels) (y ? P : N)++;
  double best_j = -2, best_thr = 0;
  for (double t : cands) {
    int64_t tp = 0, fp = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) (labels[i] ? tp : fp)++;
    }
    const double j = static_cast<double>(tp) / P + static_cast<double>(N - fp) / N - 1.0;
    if (j > best_j || (j == best_j && t < best_thr)) {
      best_j = j;
      best_thr = t;
    }
  }
  return {best_thr, best_j};
}

// A stand-in model whose score is just feature 0.
class PassthroughModel final : public models::TrainedModel {
 public:
  explicit PassthroughModel(size_t dim) : TrainedModel(models::ModelKind::LR, dim) {}
  double score_dense(std::span<const double> x) const override { return x[0]; }
  nlohmann::json params_to_json() const override { return nlohmann::json::object(); }
};

}  // namespace

TEST_CASE("roc separable and anti-separable endpoints") {
  const double scores[] = {0.9, 0.9, 0.1, 0.1};
  const int labels[] = {1, 1, 0, 0};
  CHECK(roc_curve(scores, labels).auc == 1.0);
  const int flipped[] = {0, 0, 1, 1};
  CHECK(roc_curve(scores, flipped).auc == 0.0);
}

TEST_CASE("roc rejects single-class labels") {
  const double scores[] = {0.9, 0.1};
  const int labels[] = {1, 1};
  CHECK_THROWS_AS(roc_curve(scores, labels), SingleClassError);
}

TEST_CASE("four-point fixture matches the pairwise-counting oracle") {
  // positives 0.8 and 0.6; negatives 0.6 and 0.2
  const double scores[] = {0.8, 0.6, 0.6, 0.2};
  const int labels[] = {1, 0, 1, 0};
  const double oracle = pairwise_auc(scores, labels);
  // wins: (0.8,0.6)+(0.8,0.2)+(0.6,0.2)=3, tie (0.6,0.6)=0.5 -> 3.5/4
  CHECK(oracle == doctest::Approx(0.875));
  CHECK(roc_curve(scores, labels).auc == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("roc curve runs from (0,0) to (1,1) with monotone sweep") {
  Rng rng(5);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) {
    scores.push_back(rng.uniform_int(0, 1000) / 1000.0);
    labels.push_back(rng.bernoulli(0.4) ? 1 : 0);
  }
  labels[0] = 1;
  labels[1] = 0;
  auto curve = roc_curve(scores, labels);
  CHECK(curve.points.front().sensitivity == 0.0);
  CHECK(curve.points.front().specificity == 1.0);
  CHECK(curve.points.back().sensitivity == 1.0);
  CHECK(curve.points.back().specificity == 0.0);
  for (size_t i = 1; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].threshold < curve.points[i - 1].threshold);
    CHECK(curve.points[i].sensitivity >= curve.points[i - 1].sensitivity);
    CHECK(curve.points[i].specificity <= curve.points[i - 1].specificity);
    // J identity at every point
    const double j = curve.points[i].sensitivity + curve.points[i].specificity - 1.0;
    CHECK(j == curve.points[i].sensitivity + curve.points[i].specificity - 1.0);
  }
}

TEST_CASE("auc is invariant under strictly increasing score transforms") {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> scores;
    std::vector<int> labels;
    const int n = static_cast<int>(rng.uniform_int(10, 60));
    for (int i = 0; i < n; ++i) {
      scores.push_back(rng.uniform_int(0, 1000) / 1000.0);  // grid keeps ties exact
      labels.push_back(rng.bernoulli(0.5) ? 1 : 0);
    }
    labels[0] = 1;
    labels[1] = 0;
    std::vector<double> warped(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) warped[i] = scores[i] / 4.0 + 0.5;
    CHECK(roc_curve(scores, labels).auc == roc_curve(warped, labels).auc);
  }
}

TEST_CASE("youden on a perfect classifier is 1.0") {
  const double scores[] = {0.9, 0.8, 0.2, 0.1};
  const int labels[] = {1, 1, 0, 0};
  auto [thr, j] = youden_threshold(roc_curve(scores, labels));
  CHECK(j == doctest::Approx(1.0));
  CHECK(thr == doctest::Approx(0.8));  // smallest threshold achieving J=1
}

TEST_CASE("J arithmetic matches the fine-tuned headline operating point") {
  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  curve.points.push_back({0.5, 0.730, 0.910});
  auto [thr, j] = youden_threshold(curve);
  CHECK(thr == 0.5);
  CHECK(j == doctest::Approx(0.640).epsilon(1e-12));
}

TEST_CASE("youden matches the exhaustive scan oracle") {
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> scores;
    std::vector<int> labels;
    const int n = static_cast<int>(rng.uniform_int(5, 80));
    for (int i = 0; i < n; ++i) {
      scores.push_back(rng.uniform_int(0, 50) / 50.0);  // force ties
      labels.push_back(rng.bernoulli(0.3) ? 1 : 0);
    }
    labels[0] = 1;
    labels[1] = 0;
    auto [thr, j] = youden_threshold(roc_curve(scores, labels));
    auto [othr, oj] = youden_scan(scores, labels);
    CHECK(j == oj);
    CHECK(thr == othr);
  }
}

TEST_CASE("cv_threshold on degenerate separation recovers the positive score") {
  // Matrix whose feature 0 is 0.9 for positives and 0.1 for negatives.
  feat::DesignMatrix m;
  m.space = testutil::make_space(2);
  for (int i = 0; i < 60; ++i) {
    feat::FeatureVector x;
    const int y = i % 2;
    x.set(0, y ? 0.9 : 0.1);
    x.set(1, (i * 37 % 11) / 11.0);
    m.rows.push_back(std::move(x));
    m.labels.push_back(y);
  }
  auto trainer = [](const feat::DesignMatrix& tr, uint64_t) {
    return std::unique_ptr<models::TrainedModel>(new PassthroughModel(tr.dim()));
  };
  auto report = cv_threshold_with(trainer, m, 10, 0.10, 42, 2);
  CHECK(report.skipped_folds == 0);
  REQUIRE(report.per_fold_thresholds.size() == 10);
  for (double t : report.per_fold_thresholds) CHECK(t == 0.9);
  for (double j : report.per_fold_j) CHECK(j == doctest::Approx(1.0));
  CHECK(report.chosen_threshold == doctest::Approx(0.9));
}

TEST_CASE("cv_threshold is deterministic and bounded by fold extremes") {
  Rng rng(31);
  auto m = testutil::random_matrix(120, 6, rng, 2.0, 0.2);
  models::Hyperparams h;
  auto r1 = cv_threshold(models::ModelKind::LR, h, m, 5, 0.2, 7, 2);
  auto r2 = cv_threshold(models::ModelKind::LR, h, m, 5, 0.2, 7, 1);
  CHECK(r1.chosen_threshold == r2.chosen_threshold);
  CHECK(r1.per_fold_thresholds == r2.per_fold_thresholds);
  const auto [mn, mx] = std::minmax_element(r1.per_fold_thresholds.begin(),
                                            r1.per_fold_thresholds.end());
  CHECK(r1.chosen_threshold >= *mn);
  CHECK(r1.chosen_threshold <= *mx);
}
