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
#include <cmath>

#include <nlohmann/json.hpp>

#include "eocrc/evaluate.hpp"
#include "eocrc/models.hpp"
#include "test_util.hpp"

using namespace eocrc;
using namespace eocrc::models;
using eocrc::feat::DesignMatrix;
using eocrc::feat::FeatureVector;
using nlohmann::json;

namespace {

// Linearly separable two-feature fixture: negatives near 0, positives near 3.
DesignMatrix separable_fixture() {
  DesignMatrix m;
  m.space = testutil::make_space(2);
  Rng rng(4242);
  for (int i = 0; i < 60; ++i) {
    const int y = i % 2;
    FeatureVector x;
    x.set(0, y ? rng.uniform(2.0, 3.0) : rng.uniform(0.0, 1.0));
    x.set(1, rng.uniform(-1.0, 1.0));
    m.rows.push_back(std::move(x));
    m.labels.push_back(y);
  }
  return m;
}

double train_f1(const TrainedModel& model, const DesignMatrix& m, double thr = 0.5) {
  std::vector<int> preds(m.rows.size());
  for (size_t i = 0; i < m.rows.size(); ++i) preds[i] = model.score(m.rows[i]) >= thr ? 1 : 0;
  return eval::compute_metrics(eval::confusion(m.labels, preds)).f1;
}

std::unique_ptr<TrainedModel> linear_from_weights(std::vector<double> w, double b,
                                                  double threshold = 0.5) {
  json doc{{"kind", "lr"},
           {"dim", w.size()},
           {"decision_threshold", threshold},
           {"space_hash", ""},
           {"params", {{"weights", w}, {"bias", b}}}};
  return model_from_json(doc);
}

double train_logloss(const TrainedModel& model, const DesignMatrix& m) {
  double loss = 0;
  for (size_t i = 0; i < m.rows.size(); ++i) {
    const double p = std::clamp(model.score(m.rows[i]), 1e-12, 1.0 - 1e-12);
    loss += m.labels[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  return loss / static_cast<double>(m.rows.size());
}

}  // namespace

TEST_CASE("separability oracle and LR fit on the two-feature fixture") {
  auto m = separable_fixture();
  // Oracle: single-feature exhaustive threshold scan proves separability.
  bool separable = false;
  for (uint32_t f = 0; f < 2 && !separable; ++f) {
    std::vector<double> vals;
    for (const auto& r : m.rows) vals.push_back(r.get(f));
    for (double t : vals) {
      int errs_lo = 0, errs_hi = 0;
      for (size_t i = 0; i < vals.size(); ++i) {
        errs_hi += (vals[i] >= t ? 1 : 0) != m.labels[i];
        errs_lo += (vals[i] < t ? 1 : 0) != m.labels[i];
      }
      if (errs_lo == 0 || errs_hi == 0) {
        separable = true;
        break;
      }
    }
  }
  REQUIRE(separable);

  Hyperparams h;
  h.values = {{"penalty", "l2"}, {"strength", 1e-4}, {"epochs", 400}};
  auto lr = train(ModelKind::LR, m, h, 1);
  CHECK(train_f1(*lr, m) >= 0.99);

  h.values["penalty"] = "l1";
  auto lr1 = train(ModelKind::LR, m, h, 1);
  CHECK(train_f1(*lr1, m) >= 0.99);
}

TEST_CASE("gbdt with zero rounds scores the base rate everywhere") {
  Rng rng(7);
  auto m = testutil::random_matrix(50, 4, rng, 1.0);
  double rate = 0;
  for (int y : m.labels) rate += y;
  rate /= static_cast<double>(m.labels.size());

  Hyperparams h;
  h.values = {{"n_rounds", 0}};
  for (auto kind : {ModelKind::LightGBMPreset, ModelKind::HGBPreset, ModelKind::XGBoostPreset}) {
    auto gb = train(kind, m, h, 3);
    for (const auto& row : m.rows) {
      CHECK(gb->score(row) == doctest::Approx(rate).epsilon(1e-9));
    }
  }
}

TEST_CASE("rf with one tree and no subsampling equals the decision tree") {
  Rng rng(13);
  auto m = testutil::random_matrix(80, 5, rng, 1.5);
  Hyperparams hdt;
  hdt.values = {{"max_depth", 4}, {"min_samples_leaf", 2}};
  Hyperparams hrf;
  hrf.values = {{"max_depth", 4},        {"min_samples_leaf", 2}, {"n_trees", 1},
                {"feature_subsample", 1.0}, {"bootstrap", false}};
  auto dt = train(ModelKind::DT, m, hdt, 5);
  auto rf = train(ModelKind::RF, m, hrf, 5);
  for (const auto& row : m.rows) {
    CHECK(dt->score(row) == rf->score(row));
  }
}

TEST_CASE("score interface hand values") {
  // LR with zero weights scores sigmoid(0) = 0.5 everywhere.
  auto zero = linear_from_weights({0.0, 0.0}, 0.0);
  FeatureVector x;
  x.set(0, 3.0);
  CHECK(zero->score(x) == 0.5);

  // Increasing a positive-weight feature strictly increases the score.
  auto inc = linear_from_weights({1.0, 0.0}, 0.0);
  FeatureVector lo, hi;
  lo.set(0, 0.2);
  hi.set(0, 0.9);
  CHECK(inc->score(hi) > inc->score(lo));

  // KNN with k=3 and neighbor labels {1,1,0} scores 2/3.
  DesignMatrix knn_m;
  knn_m.space = testutil::make_space(1);
  for (int i = 0; i < 3; ++i) {
    FeatureVector r;
    r.set(0, static_cast<double>(i));
    knn_m.rows.push_back(std::move(r));
    knn_m.labels.push_back(i < 2 ? 1 : 0);
  }
  Hyperparams kh;
  kh.values = {{"k", 3}};
  auto knn = train(ModelKind::KNN, knn_m, kh, 0);
  FeatureVector q;
  q.set(0, 0.5);
  CHECK(knn->score(q) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("predict_label applies the tie-positive threshold rule") {
  // KNN over 10 identical rows, 7 positive: score is exactly 7/10.
  DesignMatrix m;
  m.space = testutil::make_space(1);
  for (int i = 0; i < 10; ++i) {
    FeatureVector r;
    r.set(0, 1.0);
    m.rows.push_back(std::move(r));
    m.labels.push_back(i < 7 ? 1 : 0);
  }
  Hyperparams h;
  h.values = {{"k", 10}};
  auto knn = train(ModelKind::KNN, m, h, 0);
  FeatureVector q;
  q.set(0, 1.0);
  REQUIRE(knn->score(q) == 0.7);

  knn->decision_threshold = 0.7;
  CHECK(knn->predict_label(q) == 1);  // tie -> positive
  knn->decision_threshold = 0.71;
  CHECK(knn->predict_label(q) == 0);
  knn->decision_threshold = 0.0;
  CHECK(knn->predict_label(q) == 1);
}

TEST_CASE("training rejects single-class data and scoring rejects bad dims") {
  DesignMatrix m;
  m.space = testutil::make_space(2);
  for (int i = 0; i < 10; ++i) {
    FeatureVector x;
    x.set(0, i);
    m.rows.push_back(std::move(x));
    m.labels.push_back(1);
  }
  CHECK_THROWS_AS(train(ModelKind::LR, m, Hyperparams{}, 0), SingleClassError);

  auto lr = linear_from_weights({1.0, 1.0}, 0.0);
  FeatureVector bad;
  bad.set(5, 1.0);
  CHECK_THROWS_AS(lr->score(bad), DimensionError);
}

TEST_CASE("every model kind scores within [0,1] and round-trips through json") {
  Rng rng(99);
  auto m = testutil::random_matrix(60, 6, rng, 1.0, 0.3, 2);
  Hyperparams h;
  h.values = {{"n_rounds", 20}, {"n_trees", 10}, {"n_stumps", 15}, {"epochs", 30}};
  std::vector<FeatureVector> probes;
  for (int i = 0; i < 20; ++i) {
    FeatureVector x;
    for (uint32_t j = 0; j < 6; ++j) {
      if (rng.bernoulli(0.7)) x.set(j, rng.normal(0, 2));
    }
    probes.push_back(std::move(x));
  }
  for (ModelKind kind : kAllModelKinds) {
    CAPTURE(to_string(kind));
    auto model = train(kind, m, h, 11);
    auto doc = model_to_json(*model);
    auto loaded = model_from_json(doc);
    for (const auto& p : probes) {
      const double s = model->score(p);
      CHECK(std::isfinite(s));
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
      CHECK(loaded->score(p) == s);
    }
  }
}

TEST_CASE("training is invariant to the order of training rows") {
  Rng rng(55);
  auto m = testutil::random_matrix(50, 5, rng, 1.2, 0.3, 1);
  auto shuffled = m;
  Rng perm(1);
  std::vector<size_t> order(m.rows.size());
  std::iota(order.begin(), order.end(), 0);
  perm.shuffle(order);
  for (size_t i = 0; i < order.size(); ++i) {
    shuffled.rows[i] = m.rows[order[i]];
    shuffled.labels[i] = m.labels[order[i]];
  }

  std::vector<FeatureVector> probes;
  for (int i = 0; i < 10; ++i) {
    FeatureVector x;
    for (uint32_t j = 0; j < 5; ++j) x.set(j, rng.normal(0, 1));
    probes.push_back(std::move(x));
  }
  Hyperparams h;
  h.values = {{"n_rounds", 10}, {"n_trees", 5}, {"n_stumps", 10}, {"epochs", 10}};
  for (ModelKind kind : kAllModelKinds) {
    CAPTURE(to_string(kind));
    auto a = train(kind, m, h, 21);
    auto b = train(kind, shuffled, h, 21);
    for (const auto& p : probes) CHECK(a->score(p) == b->score(p));
  }
}

TEST_CASE("tree models are invariant under monotone feature transforms") {
  Rng rng(66);
  auto m = testutil::random_matrix(60, 4, rng, 1.5, 0.0);
  // strictly increasing transform on feature 2, applied in train and test
  auto warp = [](double v) { return std::exp(v / 3.0); };
  auto warped = m;
  for (auto& row : warped.rows) {
    for (auto& [c, v] : row.entries) {
      if (c == 2) v = warp(v);
    }
  }
  Hyperparams h;
  h.values = {{"n_rounds", 15}, {"n_trees", 8}, {"max_depth", 4}};
  for (ModelKind kind : {ModelKind::DT, ModelKind::RF, ModelKind::XGBoostPreset,
                         ModelKind::LightGBMPreset, ModelKind::HGBPreset}) {
    CAPTURE(to_string(kind));
    auto base = train(kind, m, h, 17);
    auto transformed = train(kind, warped, h, 17);
    for (size_t i = 0; i < m.rows.size(); ++i) {
      FeatureVector probe = m.rows[i];
      FeatureVector wprobe = probe;
      for (auto& [c, v] : wprobe.entries) {
        if (c == 2) v = warp(v);
      }
      CHECK(base->score(probe) == doctest::Approx(transformed->score(wprobe)).epsilon(1e-12));
    }
  }
}

TEST_CASE("adaboost weight update drives the chosen stump to error one half") {
  Rng rng(14);
  auto m = testutil::random_matrix(60, 4, rng, 1.0, 0.0);
  Hyperparams h;
  h.values = {{"n_stumps", 12}, {"learning_rate", 1.0}};
  auto model = train(ModelKind::AdaBoost, m, h, 3);
  const TreeEnsemble* ens = model->ensemble();
  REQUIRE(ens != nullptr);
  REQUIRE(!ens->trees.empty());

  // Replay the exponential updates from the serialized stumps. The train()
  // canonicalization re-orders rows, but the identity is order-free.
  const size_t n = m.rows.size();
  std::vector<std::vector<double>> dense(n, std::vector<double>(m.dim(), 0.0));
  for (size_t i = 0; i < n; ++i) m.rows[i].densify(dense[i]);

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  for (const auto& stump : ens->trees) {
    const double alpha = std::abs(stump.nodes[1].leaf_value);
    double z = 0;
    std::vector<int> hsign(n);
    for (size_t i = 0; i < n; ++i) {
      hsign[i] = stump.eval(dense[i]) > 0 ? 1 : -1;
      const int y = m.labels[i] ? 1 : -1;
      w[i] *= std::exp(-alpha * y * hsign[i]);
      z += w[i];
    }
    double err = 0;
    for (size_t i = 0; i < n; ++i) {
      w[i] /= z;
      const int y = m.labels[i] ? 1 : -1;
      if (hsign[i] != y) err += w[i];
    }
    CHECK(err == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("gbdt training loss is non-increasing per boosting round") {
  Rng rng(23);
  auto m = testutil::random_matrix(80, 5, rng, 1.0, 0.3);
  for (ModelKind kind : {ModelKind::LightGBMPreset, ModelKind::HGBPreset,
                         ModelKind::XGBoostPreset}) {
    CAPTURE(to_string(kind));
    double prev = std::numeric_limits<double>::infinity();
    for (int rounds = 0; rounds <= 8; ++rounds) {
      Hyperparams h;
      h.values = {{"n_rounds", rounds}, {"learning_rate", 0.2}};
      auto model = train(kind, m, h, 2);
      const double loss = train_logloss(*model, m);
      CHECK(loss <= prev + 1e-9);
      prev = loss;
    }
  }
}

TEST_CASE("random search returns the single candidate and is deterministic") {
  Rng rng(88);
  auto m = testutil::random_matrix(60, 4, rng, 1.5);
  json single = {{"max_depth", {{"choice", {3}}}}, {"min_samples_leaf", {{"choice", {2}}}}};
  auto r = random_search(ModelKind::DT, m, single, 1, 3, 5);
  CHECK(r.best.inum("max_depth", 0) == 3);
  CHECK(r.best.inum("min_samples_leaf", 0) == 2);

  auto a = random_search(ModelKind::DT, m, default_search_space(ModelKind::DT), 6, 3, 5, 2);
  auto b = random_search(ModelKind::DT, m, default_search_space(ModelKind::DT), 6, 3, 5, 1);
  CHECK(a.cv_f1 == b.cv_f1);
  CHECK(a.best.values == b.best.values);
  CHECK(a.trials.size() == 6);
}

TEST_CASE("stratified folds spread both classes") {
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(i < 10 ? 1 : 0);
  auto folds = stratified_folds(labels, 5, 3);
  std::vector<int> pos_per(5, 0), neg_per(5, 0);
  for (size_t i = 0; i < labels.size(); ++i) {
    (labels[i] ? pos_per : neg_per)[folds[i]]++;
  }
  for (int f = 0; f < 5; ++f) {
    CHECK(pos_per[f] == 2);
    CHECK(neg_per[f] == 6);
  }
}

TEST_CASE("svc learns the separable fixture") {
  auto m = separable_fixture();
  Hyperparams h;
  h.values = {{"regularization", 1e-2}, {"epochs", 20}};
  auto svc = train(ModelKind::SVC, m, h, 9);
  CHECK(train_f1(*svc, m) >= 0.95);
}

TEST_CASE("naive bayes separates when distributions differ") {
  Rng rng(101);
  auto m = testutil::random_matrix(100, 4, rng, 2.5, 0.0, 1);
  auto nb = train(ModelKind::NB, m, Hyperparams{}, 0);
  CHECK(train_f1(*nb, m) >= 0.8);
}
