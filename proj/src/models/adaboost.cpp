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

// Discrete AdaBoost over decision stumps with exponential weight updates.

#include <algorithm>
#include <cmath>

#include "model_impl.hpp"

namespace eocrc::models::detail {

namespace {

struct Stump {
  int feature = -1;
  double threshold = 0;
  int polarity = 1;  // +1: left predicts positive; -1: left predicts negative
  double error = 0.5;
};

// Minimum weighted error over all (feature, boundary, polarity).
Stump best_stump(const DenseColumns& X, std::span<const int> y,
                 const std::vector<double>& w) {
  Stump best;
  const size_t n = X.n;
  double wpos_total = 0;
  for (size_t i = 0; i < n; ++i) {
    if (y[i]) wpos_total += w[i];
  }
  const double wneg_total = 1.0 - wpos_total;

  std::vector<std::pair<double, uint32_t>> vals(n);
  for (size_t f = 0; f < X.d; ++f) {
    auto col = X.col(f);
    for (size_t i = 0; i < n; ++i) vals[i] = {col[i], static_cast<uint32_t>(i)};
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double wpos_left = 0, wneg_left = 0;
    for (size_t i = 0; i + 1 < n; ++i) {
      const uint32_t r = vals[i].second;
      (y[r] ? wpos_left : wneg_left) += w[r];
      if (vals[i].first == vals[i + 1].first) continue;
      // left positive: errs are left negatives plus right positives
      const double err_pos_left = wneg_left + (wpos_total - wpos_left);
      const double err_neg_left = wpos_left + (wneg_total - wneg_left);
      if (err_pos_left < best.error - 1e-15) {
        best = {static_cast<int>(f), vals[i].first, +1, err_pos_left};
      }
      if (err_neg_left < best.error - 1e-15) {
        best = {static_cast<int>(f), vals[i].first, -1, err_neg_left};
      }
    }
  }
  return best;
}

}  // namespace

std::unique_ptr<TrainedModel> train_adaboost(const feat::DesignMatrix& m, const Hyperparams& h,
                                             uint64_t /*seed*/) {
  const int n_stumps = h.inum("n_stumps", 50);
  const double lr = h.num("learning_rate", 1.0);
  if (n_stumps < 1) throw ConfigError("AdaBoost n_stumps must be >= 1");

  const DenseColumns X = DenseColumns::from(m);
  const size_t n = X.n;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));

  TreeEnsemble ens;
  for (int t = 0; t < n_stumps; ++t) {
    const Stump s = best_stump(X, m.labels, w);
    if (s.feature < 0 || s.error >= 0.5) break;  // no weak learner left
    const double eps = std::max(s.error, 1e-12);
    const double alpha = lr * 0.5 * std::log((1.0 - eps) / eps);

    Tree stump;
    stump.nodes.resize(3);
    stump.nodes[0].feature = s.feature;
    stump.nodes[0].threshold = s.threshold;
    stump.nodes[0].gain = 0.5 - s.error;
    stump.nodes[0].left = 1;
    stump.nodes[0].right = 2;
    stump.nodes[1].leaf_value = alpha * s.polarity;
    stump.nodes[2].leaf_value = -alpha * s.polarity;
    ens.trees.push_back(std::move(stump));

    // w_i <- w_i * exp(-alpha * y_i * h_i), renormalized.
    auto col = X.col(static_cast<size_t>(s.feature));
    double z = 0;
    for (size_t i = 0; i < n; ++i) {
      const int hi = (col[i] <= s.threshold ? s.polarity : -s.polarity);
      const int yi = m.labels[i] ? 1 : -1;
      w[i] *= std::exp(-alpha * yi * hi);
      z += w[i];
    }
    for (auto& wi : w) wi /= z;
  }
  return make_adaboost_model(m.dim(), std::move(ens));
}

}  // namespace eocrc::models::detail
