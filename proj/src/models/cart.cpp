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

// CART trees with Gini impurity: the decision tree, the random forest, and
// the bagging/feature-subsampling glue. Split thresholds sit on data values
// (x <= v goes left), which keeps predictions invariant under strictly
// monotone feature transforms.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "model_impl.hpp"

namespace eocrc::models::detail {

using nlohmann::json;

namespace {

struct CartConfig {
  int max_depth = 6;
  int min_samples_leaf = 1;
  double feature_subsample = 1.0;  // fraction of features drawn per split
};

double gini_weighted(double n, double pos) {
  if (n <= 0) return 0.0;
  const double p = pos / n;
  return n * 2.0 * p * (1.0 - p);
}

struct SplitChoice {
  double gain = 0;
  int feature = -1;
  double threshold = 0;
};

SplitChoice best_split(const DenseColumns& X, std::span<const int> y,
                       const std::vector<uint32_t>& rows, const CartConfig& cfg, Rng* rng) {
  const size_t d = X.d;
  std::vector<uint32_t> features(d);
  std::iota(features.begin(), features.end(), 0);
  if (cfg.feature_subsample < 1.0 && rng != nullptr) {
    const size_t take = std::max<size_t>(1, static_cast<size_t>(std::lround(
                                                cfg.feature_subsample * static_cast<double>(d))));
    rng->shuffle(features);
    features.resize(take);
    std::sort(features.begin(), features.end());
  }

  const double n = static_cast<double>(rows.size());
  double pos = 0;
  for (uint32_t r : rows) pos += y[r];
  const double parent = gini_weighted(n, pos);

  SplitChoice best;
  std::vector<std::pair<double, int>> vals;
  vals.reserve(rows.size());
  for (uint32_t f : features) {
    auto col = X.col(f);
    vals.clear();
    for (uint32_t r : rows) vals.emplace_back(col[r], y[r]);
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double nl = 0, posl = 0;
    for (size_t i = 0; i + 1 < vals.size(); ++i) {
      nl += 1;
      posl += vals[i].second;
      if (vals[i].first == vals[i + 1].first) continue;  // split only between distinct values
      const double nr = n - nl;
      if (nl < cfg.min_samples_leaf || nr < cfg.min_samples_leaf) continue;
      const double gain = parent - gini_weighted(nl, posl) - gini_weighted(nr, pos - posl);
      if (gain > best.gain + 1e-12) {
        best.gain = gain;
        best.feature = static_cast<int>(f);
        best.threshold = vals[i].first;  // left group's max value
      }
    }
  }
  return best;
}

int build_node(Tree& tree, const DenseColumns& X, std::span<const int> y,
               std::vector<uint32_t> rows, int depth, const CartConfig& cfg, Rng* rng) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();

  double pos = 0;
  for (uint32_t r : rows) pos += y[r];
  const double frac = rows.empty() ? 0.0 : pos / static_cast<double>(rows.size());

  auto make_leaf = [&]() {
    tree.nodes[id].feature = -1;
    tree.nodes[id].leaf_value = frac;
    return id;
  };

  if (depth >= cfg.max_depth || rows.size() < 2 * static_cast<size_t>(cfg.min_samples_leaf) ||
      pos == 0 || pos == static_cast<double>(rows.size())) {
    return make_leaf();
  }
  const SplitChoice split = best_split(X, y, rows, cfg, rng);
  if (split.feature < 0) return make_leaf();

  std::vector<uint32_t> left, right;
  auto col = X.col(static_cast<size_t>(split.feature));
  for (uint32_t r : rows) {
    (col[r] <= split.threshold ? left : right).push_back(r);
  }
  rows.clear();
  rows.shrink_to_fit();

  tree.nodes[id].feature = split.feature;
  tree.nodes[id].threshold = split.threshold;
  tree.nodes[id].gain = split.gain;
  const int l = build_node(tree, X, y, std::move(left), depth + 1, cfg, rng);
  const int r = build_node(tree, X, y, std::move(right), depth + 1, cfg, rng);
  tree.nodes[id].left = l;
  tree.nodes[id].right = r;
  return id;
}

Tree build_cart(const DenseColumns& X, std::span<const int> y, std::vector<uint32_t> rows,
                const CartConfig& cfg, Rng* rng) {
  Tree tree;
  build_node(tree, X, y, std::move(rows), 0, cfg, rng);
  return tree;
}

// DT and RF: trees hold class-probability leaves; the score is their mean.
class ProbTreeModel final : public TrainedModel {
 public:
  ProbTreeModel(ModelKind kind, size_t dim, TreeEnsemble ens)
      : TrainedModel(kind, dim), ens_(std::move(ens)) {}

  double score_dense(std::span<const double> x) const override {
    double acc = 0;
    for (const auto& t : ens_.trees) acc += t.eval(x);
    return acc / static_cast<double>(ens_.trees.size());
  }

  const TreeEnsemble* ensemble() const override { return &ens_; }
  json params_to_json() const override { return ensemble_to_json(ens_); }

 private:
  TreeEnsemble ens_;
};

// AdaBoost: leaves hold alpha * h; score squashes the additive margin.
class AdaBoostStumpModel final : public TrainedModel {
 public:
  AdaBoostStumpModel(size_t dim, TreeEnsemble ens)
      : TrainedModel(ModelKind::AdaBoost, dim), ens_(std::move(ens)) {}

  double score_dense(std::span<const double> x) const override {
    double f = 0;
    for (const auto& t : ens_.trees) f += t.eval(x);
    return sigmoid(2.0 * f);
  }

  const TreeEnsemble* ensemble() const override { return &ens_; }
  json params_to_json() const override { return ensemble_to_json(ens_); }

 private:
  TreeEnsemble ens_;
};

// GBDT: raw leaf sums on top of a log-odds base score.
class GbdtModel final : public TrainedModel {
 public:
  GbdtModel(ModelKind kind, size_t dim, TreeEnsemble ens)
      : TrainedModel(kind, dim), ens_(std::move(ens)) {}

  double score_dense(std::span<const double> x) const override {
    double f = ens_.base_score;
    for (const auto& t : ens_.trees) f += t.eval(x);
    return sigmoid(f);
  }

  const TreeEnsemble* ensemble() const override { return &ens_; }
  json params_to_json() const override { return ensemble_to_json(ens_); }

 private:
  TreeEnsemble ens_;
};

}  // namespace

std::unique_ptr<TrainedModel> train_dt(const feat::DesignMatrix& m, const Hyperparams& h,
                                       uint64_t /*seed*/) {
  CartConfig cfg;
  cfg.max_depth = h.inum("max_depth", 6);
  cfg.min_samples_leaf = h.inum("min_samples_leaf", 1);
  const DenseColumns X = DenseColumns::from(m);
  std::vector<uint32_t> rows(X.n);
  std::iota(rows.begin(), rows.end(), 0);
  TreeEnsemble ens;
  ens.trees.push_back(build_cart(X, m.labels, std::move(rows), cfg, nullptr));
  return std::make_unique<ProbTreeModel>(ModelKind::DT, m.dim(), std::move(ens));
}

std::unique_ptr<TrainedModel> train_rf(const feat::DesignMatrix& m, const Hyperparams& h,
                                       uint64_t seed) {
  CartConfig cfg;
  cfg.max_depth = h.inum("max_depth", 8);
  cfg.min_samples_leaf = h.inum("min_samples_leaf", 1);
  cfg.feature_subsample = h.num("feature_subsample", 1.0);
  const bool bootstrap = h.flag("bootstrap", true);
  const int n_trees = h.inum("n_trees", 50);
  if (n_trees < 1) throw ConfigError("RF n_trees must be >= 1");

  const DenseColumns X = DenseColumns::from(m);
  TreeEnsemble ens;
  for (int t = 0; t < n_trees; ++t) {
    Rng rng(derive_seed(seed, "rf.tree" + std::to_string(t)));
    std::vector<uint32_t> rows(X.n);
    if (bootstrap) {
      for (auto& r : rows) {
        r = static_cast<uint32_t>(rng.uniform_int(0, static_cast<int64_t>(X.n) - 1));
      }
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    Rng* split_rng = cfg.feature_subsample < 1.0 ? &rng : nullptr;
    ens.trees.push_back(build_cart(X, m.labels, std::move(rows), cfg, split_rng));
  }
  return std::make_unique<ProbTreeModel>(ModelKind::RF, m.dim(), std::move(ens));
}

std::unique_ptr<TrainedModel> tree_model_from_json(ModelKind kind, size_t dim,
                                                   const json& doc) {
  TreeEnsemble ens = ensemble_from_json(doc);
  switch (kind) {
    case ModelKind::DT:
    case ModelKind::RF:
      return std::make_unique<ProbTreeModel>(kind, dim, std::move(ens));
    case ModelKind::AdaBoost:
      return std::make_unique<AdaBoostStumpModel>(dim, std::move(ens));
    case ModelKind::LightGBMPreset:
    case ModelKind::HGBPreset:
    case ModelKind::XGBoostPreset:
      return std::make_unique<GbdtModel>(kind, dim, std::move(ens));
    default:
      throw ConfigError("not a tree model kind");
  }
}

std::unique_ptr<TrainedModel> make_adaboost_model(size_t dim, TreeEnsemble ens) {
  return std::make_unique<AdaBoostStumpModel>(dim, std::move(ens));
}

std::unique_ptr<TrainedModel> make_gbdt_model(ModelKind kind, size_t dim, TreeEnsemble ens) {
  return std::make_unique<GbdtModel>(kind, dim, std::move(ens));
}

}  // namespace eocrc::models::detail
