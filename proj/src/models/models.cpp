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

#include "eocrc/models.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "eocrc/evaluate.hpp"
#include "model_impl.hpp"

namespace eocrc::models {

using nlohmann::json;

namespace {

const std::pair<ModelKind, const char*> kKindNames[] = {
    {ModelKind::LR, "lr"},
    {ModelKind::KNN, "knn"},
    {ModelKind::NB, "nb"},
    {ModelKind::SVC, "svc"},
    {ModelKind::DT, "dt"},
    {ModelKind::RF, "rf"},
    {ModelKind::AdaBoost, "adaboost"},
    {ModelKind::LightGBMPreset, "lightgbm"},
    {ModelKind::HGBPreset, "hgb"},
    {ModelKind::XGBoostPreset, "xgboost"},
};

}  // namespace

std::string to_string(ModelKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  for (const auto& [kind, name] : kKindNames) {
    if (s == name) return kind;
  }
  throw ConfigError("unknown model kind: " + s);
}

double Hyperparams::num(const std::string& key, double dflt) const {
  return values.contains(key) ? values.at(key).get<double>() : dflt;
}

int Hyperparams::inum(const std::string& key, int dflt) const {
  if (!values.contains(key)) return dflt;
  const auto& v = values.at(key);
  return v.is_number_integer() ? v.get<int>() : static_cast<int>(v.get<double>());
}

std::string Hyperparams::str(const std::string& key, const std::string& dflt) const {
  return values.contains(key) ? values.at(key).get<std::string>() : dflt;
}

bool Hyperparams::flag(const std::string& key, bool dflt) const {
  return values.contains(key) ? values.at(key).get<bool>() : dflt;
}

double Tree::eval(std::span<const double> x) const {
  int32_t i = 0;
  while (!nodes[i].is_leaf()) {
    i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return nodes[i].leaf_value;
}

double TrainedModel::score(const feat::FeatureVector& x) const {
  thread_local std::vector<double> dense;
  if (dense.size() < dim_) dense.resize(dim_, 0.0);
  for (const auto& [c, v] : x.entries) {
    if (c >= dim_) {
      throw DimensionError("feature column " + std::to_string(c) +
                           " outside trained dimension " + std::to_string(dim_));
    }
    dense[c] = v;
  }
  const double s = score_dense(std::span<const double>(dense.data(), dim_));
  for (const auto& [c, v] : x.entries) dense[c] = 0.0;
  return s;
}

namespace detail {

Csr Csr::from(const feat::DesignMatrix& m) {
  Csr csr;
  csr.dim = m.dim();
  csr.y = m.labels;
  csr.off.reserve(m.rows.size() + 1);
  csr.off.push_back(0);
  size_t nnz = 0;
  for (const auto& r : m.rows) nnz += r.entries.size();
  csr.idx.reserve(nnz);
  csr.val.reserve(nnz);
  for (const auto& r : m.rows) {
    for (const auto& [c, v] : r.entries) {
      csr.idx.push_back(c);
      csr.val.push_back(v);
    }
    csr.off.push_back(csr.idx.size());
  }
  return csr;
}

DenseColumns DenseColumns::from(const feat::DesignMatrix& m) {
  DenseColumns dc;
  dc.n = m.n_rows();
  dc.d = m.dim();
  dc.data.assign(dc.n * dc.d, 0.0);
  for (size_t i = 0; i < m.rows.size(); ++i) {
    for (const auto& [c, v] : m.rows[i].entries) {
      dc.data[static_cast<size_t>(c) * dc.n + i] = v;
    }
  }
  return dc;
}

void require_both_classes(const feat::DesignMatrix& m) {
  if (m.rows.empty()) throw SingleClassError("training matrix is empty");
  int pos = 0, neg = 0;
  for (int y : m.labels) (y ? pos : neg)++;
  if (pos == 0 || neg == 0) {
    throw SingleClassError("training data contains a single class");
  }
}

json ensemble_to_json(const TreeEnsemble& e) {
  json trees = json::array();
  for (const auto& t : e.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      nodes.push_back(json::array(
          {n.feature, n.threshold, n.gain, n.left, n.right, n.leaf_value}));
    }
    trees.push_back(std::move(nodes));
  }
  return json{{"base_score", e.base_score}, {"trees", std::move(trees)}};
}

TreeEnsemble ensemble_from_json(const json& j) {
  TreeEnsemble e;
  e.base_score = j.at("base_score").get<double>();
  for (const auto& tj : j.at("trees")) {
    Tree t;
    for (const auto& nj : tj) {
      TreeNode n;
      n.feature = nj.at(0).get<int32_t>();
      n.threshold = nj.at(1).get<double>();
      n.gain = nj.at(2).get<double>();
      n.left = nj.at(3).get<int32_t>();
      n.right = nj.at(4).get<int32_t>();
      n.leaf_value = nj.at(5).get<double>();
      t.nodes.push_back(n);
    }
    e.trees.push_back(std::move(t));
  }
  return e;
}

}  // namespace detail

namespace {

// Rows are re-sorted before any seeded operation, so training is invariant to
// the incidental order of the input rows. The sort key hashes per-column value
// RANKS rather than raw values: equal ranks imply equal values, and ranks
// survive strictly monotone per-feature transforms, which keeps the seeded
// sampling in RF identical under such transforms.
feat::DesignMatrix canonicalize(const feat::DesignMatrix& m) {
  const size_t d = m.dim();
  std::vector<std::vector<double>> distinct(d);
  for (const auto& row : m.rows) {
    for (const auto& [c, v] : row.entries) distinct[c].push_back(v);
  }
  for (auto& col : distinct) {
    // implicit zeros are values too, but only where the column has them
    if (col.size() < m.rows.size()) col.push_back(0.0);
    std::sort(col.begin(), col.end());
    col.erase(std::unique(col.begin(), col.end()), col.end());
  }
  auto rank_of = [&](uint32_t c, double v) -> uint64_t {
    const auto& col = distinct[c];
    return static_cast<uint64_t>(std::lower_bound(col.begin(), col.end(), v) - col.begin());
  };

  std::vector<std::pair<uint64_t, size_t>> keys(m.rows.size());
  for (size_t i = 0; i < m.rows.size(); ++i) {
    uint64_t h = 1469598103934665603ull;
    for (const auto& [c, v] : m.rows[i].entries) {
      h = splitmix64(h ^ c);
      h = splitmix64(h ^ rank_of(c, v));
    }
    h = splitmix64(h ^ static_cast<uint64_t>(m.labels[i]));
    keys[i] = {h, i};
  }
  std::sort(keys.begin(), keys.end());
  feat::DesignMatrix out;
  out.space = m.space;
  out.rows.reserve(m.rows.size());
  out.labels.reserve(m.labels.size());
  for (const auto& [h, i] : keys) {
    out.rows.push_back(m.rows[i]);
    out.labels.push_back(m.labels[i]);
  }
  return out;
}

}  // namespace

std::unique_ptr<TrainedModel> train(ModelKind kind, const feat::DesignMatrix& matrix,
                                    const Hyperparams& hyper, uint64_t seed) {
  detail::require_both_classes(matrix);
  const feat::DesignMatrix canon = canonicalize(matrix);
  std::unique_ptr<TrainedModel> model;
  switch (kind) {
    case ModelKind::LR: model = detail::train_lr(canon, hyper, seed); break;
    case ModelKind::SVC: model = detail::train_svc(canon, hyper, seed); break;
    case ModelKind::KNN: model = detail::train_knn(canon, hyper, seed); break;
    case ModelKind::NB: model = detail::train_nb(canon, hyper, seed); break;
    case ModelKind::DT: model = detail::train_dt(canon, hyper, seed); break;
    case ModelKind::RF: model = detail::train_rf(canon, hyper, seed); break;
    case ModelKind::AdaBoost: model = detail::train_adaboost(canon, hyper, seed); break;
    case ModelKind::LightGBMPreset:
    case ModelKind::HGBPreset:
    case ModelKind::XGBoostPreset:
      model = detail::train_gbdt(kind, canon, hyper, seed);
      break;
  }
  if (matrix.space) model->space_hash = matrix.space->content_hash();
  return model;
}

bool wants_standardized_features(ModelKind kind) {
  return kind == ModelKind::LR || kind == ModelKind::KNN || kind == ModelKind::SVC;
}

// --- serialization -----------------------------------------------------------

json model_to_json(const TrainedModel& model) {
  return json{{"kind", to_string(model.kind())},
              {"dim", model.dim()},
              {"decision_threshold", model.decision_threshold},
              {"space_hash", model.space_hash},
              {"params", model.params_to_json()}};
}

std::unique_ptr<TrainedModel> model_from_json(const json& doc) {
  const ModelKind kind = model_kind_from_string(doc.at("kind").get<std::string>());
  const size_t dim = doc.at("dim").get<size_t>();
  const auto& params = doc.at("params");
  std::unique_ptr<TrainedModel> model;
  switch (kind) {
    case ModelKind::LR:
    case ModelKind::SVC:
      model = detail::lr_from_json(kind, dim, params);
      break;
    case ModelKind::KNN: model = detail::knn_from_json(dim, params); break;
    case ModelKind::NB: model = detail::nb_from_json(dim, params); break;
    default: model = detail::tree_model_from_json(kind, dim, params); break;
  }
  model->decision_threshold = doc.at("decision_threshold").get<double>();
  model->space_hash = doc.value("space_hash", "");
  return model;
}

void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << model_to_json(model).dump(2) << "\n";
}

std::unique_ptr<TrainedModel> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model document: " + path);
  return model_from_json(json::parse(in));
}

// --- hyperparameter search ----------------------------------------------------

json default_search_space(ModelKind kind) {
  switch (kind) {
    case ModelKind::LR:
      return json{{"penalty", {{"choice", {"l1", "l2"}}}},
                  {"strength", {{"logfloat", {1e-5, 1e-1}}}},
                  {"epochs", {{"choice", {300}}}}};
    case ModelKind::KNN:
      return json{{"k", {{"int", {3, 25}}}},
                  {"metric", {{"choice", {"euclidean", "manhattan"}}}}};
    case ModelKind::NB:
      return json{{"var_smoothing", {{"logfloat", {1e-10, 1e-7}}}}};
    case ModelKind::SVC:
      return json{{"regularization", {{"logfloat", {1e-5, 1e-1}}}},
                  {"epochs", {{"int", {5, 30}}}}};
    case ModelKind::DT:
      return json{{"max_depth", {{"int", {2, 12}}}},
                  {"min_samples_leaf", {{"int", {1, 10}}}}};
    case ModelKind::RF:
      return json{{"n_trees", {{"int", {20, 80}}}},
                  {"max_depth", {{"int", {3, 12}}}},
                  {"min_samples_leaf", {{"int", {1, 10}}}},
                  {"feature_subsample", {{"float", {0.2, 0.9}}}}};
    case ModelKind::AdaBoost:
      return json{{"n_stumps", {{"int", {20, 100}}}},
                  {"learning_rate", {{"logfloat", {0.1, 1.0}}}}};
    case ModelKind::LightGBMPreset:
      return json{{"n_rounds", {{"int", {30, 150}}}},
                  {"learning_rate", {{"logfloat", {0.05, 0.3}}}},
                  {"max_leaves", {{"int", {7, 31}}}},
                  {"n_bins", {{"choice", {64}}}}};
    case ModelKind::HGBPreset:
      return json{{"n_rounds", {{"int", {30, 150}}}},
                  {"learning_rate", {{"logfloat", {0.05, 0.3}}}},
                  {"max_depth", {{"int", {3, 8}}}},
                  {"n_bins", {{"choice", {64}}}}};
    case ModelKind::XGBoostPreset:
      return json{{"n_rounds", {{"int", {30, 150}}}},
                  {"learning_rate", {{"logfloat", {0.05, 0.3}}}},
                  {"max_depth", {{"int", {3, 8}}}},
                  {"l2", {{"logfloat", {0.1, 10.0}}}},
                  {"n_bins", {{"choice", {64}}}}};
  }
  return json::object();
}

Hyperparams sample_hyperparams(const json& space, Rng& rng) {
  Hyperparams h;
  for (auto it = space.begin(); it != space.end(); ++it) {
    const json& spec = it.value();
    if (spec.contains("choice")) {
      const auto& opts = spec.at("choice");
      h.values[it.key()] = opts.at(static_cast<size_t>(
          rng.uniform_int(0, static_cast<int64_t>(opts.size()) - 1)));
    } else if (spec.contains("int")) {
      h.values[it.key()] = static_cast<int>(
          rng.uniform_int(spec["int"].at(0).get<int>(), spec["int"].at(1).get<int>()));
    } else if (spec.contains("float")) {
      h.values[it.key()] =
          rng.uniform(spec["float"].at(0).get<double>(), spec["float"].at(1).get<double>());
    } else if (spec.contains("logfloat")) {
      const double lo = std::log(spec["logfloat"].at(0).get<double>());
      const double hi = std::log(spec["logfloat"].at(1).get<double>());
      h.values[it.key()] = std::exp(rng.uniform(lo, hi));
    } else {
      throw ConfigError("bad search-space spec for parameter: " + it.key());
    }
  }
  return h;
}

std::vector<int> stratified_folds(std::span<const int> labels, int k, uint64_t seed) {
  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  Rng rng(derive_seed(seed, "models.folds"));
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<int> fold(labels.size(), 0);
  for (size_t i = 0; i < pos.size(); ++i) fold[pos[i]] = static_cast<int>(i % k);
  for (size_t i = 0; i < neg.size(); ++i) fold[neg[i]] = static_cast<int>(i % k);
  return fold;
}

namespace {

feat::DesignMatrix subset(const feat::DesignMatrix& m, const std::vector<int>& fold, int held,
                          bool take_held) {
  feat::DesignMatrix out;
  out.space = m.space;
  for (size_t i = 0; i < m.rows.size(); ++i) {
    if ((fold[i] == held) == take_held) {
      out.rows.push_back(m.rows[i]);
      out.labels.push_back(m.labels[i]);
    }
  }
  return out;
}

}  // namespace

SearchResult random_search(ModelKind kind, const feat::DesignMatrix& matrix,
                           const json& search_space, int n_iters, int k_folds, uint64_t seed,
                           int workers) {
  if (n_iters < 1) throw ConfigError("random_search: n_iters must be >= 1");
  if (k_folds < 2) throw ConfigError("random_search: k_folds must be >= 2");
  detail::require_both_classes(matrix);

  Rng sampler(derive_seed(seed, "models.search"));
  std::vector<Hyperparams> candidates;
  candidates.reserve(n_iters);
  for (int i = 0; i < n_iters; ++i) candidates.push_back(sample_hyperparams(search_space, sampler));

  const auto folds = stratified_folds(matrix.labels, k_folds, seed);
  std::vector<double> scores(candidates.size(), 0.0);

  parallel_for(candidates.size(), workers, [&](size_t c) {
    double f1_sum = 0.0;
    for (int f = 0; f < k_folds; ++f) {
      auto tr = subset(matrix, folds, f, false);
      auto va = subset(matrix, folds, f, true);
      auto model = train(kind, tr, candidates[c],
                         derive_seed(seed, "models.search.fold" + std::to_string(f) + "." +
                                               std::to_string(c)));
      std::vector<int> preds(va.rows.size());
      for (size_t i = 0; i < va.rows.size(); ++i) {
        preds[i] = model->score(va.rows[i]) >= 0.5 ? 1 : 0;
      }
      f1_sum += eval::compute_metrics(eval::confusion(va.labels, preds)).f1;
    }
    scores[c] = f1_sum / k_folds;
  });

  size_t best = 0;
  for (size_t c = 1; c < candidates.size(); ++c) {
    if (scores[c] > scores[best]) best = c;  // ties keep the first sampled
  }
  SearchResult result;
  result.best = candidates[best];
  result.cv_f1 = scores[best];
  for (size_t c = 0; c < candidates.size(); ++c) {
    result.trials.emplace_back(candidates[c], scores[c]);
  }
  return result;
}

}  // namespace eocrc::models
