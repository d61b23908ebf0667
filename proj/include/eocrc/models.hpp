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

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eocrc/features.hpp"

// The ten classifier kinds behind one score interface, plus random-search
// hyperparameter optimization with stratified k-fold CV.

namespace eocrc::models {

enum class ModelKind {
  LR,
  KNN,
  NB,
  SVC,
  DT,
  RF,
  AdaBoost,
  LightGBMPreset,
  HGBPreset,
  XGBoostPreset,
};

constexpr ModelKind kAllModelKinds[] = {
    ModelKind::LR,       ModelKind::KNN,           ModelKind::NB,
    ModelKind::SVC,      ModelKind::DT,            ModelKind::RF,
    ModelKind::AdaBoost, ModelKind::LightGBMPreset, ModelKind::HGBPreset,
    ModelKind::XGBoostPreset};

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);  // throws ConfigError

// Kind-specific name -> value map carried as JSON. Missing keys fall back to
// the kind's documented defaults.
struct Hyperparams {
  nlohmann::json values = nlohmann::json::object();

  double num(const std::string& key, double dflt) const;
  int inum(const std::string& key, int dflt) const;
  std::string str(const std::string& key, const std::string& dflt) const;
  bool flag(const std::string& key, bool dflt) const;
};

// Binary trees with per-split gain recorded at fit time (consumed by the
// explainability module). Internal nodes route x[feature] <= threshold left.
struct TreeNode {
  int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0;
  double gain = 0;
  int32_t left = -1;
  int32_t right = -1;
  double leaf_value = 0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double eval(std::span<const double> x) const;
};

struct TreeEnsemble {
  std::vector<Tree> trees;
  double base_score = 0;
};

class TrainedModel {
 public:
  virtual ~TrainedModel() = default;

  ModelKind kind() const { return kind_; }
  size_t dim() const { return dim_; }

  double decision_threshold = 0.5;  // default until calibrated
  std::string space_hash;           // feature-space manifest hash

  // Probability-like score in [0, 1]. Throws DimensionError when x refers to
  // columns outside the trained dimension.
  double score(const feat::FeatureVector& x) const;
  virtual double score_dense(std::span<const double> x) const = 0;

  // label = 1 iff score >= decision_threshold (ties positive).
  int predict_label(const feat::FeatureVector& x) const {
    return score(x) >= decision_threshold ? 1 : 0;
  }

  // Non-null for tree-based models.
  virtual const TreeEnsemble* ensemble() const { return nullptr; }

  virtual nlohmann::json params_to_json() const = 0;

 protected:
  TrainedModel(ModelKind k, size_t dim) : kind_(k), dim_(dim) {}
  ModelKind kind_;
  size_t dim_;
};

// Throws SingleClassError when the matrix lacks a class, ConfigError on bad
// hyperparameters. Deterministic for a fixed seed.
std::unique_ptr<TrainedModel> train(ModelKind kind, const feat::DesignMatrix& matrix,
                                    const Hyperparams& hyper, uint64_t seed);

// --- serialization -----------------------------------------------------------

nlohmann::json model_to_json(const TrainedModel& model);
std::unique_ptr<TrainedModel> model_from_json(const nlohmann::json& doc);

void save_model(const TrainedModel& model, const std::string& path);
std::unique_ptr<TrainedModel> load_model(const std::string& path);

// --- hyperparameter search ----------------------------------------------------

// Search-space document: {"param": {"choice": [...]}} |
// {"param": {"int": [lo, hi]}} | {"param": {"float": [lo, hi]}} |
// {"param": {"logfloat": [lo, hi]}}. The paper never publishes its grids;
// these defaults are declared in the config reference.
nlohmann::json default_search_space(ModelKind kind);

Hyperparams sample_hyperparams(const nlohmann::json& space, Rng& rng);

struct SearchResult {
  Hyperparams best;
  double cv_f1 = 0;
  std::vector<std::pair<Hyperparams, double>> trials;  // in sample order
};

// Samples n_iters candidates uniformly; scores each by mean F1 over stratified
// k folds at threshold 0.5; returns the argmax (ties -> first sampled).
SearchResult random_search(ModelKind kind, const feat::DesignMatrix& matrix,
                           const nlohmann::json& search_space, int n_iters, int k_folds,
                           uint64_t seed, int workers = 1);

// Stratified fold ids (0..k-1) per row, seeded.
std::vector<int> stratified_folds(std::span<const int> labels, int k, uint64_t seed);

// Models like KNN/SVC/LR consume standardized features; trees and NB take raw.
bool wants_standardized_features(ModelKind kind);

}  // namespace eocrc::models
