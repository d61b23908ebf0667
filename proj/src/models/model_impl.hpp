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

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "eocrc/models.hpp"

// Internal surface shared by the per-kind training/serialization units.

namespace eocrc::models::detail {

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Compressed sparse rows over a DesignMatrix, the layout the kernels consume.
struct Csr {
  std::vector<uint32_t> idx;
  std::vector<double> val;
  std::vector<size_t> off;  // n+1 offsets
  std::vector<int> y;       // 0/1 labels
  size_t dim = 0;

  static Csr from(const feat::DesignMatrix& m);

  size_t n_rows() const { return off.size() - 1; }
  std::span<const uint32_t> row_idx(size_t i) const {
    return {idx.data() + off[i], off[i + 1] - off[i]};
  }
  std::span<const double> row_val(size_t i) const {
    return {val.data() + off[i], off[i + 1] - off[i]};
  }
};

// Column-major dense copy; used by the exact CART split search at desk scale.
struct DenseColumns {
  std::vector<double> data;  // d columns of n rows
  size_t n = 0, d = 0;

  static DenseColumns from(const feat::DesignMatrix& m);
  std::span<const double> col(size_t c) const { return {data.data() + c * n, n}; }
};

void require_both_classes(const feat::DesignMatrix& m);

// Per-kind trainers.
std::unique_ptr<TrainedModel> train_lr(const feat::DesignMatrix& m, const Hyperparams& h,
                                       uint64_t seed);
std::unique_ptr<TrainedModel> train_svc(const feat::DesignMatrix& m, const Hyperparams& h,
                                        uint64_t seed);
std::unique_ptr<TrainedModel> train_knn(const feat::DesignMatrix& m, const Hyperparams& h,
                                        uint64_t seed);
std::unique_ptr<TrainedModel> train_nb(const feat::DesignMatrix& m, const Hyperparams& h,
                                       uint64_t seed);
std::unique_ptr<TrainedModel> train_dt(const feat::DesignMatrix& m, const Hyperparams& h,
                                       uint64_t seed);
std::unique_ptr<TrainedModel> train_rf(const feat::DesignMatrix& m, const Hyperparams& h,
                                       uint64_t seed);
std::unique_ptr<TrainedModel> train_adaboost(const feat::DesignMatrix& m, const Hyperparams& h,
                                             uint64_t seed);
std::unique_ptr<TrainedModel> train_gbdt(ModelKind preset, const feat::DesignMatrix& m,
                                         const Hyperparams& h, uint64_t seed);

// Per-kind deserializers; `doc` is the "params" object.
std::unique_ptr<TrainedModel> lr_from_json(ModelKind kind, size_t dim,
                                           const nlohmann::json& doc);
std::unique_ptr<TrainedModel> knn_from_json(size_t dim, const nlohmann::json& doc);
std::unique_ptr<TrainedModel> nb_from_json(size_t dim, const nlohmann::json& doc);
std::unique_ptr<TrainedModel> tree_model_from_json(ModelKind kind, size_t dim,
                                                   const nlohmann::json& doc);

nlohmann::json ensemble_to_json(const TreeEnsemble& e);
TreeEnsemble ensemble_from_json(const nlohmann::json& j);

// Wrapper factories defined alongside the tree model classes.
std::unique_ptr<TrainedModel> make_adaboost_model(size_t dim, TreeEnsemble ens);
std::unique_ptr<TrainedModel> make_gbdt_model(ModelKind kind, size_t dim, TreeEnsemble ens);

}  // namespace eocrc::models::detail
