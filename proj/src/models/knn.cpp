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

// Brute-force exact k-nearest-neighbors over the stored training matrix.

#include <algorithm>
#include <cmath>

#include "eocrc/kernels.hpp"
#include "model_impl.hpp"

namespace eocrc::models::detail {

using nlohmann::json;

namespace {

class KnnModel final : public TrainedModel {
 public:
  KnnModel(size_t dim, Csr rows, int k, std::string metric)
      : TrainedModel(ModelKind::KNN, dim), X_(std::move(rows)), k_(k),
        metric_(std::move(metric)) {
    row_sqnorm_.resize(X_.n_rows());
    for (size_t i = 0; i < X_.n_rows(); ++i) {
      auto val = X_.row_val(i);
      double s = 0;
      for (double v : val) s += v * v;
      row_sqnorm_[i] = s;
    }
  }

  double score_dense(std::span<const double> x) const override {
    const size_t n = X_.n_rows();
    const size_t k = std::min<size_t>(static_cast<size_t>(k_), n);
    std::vector<std::pair<double, size_t>> dist(n);
    if (metric_ == "euclidean") {
      double q2 = 0;
      for (double v : x) q2 += v * v;
      for (size_t i = 0; i < n; ++i) {
        const double d2 =
            row_sqnorm_[i] - 2.0 * kernels::sparse_dot(X_.row_idx(i), X_.row_val(i), x) + q2;
        dist[i] = {std::max(0.0, d2), i};
      }
    } else {  // manhattan
      double qabs = 0;
      for (double v : x) qabs += std::abs(v);
      for (size_t i = 0; i < n; ++i) {
        auto idx = X_.row_idx(i);
        auto val = X_.row_val(i);
        double d = qabs;
        for (size_t t = 0; t < idx.size(); ++t) {
          d += std::abs(val[t] - x[idx[t]]) - std::abs(x[idx[t]]);
        }
        dist[i] = {std::max(0.0, d), i};
      }
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    int pos = 0;
    for (size_t t = 0; t < k; ++t) pos += X_.y[dist[t].second];
    return static_cast<double>(pos) / static_cast<double>(k);
  }

  json params_to_json() const override {
    json rows = json::array();
    for (size_t i = 0; i < X_.n_rows(); ++i) {
      json cols = json::array();
      auto idx = X_.row_idx(i);
      auto val = X_.row_val(i);
      for (size_t t = 0; t < idx.size(); ++t) cols.push_back(json::array({idx[t], val[t]}));
      rows.push_back(std::move(cols));
    }
    return json{{"k", k_}, {"metric", metric_}, {"labels", X_.y}, {"rows", std::move(rows)}};
  }

 private:
  Csr X_;
  int k_;
  std::string metric_;
  std::vector<double> row_sqnorm_;
};

}  // namespace

std::unique_ptr<TrainedModel> train_knn(const feat::DesignMatrix& m, const Hyperparams& h,
                                        uint64_t /*seed*/) {
  const int k = h.inum("k", 5);
  if (k < 1) throw ConfigError("KNN k must be >= 1");
  const std::string metric = h.str("metric", "euclidean");
  if (metric != "euclidean" && metric != "manhattan") {
    throw ConfigError("KNN metric must be euclidean or manhattan");
  }
  return std::make_unique<KnnModel>(m.dim(), Csr::from(m), k, metric);
}

std::unique_ptr<TrainedModel> knn_from_json(size_t dim, const json& doc) {
  Csr X;
  X.dim = dim;
  X.y = doc.at("labels").get<std::vector<int>>();
  X.off.push_back(0);
  for (const auto& row : doc.at("rows")) {
    for (const auto& cv : row) {
      X.idx.push_back(cv.at(0).get<uint32_t>());
      X.val.push_back(cv.at(1).get<double>());
    }
    X.off.push_back(X.idx.size());
  }
  return std::make_unique<KnnModel>(dim, std::move(X), doc.at("k").get<int>(),
                                    doc.at("metric").get<std::string>());
}

}  // namespace eocrc::models::detail
