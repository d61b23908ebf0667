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

// Naive Bayes: Bernoulli over one-hot columns, Gaussian over continuous ones.

#include <array>
#include <cmath>

#include "model_impl.hpp"

namespace eocrc::models::detail {

using nlohmann::json;

namespace {

class NaiveBayesModel final : public TrainedModel {
 public:
  NaiveBayesModel(size_t dim, std::vector<uint8_t> onehot, std::array<double, 2> log_prior,
                  std::array<std::vector<double>, 2> mean,
                  std::array<std::vector<double>, 2> var,
                  std::array<std::vector<double>, 2> bern_p)
      : TrainedModel(ModelKind::NB, dim), onehot_(std::move(onehot)),
        log_prior_(log_prior), mean_(std::move(mean)), var_(std::move(var)),
        bern_p_(std::move(bern_p)) {}

  double score_dense(std::span<const double> x) const override {
    double ll[2];
    for (int c = 0; c < 2; ++c) {
      double acc = log_prior_[c];
      for (size_t j = 0; j < dim_; ++j) {
        if (onehot_[j]) {
          const double p = bern_p_[c][j];
          acc += x[j] != 0.0 ? std::log(p) : std::log1p(-p);
        } else {
          const double v = var_[c][j];
          const double d = x[j] - mean_[c][j];
          acc += -0.5 * (std::log(2.0 * M_PI * v) + d * d / v);
        }
      }
      ll[c] = acc;
    }
    const double m = std::max(ll[0], ll[1]);
    const double z0 = std::exp(ll[0] - m);
    const double z1 = std::exp(ll[1] - m);
    return z1 / (z0 + z1);
  }

  json params_to_json() const override {
    return json{{"onehot", onehot_},
                {"log_prior", log_prior_},
                {"mean", mean_},
                {"var", var_},
                {"bern_p", bern_p_}};
  }

 private:
  std::vector<uint8_t> onehot_;
  std::array<double, 2> log_prior_;
  std::array<std::vector<double>, 2> mean_;
  std::array<std::vector<double>, 2> var_;
  std::array<std::vector<double>, 2> bern_p_;
};

}  // namespace

std::unique_ptr<TrainedModel> train_nb(const feat::DesignMatrix& m, const Hyperparams& h,
                                       uint64_t /*seed*/) {
  const double smoothing = h.num("var_smoothing", 1e-9);
  const size_t d = m.dim();
  std::vector<uint8_t> onehot(d, 0);
  if (m.space) {
    onehot = m.space->onehot_mask();
  }

  std::array<size_t, 2> n{0, 0};
  std::array<std::vector<double>, 2> sum, sumsq, ones;
  for (int c = 0; c < 2; ++c) {
    sum[c].assign(d, 0.0);
    sumsq[c].assign(d, 0.0);
    ones[c].assign(d, 0.0);
  }
  for (size_t i = 0; i < m.rows.size(); ++i) {
    const int c = m.labels[i] ? 1 : 0;
    ++n[c];
    for (const auto& [col, v] : m.rows[i].entries) {
      sum[c][col] += v;
      sumsq[c][col] += v * v;
      if (v != 0.0) ones[c][col] += 1.0;
    }
  }

  std::array<double, 2> log_prior;
  std::array<std::vector<double>, 2> mean, var, bern_p;
  const double total = static_cast<double>(m.rows.size());
  for (int c = 0; c < 2; ++c) {
    log_prior[c] = std::log(static_cast<double>(n[c]) / total);
    mean[c].assign(d, 0.0);
    var[c].assign(d, 0.0);
    bern_p[c].assign(d, 0.0);
    const double nc = static_cast<double>(n[c]);
    for (size_t j = 0; j < d; ++j) {
      mean[c][j] = sum[c][j] / nc;
      var[c][j] = std::max(0.0, sumsq[c][j] / nc - mean[c][j] * mean[c][j]) + smoothing;
      bern_p[c][j] = (ones[c][j] + 1.0) / (nc + 2.0);  // Laplace
    }
  }
  return std::make_unique<NaiveBayesModel>(d, std::move(onehot), log_prior, std::move(mean),
                                           std::move(var), std::move(bern_p));
}

std::unique_ptr<TrainedModel> nb_from_json(size_t dim, const json& doc) {
  return std::make_unique<NaiveBayesModel>(
      dim, doc.at("onehot").get<std::vector<uint8_t>>(),
      doc.at("log_prior").get<std::array<double, 2>>(),
      doc.at("mean").get<std::array<std::vector<double>, 2>>(),
      doc.at("var").get<std::array<std::vector<double>, 2>>(),
      doc.at("bern_p").get<std::array<std::vector<double>, 2>>());
}

}  // namespace eocrc::models::detail
