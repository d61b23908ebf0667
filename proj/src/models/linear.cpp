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

// Logistic regression (proximal full-batch gradient with backtracking) and a
// linear SVC (Pegasos-style hinge-loss subgradient descent).

#include <algorithm>
#include <cmath>

#include "eocrc/kernels.hpp"
#include "model_impl.hpp"

namespace eocrc::models::detail {

using nlohmann::json;

namespace {

class LinearModel final : public TrainedModel {
 public:
  LinearModel(ModelKind kind, std::vector<double> w, double b)
      : TrainedModel(kind, w.size()), w_(std::move(w)), b_(b) {}

  double score_dense(std::span<const double> x) const override {
    return sigmoid(kernels::dot(w_, x) + b_);
  }

  json params_to_json() const override { return json{{"weights", w_}, {"bias", b_}}; }

 private:
  std::vector<double> w_;
  double b_;
};

// Stable binary cross-entropy: log(1 + e^z) - t*z.
double ce_loss(double z, int t) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - t * z;
}

struct SmoothEval {
  double loss;               // data term (+ l2 term when applicable)
  std::vector<double> grad;  // d(data)/dw (+ l2)
  double grad_b;
};

SmoothEval eval_smooth(const Csr& X, const std::vector<double>& w, double b, double l2) {
  const double n = static_cast<double>(X.n_rows());
  SmoothEval ev;
  ev.loss = 0;
  ev.grad.assign(w.size(), 0.0);
  ev.grad_b = 0;
  for (size_t i = 0; i < X.n_rows(); ++i) {
    const double z = kernels::sparse_dot(X.row_idx(i), X.row_val(i), w) + b;
    ev.loss += ce_loss(z, X.y[i]);
    const double coef = (sigmoid(z) - X.y[i]) / n;
    auto idx = X.row_idx(i);
    auto val = X.row_val(i);
    for (size_t k = 0; k < idx.size(); ++k) ev.grad[idx[k]] += coef * val[k];
    ev.grad_b += coef;
  }
  ev.loss /= n;
  if (l2 > 0) {
    double wss = 0;
    for (size_t j = 0; j < w.size(); ++j) {
      ev.grad[j] += l2 * w[j];
      wss += w[j] * w[j];
    }
    ev.loss += 0.5 * l2 * wss;
  }
  return ev;
}

double smooth_loss_only(const Csr& X, const std::vector<double>& w, double b, double l2) {
  const double n = static_cast<double>(X.n_rows());
  double loss = 0;
  for (size_t i = 0; i < X.n_rows(); ++i) {
    const double z = kernels::sparse_dot(X.row_idx(i), X.row_val(i), w) + b;
    loss += ce_loss(z, X.y[i]);
  }
  loss /= n;
  if (l2 > 0) {
    loss += 0.5 * l2 * kernels::dot(w, w);
  }
  return loss;
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

std::unique_ptr<TrainedModel> train_lr(const feat::DesignMatrix& m, const Hyperparams& h,
                                       uint64_t /*seed*/) {
  const Csr X = Csr::from(m);
  const std::string penalty = h.str("penalty", "l2");
  if (penalty != "l1" && penalty != "l2") throw ConfigError("LR penalty must be l1 or l2");
  const double lambda = h.num("strength", 1e-4);
  const int epochs = h.inum("epochs", 300);
  const bool l1 = penalty == "l1";
  const double l2 = l1 ? 0.0 : lambda;

  std::vector<double> w(X.dim, 0.0);
  double b = 0.0;
  double step = 1.0;

  for (int it = 0; it < epochs; ++it) {
    const SmoothEval ev = eval_smooth(X, w, b, l2);
    // Backtracking on the quadratic upper bound of the smooth part.
    for (;;) {
      std::vector<double> w_new(w.size());
      for (size_t j = 0; j < w.size(); ++j) {
        const double u = w[j] - step * ev.grad[j];
        w_new[j] = l1 ? soft_threshold(u, step * lambda) : u;
      }
      const double b_new = b - step * ev.grad_b;
      const double f_new = smooth_loss_only(X, w_new, b_new, l2);
      double dot_gd = (b_new - b) * ev.grad_b;
      double dd = (b_new - b) * (b_new - b);
      for (size_t j = 0; j < w.size(); ++j) {
        const double d = w_new[j] - w[j];
        dot_gd += d * ev.grad[j];
        dd += d * d;
      }
      if (f_new <= ev.loss + dot_gd + dd / (2 * step) + 1e-15 || step < 1e-12) {
        w = std::move(w_new);
        b = b_new;
        break;
      }
      step *= 0.5;
    }
    step *= 1.25;  // recover step size between iterations
  }
  return std::make_unique<LinearModel>(ModelKind::LR, std::move(w), b);
}

std::unique_ptr<TrainedModel> train_svc(const feat::DesignMatrix& m, const Hyperparams& h,
                                        uint64_t seed) {
  const Csr X = Csr::from(m);
  const double lambda = std::max(h.num("regularization", 1e-3), 1e-9);
  const int epochs = h.inum("epochs", 10);

  std::vector<double> w(X.dim, 0.0);
  double b = 0.0;
  Rng rng(derive_seed(seed, "svc.shuffle"));
  std::vector<size_t> order(X.n_rows());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  size_t t = 0;
  for (int ep = 0; ep < epochs; ++ep) {
    rng.shuffle(order);
    for (size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double y = X.y[i] ? 1.0 : -1.0;
      const double margin = y * (kernels::sparse_dot(X.row_idx(i), X.row_val(i), w) + b);
      const double shrink = 1.0 - eta * lambda;
      for (auto& wj : w) wj *= shrink;
      if (margin < 1.0) {
        auto idx = X.row_idx(i);
        auto val = X.row_val(i);
        for (size_t k = 0; k < idx.size(); ++k) w[idx[k]] += eta * y * val[k];
        b += eta * y;  // bias unregularized
      }
      // project onto the ||w|| <= 1/sqrt(lambda) ball
      const double norm = std::sqrt(kernels::dot(w, w));
      const double cap = 1.0 / std::sqrt(lambda);
      if (norm > cap) {
        const double scale = cap / norm;
        for (auto& wj : w) wj *= scale;
      }
    }
  }
  return std::make_unique<LinearModel>(ModelKind::SVC, std::move(w), b);
}

std::unique_ptr<TrainedModel> lr_from_json(ModelKind kind, size_t dim, const json& doc) {
  auto w = doc.at("weights").get<std::vector<double>>();
  if (w.size() != dim) throw ConfigError("linear model weight size mismatch");
  return std::make_unique<LinearModel>(kind, std::move(w), doc.at("bias").get<double>());
}

}  // namespace eocrc::models::detail
