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

#include "eocrc/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <nlohmann/json.hpp>

namespace eocrc::explain {

using nlohmann::json;

ImportanceTable gain_importance(const models::TreeEnsemble& ensemble,
                                const feat::FeatureSpace* space) {
  std::unordered_map<int32_t, std::pair<double, int>> acc;  // feature -> (gain sum, count)
  for (const auto& tree : ensemble.trees) {
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) continue;
      auto& [sum, n] = acc[node.feature];
      sum += node.gain;
      n += 1;
    }
  }
  ImportanceTable table;
  table.reserve(acc.size());
  for (const auto& [f, sn] : acc) {
    ImportanceEntry e;
    if (space != nullptr && static_cast<size_t>(f) < space->dim()) {
      e.feature = space->names()[f];
      e.display = space->displays()[f];
    } else {
      e.feature = "f" + std::to_string(f);
      e.display = e.feature;
    }
    e.importance = sn.first / sn.second;
    table.push_back(std::move(e));
  }
  std::sort(table.begin(), table.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.feature < b.feature;
  });
  return table;
}

BackgroundSet make_background(const feat::DesignMatrix& train, size_t max_rows, uint64_t seed) {
  if (train.rows.empty()) throw ConfigError("background source matrix is empty");
  std::vector<size_t> idx(train.rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, "explain.background"));
  rng.shuffle(idx);
  idx.resize(std::min(max_rows, idx.size()));
  std::sort(idx.begin(), idx.end());
  BackgroundSet bg;
  bg.rows.reserve(idx.size());
  for (size_t i : idx) bg.rows.push_back(train.rows[i]);
  return bg;
}

namespace {

struct DenseSet {
  std::vector<std::vector<double>> rows;
  size_t dim = 0;
};

DenseSet densify_all(const std::vector<feat::FeatureVector>& rows, size_t dim) {
  DenseSet ds;
  ds.dim = dim;
  ds.rows.assign(rows.size(), std::vector<double>(dim, 0.0));
  for (size_t i = 0; i < rows.size(); ++i) rows[i].densify(ds.rows[i]);
  return ds;
}

void check_inputs(const models::TrainedModel& model, const feat::FeatureVector& x,
                  const BackgroundSet& background) {
  if (background.rows.empty()) throw ConfigError("shap: background set is empty");
  for (const auto& [c, v] : x.entries) {
    if (c >= model.dim()) throw DimensionError("shap: x exceeds trained dimension");
  }
  for (const auto& row : background.rows) {
    for (const auto& [c, v] : row.entries) {
      if (c >= model.dim()) throw DimensionError("shap: background exceeds trained dimension");
    }
  }
}

// Shapley subset weights s!(M-1-s)!/M! for s = 0..M-1.
std::vector<double> subset_weights(size_t m) {
  std::vector<double> fact(m + 1, 1.0);
  for (size_t i = 1; i <= m; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
  std::vector<double> w(m);
  for (size_t s = 0; s < m; ++s) w[s] = fact[s] * fact[m - 1 - s] / fact[m];
  return w;
}

ShapExplanation shap_exact(const models::TrainedModel& model, const std::vector<double>& xd,
                           const DenseSet& bg, const std::vector<uint32_t>& active) {
  const size_t m = active.size();
  const size_t n_masks = size_t{1} << m;

  // v[mask] = mean over background of f(x on mask, background elsewhere)
  std::vector<double> v(n_masks, 0.0);
  std::vector<double> composite(xd.size());
  for (const auto& brow : bg.rows) {
    composite = brow;
    for (size_t mask = 0; mask < n_masks; ++mask) {
      for (size_t j = 0; j < m; ++j) {
        composite[active[j]] = (mask >> j) & 1 ? xd[active[j]] : brow[active[j]];
      }
      v[mask] += model.score_dense(composite);
    }
  }
  const double nb = static_cast<double>(bg.rows.size());
  for (auto& val : v) val /= nb;

  const auto w = subset_weights(m);
  ShapExplanation out;
  out.exact = true;
  out.base_value = v[0];
  out.prediction = v[n_masks - 1];
  out.contributions.assign(xd.size(), 0.0);
  for (size_t j = 0; j < m; ++j) {
    const size_t bit = size_t{1} << j;
    double phi = 0;
    for (size_t mask = 0; mask < n_masks; ++mask) {
      if (mask & bit) continue;
      phi += w[std::popcount(mask)] * (v[mask | bit] - v[mask]);
    }
    out.contributions[active[j]] = phi;
  }
  return out;
}

ShapExplanation shap_sampled(const models::TrainedModel& model, const std::vector<double>& xd,
                             const DenseSet& bg, const std::vector<uint32_t>& active,
                             const ShapOptions& opts) {
  const size_t m = active.size();
  const int P = std::max(1, opts.n_permutations);
  const double nb = static_cast<double>(bg.rows.size());

  // Per-permutation contribution vectors, index-addressed for determinism.
  std::vector<std::vector<double>> per_perm(P);
  parallel_for(static_cast<size_t>(P), opts.workers, [&](size_t p) {
    Rng rng(derive_seed(opts.seed, "explain.perm" + std::to_string(p)));
    std::vector<uint32_t> order = active;
    rng.shuffle(order);

    // One composite per background row, walked from all-background to all-x.
    std::vector<std::vector<double>> comps = bg.rows;
    double prev = 0;
    for (const auto& c : comps) prev += model.score_dense(c);
    prev /= nb;

    std::vector<double> contrib(m, 0.0);
    for (uint32_t f : order) {
      double cur = 0;
      for (auto& c : comps) {
        c[f] = xd[f];
        cur += model.score_dense(c);
      }
      cur /= nb;
      const size_t slot = std::lower_bound(active.begin(), active.end(), f) - active.begin();
      contrib[slot] = cur - prev;
      prev = cur;
    }
    per_perm[p] = std::move(contrib);
  });

  ShapExplanation out;
  out.exact = false;
  out.contributions.assign(xd.size(), 0.0);
  out.std_error.assign(xd.size(), 0.0);
  for (size_t j = 0; j < m; ++j) {
    double sum = 0, sumsq = 0;
    for (int p = 0; p < P; ++p) {
      sum += per_perm[p][j];
      sumsq += per_perm[p][j] * per_perm[p][j];
    }
    const double mean = sum / P;
    out.contributions[active[j]] = mean;
    if (P > 1) {
      const double var = std::max(0.0, (sumsq - P * mean * mean) / (P - 1));
      out.std_error[active[j]] = std::sqrt(var / P);
    }
  }

  double base = 0;
  for (const auto& brow : bg.rows) base += model.score_dense(brow);
  out.base_value = base / nb;
  out.prediction = model.score_dense(xd);
  // Per-permutation telescoping sums to prediction - base; preserve it
  // exactly against float accumulation drift.
  double total = 0;
  for (size_t j = 0; j < m; ++j) total += out.contributions[active[j]];
  const double residual = (out.prediction - out.base_value) - total;
  if (m > 0 && std::abs(residual) > 0) {
    // spread the (tiny) residual over active features
    const double bump = residual / static_cast<double>(m);
    for (uint32_t f : active) out.contributions[f] += bump;
  }
  return out;
}

}  // namespace

ShapExplanation shap_values(const models::TrainedModel& model, const feat::FeatureVector& x,
                            const BackgroundSet& background, const ShapOptions& opts) {
  check_inputs(model, x, background);
  const size_t dim = model.dim();
  std::vector<double> xd(dim, 0.0);
  x.densify(xd);
  DenseSet bg = densify_all(background.rows, dim);

  // Features identical to every background value are null players.
  std::vector<uint32_t> active;
  for (uint32_t f = 0; f < dim; ++f) {
    for (const auto& brow : bg.rows) {
      if (brow[f] != xd[f]) {
        active.push_back(f);
        break;
      }
    }
  }

  if (active.size() <= opts.max_exact_features) {
    return shap_exact(model, xd, bg, active);
  }
  return shap_sampled(model, xd, bg, active, opts);
}

std::vector<double> brute_force_shapley(const models::TrainedModel& model,
                                        const feat::FeatureVector& x,
                                        const BackgroundSet& background) {
  check_inputs(model, x, background);
  const size_t m = model.dim();
  if (m > 12) throw ConfigError("brute_force_shapley: feature count over the 2^M bound (12)");
  if (background.rows.size() > 64) {
    throw ConfigError("brute_force_shapley: background over 64 rows");
  }
  std::vector<double> xd(m, 0.0);
  x.densify(xd);
  DenseSet bg = densify_all(background.rows, m);

  // v(S) computed fresh per call, the dumb way.
  auto value_of = [&](size_t mask) {
    double acc = 0;
    std::vector<double> composite(m);
    for (const auto& brow : bg.rows) {
      for (size_t j = 0; j < m; ++j) {
        composite[j] = (mask >> j) & 1 ? xd[j] : brow[j];
      }
      acc += model.score_dense(composite);
    }
    return acc / static_cast<double>(bg.rows.size());
  };

  const auto w = subset_weights(m);
  std::vector<double> phi(m, 0.0);
  const size_t n_masks = size_t{1} << m;
  for (size_t j = 0; j < m; ++j) {
    const size_t bit = size_t{1} << j;
    for (size_t mask = 0; mask < n_masks; ++mask) {
      if (mask & bit) continue;
      phi[j] += w[std::popcount(mask)] * (value_of(mask | bit) - value_of(mask));
    }
  }
  return phi;
}

std::vector<WaterfallRow> export_waterfall(const ShapExplanation& explanation,
                                           const feat::FeatureSpace* space, int top_k) {
  std::vector<size_t> nonzero;
  for (size_t f = 0; f < explanation.contributions.size(); ++f) {
    if (explanation.contributions[f] != 0.0) nonzero.push_back(f);
  }
  std::sort(nonzero.begin(), nonzero.end(), [&](size_t a, size_t b) {
    const double ca = std::abs(explanation.contributions[a]);
    const double cb = std::abs(explanation.contributions[b]);
    if (ca != cb) return ca > cb;
    return a < b;
  });

  const size_t keep = std::min<size_t>(std::max(top_k, 0), nonzero.size());
  std::vector<WaterfallRow> rows;
  double cumulative = 0;
  for (size_t i = 0; i < keep; ++i) {
    const size_t f = nonzero[i];
    WaterfallRow r;
    r.feature = space != nullptr && f < space->dim() ? space->displays()[f]
                                                     : "f" + std::to_string(f);
    r.contribution = explanation.contributions[f];
    cumulative += r.contribution;
    r.cumulative = cumulative;
    rows.push_back(std::move(r));
  }
  double rest = 0;
  for (size_t i = keep; i < nonzero.size(); ++i) rest += explanation.contributions[nonzero[i]];
  if (keep < nonzero.size() || rows.empty()) {
    cumulative += rest;
    rows.push_back({"other features", rest, cumulative});
  }
  return rows;
}

json importance_to_json(const ImportanceTable& table) {
  json out = json::array();
  for (const auto& e : table) {
    out.push_back(json{{"feature", e.feature}, {"display", e.display},
                       {"importance", e.importance}});
  }
  return out;
}

std::string importance_to_csv(const ImportanceTable& table) {
  std::string csv = "feature,display,importance\n";
  char buf[64];
  for (const auto& e : table) {
    std::snprintf(buf, sizeof(buf), ",%.10g\n", e.importance);
    std::string display = e.display;
    std::replace(display.begin(), display.end(), ',', ';');
    csv += e.feature + "," + display + buf;
  }
  return csv;
}

json waterfall_to_json(const ShapExplanation& e, const std::vector<WaterfallRow>& rows) {
  json jrows = json::array();
  for (const auto& r : rows) {
    jrows.push_back(json{{"feature", r.feature}, {"contribution", r.contribution},
                         {"cumulative", r.cumulative}});
  }
  return json{{"base_value", e.base_value},
              {"prediction", e.prediction},
              {"exact", e.exact},
              {"rows", std::move(jrows)}};
}

std::string waterfall_to_csv(const std::vector<WaterfallRow>& rows) {
  std::string csv = "feature,contribution,cumulative\n";
  char buf[80];
  for (const auto& r : rows) {
    std::string feature = r.feature;
    std::replace(feature.begin(), feature.end(), ',', ';');
    std::snprintf(buf, sizeof(buf), ",%.10g,%.10g\n", r.contribution, r.cumulative);
    csv += feature + buf;
  }
  return csv;
}

}  // namespace eocrc::explain
