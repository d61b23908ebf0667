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

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eocrc/models.hpp"

// Gain-based feature importance for tree ensembles and interventional SHAP
// attributions of predict_score, with a subset-enumeration oracle.

namespace eocrc::explain {

struct ImportanceEntry {
  std::string feature;
  std::string display;
  double importance = 0;
};

using ImportanceTable = std::vector<ImportanceEntry>;

// importance(feature) = mean recorded gain over nodes splitting on it;
// features never split are omitted. Sorted descending.
ImportanceTable gain_importance(const models::TreeEnsemble& ensemble,
                                const feat::FeatureSpace* space = nullptr);

// Reference rows drawn from training data; the interventional expectation
// baseline.
struct BackgroundSet {
  std::vector<feat::FeatureVector> rows;
};

BackgroundSet make_background(const feat::DesignMatrix& train, size_t max_rows, uint64_t seed);

struct ShapOptions {
  size_t max_exact_features = 12;  // exact subset enumeration up to this many active features
  int n_permutations = 200;        // sampling mode
  uint64_t seed = 0;
  int workers = 1;
};

struct ShapExplanation {
  double base_value = 0;              // E[f(background)]
  double prediction = 0;              // f(x)
  std::vector<double> contributions;  // dense, one per feature column
  std::vector<double> std_error;      // per feature, sampling mode only
  bool exact = false;
};

// Interventional Shapley values of predict_score: exact over the active
// feature set when small enough, else a seeded permutation estimate. In both
// modes base_value + sum(contributions) telescopes to prediction.
// Throws DimensionError on mismatched inputs, ConfigError on an empty
// background.
ShapExplanation shap_values(const models::TrainedModel& model, const feat::FeatureVector& x,
                            const BackgroundSet& background, const ShapOptions& opts = {});

// Test oracle: exact Shapley by direct subset enumeration over ALL model
// features, no shared machinery with shap_values. Feature count must be
// <= 12 and background <= 64 rows.
std::vector<double> brute_force_shapley(const models::TrainedModel& model,
                                        const feat::FeatureVector& x,
                                        const BackgroundSet& background);

struct WaterfallRow {
  std::string feature;
  double contribution = 0;
  double cumulative = 0;
};

// Rows sorted by |contribution| descending, truncated to top_k with the
// remainder folded into an "other features" row; cumulative ends at
// prediction - base_value.
std::vector<WaterfallRow> export_waterfall(const ShapExplanation& explanation,
                                           const feat::FeatureSpace* space, int top_k);

nlohmann::json importance_to_json(const ImportanceTable& table);
std::string importance_to_csv(const ImportanceTable& table);
nlohmann::json waterfall_to_json(const ShapExplanation& e, const std::vector<WaterfallRow>& rows);
std::string waterfall_to_csv(const std::vector<WaterfallRow>& rows);

}  // namespace eocrc::explain
