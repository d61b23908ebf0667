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

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eocrc/cohort.hpp"

// Sparse feature representation over windowed events plus demographics.
// The feature space is built from training data only; test matrices are
// aligned onto it by name.

namespace eocrc::feat {

// A patient together with its observation-window events.
struct WindowedPatient {
  const cohort::PatientRecord* patient = nullptr;
  std::vector<cohort::ClinicalEvent> events;
};

WindowedPatient window_patient(const cohort::PatientRecord& p,
                               const cohort::CohortCriteria& criteria);

std::vector<WindowedPatient> window_patients(const std::vector<cohort::PatientRecord>& ps,
                                             const cohort::CohortCriteria& criteria);

struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population stddev, floored at 1e-12 when applied
};

// Ordered feature names. Identity for coded features is (kind, system, code);
// demographic one-hots are named "<field>=<value>".
class FeatureSpace {
 public:
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::string>& displays() const { return displays_; }
  const std::vector<uint8_t>& onehot_mask() const { return onehot_; }
  size_t dim() const { return names_.size(); }

  // Column for a name, or -1.
  int64_t column(const std::string& name) const;
  bool is_onehot(uint32_t col) const { return onehot_[col] != 0; }

  // Hash of the ordered name list; stamped into model documents.
  std::string content_hash() const;

  const FeatureStats* stats() const { return stats_ ? &*stats_ : nullptr; }
  void set_stats(FeatureStats s) { stats_ = std::move(s); }

  void add(std::string name, std::string display, bool onehot);

  nlohmann::json to_json() const;
  static std::shared_ptr<FeatureSpace> from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> names_;
  std::vector<std::string> displays_;
  std::vector<uint8_t> onehot_;
  std::unordered_map<std::string, uint32_t> index_;
  std::optional<FeatureStats> stats_;
};

// Sparse vector; entries sorted by strictly increasing column.
struct FeatureVector {
  std::vector<std::pair<uint32_t, double>> entries;

  void set(uint32_t col, double value);
  double get(uint32_t col) const;
  void densify(std::span<double> out) const;  // out must be zeroed, sized to dim
};

struct DesignMatrix {
  std::vector<FeatureVector> rows;
  std::vector<int> labels;  // 0/1
  std::shared_ptr<const FeatureSpace> space;

  size_t dim() const { return space ? space->dim() : 0; }
  size_t n_rows() const { return rows.size(); }
};

// One column per demographic category seen in training (missing values map to
// "not specified"), per distinct condition / lab / observation code.
// Throws ConfigError on an empty training set.
std::shared_ptr<FeatureSpace> build_feature_space(const std::vector<WindowedPatient>& train);

// Demographic one-hots in {0,1}; condition columns = in-window occurrence
// count; lab/observation columns = mean of in-window values. Codes absent
// from the space are ignored. Valueless lab/observation codes contribute a
// presence marker of 1.0.
FeatureVector featurize(const WindowedPatient& wp, const FeatureSpace& space);

DesignMatrix featurize_all(const std::vector<WindowedPatient>& wps,
                           std::shared_ptr<const FeatureSpace> space);

// Re-expresses a matrix built on its own native space in train_space columns:
// train-only features become zero, test-only features drop out.
DesignMatrix align_to_space(const DesignMatrix& test_matrix,
                            std::shared_ptr<const FeatureSpace> train_space);

// Column means/stddevs over the full matrix (implicit zeros included),
// computed on training data only.
FeatureStats compute_feature_stats(const DesignMatrix& train);

// (x - mean) / stddev with a 1e-12 stddev floor on continuous columns;
// one-hot columns pass through untouched.
DesignMatrix standardize(const DesignMatrix& matrix, const FeatureStats& stats);
FeatureVector standardize_vector(const FeatureVector& x, const FeatureSpace& space,
                                 const FeatureStats& stats);

// --- persistence ------------------------------------------------------------

// Space manifest as JSON; rows as JSON Lines: {"label":0,"cols":[[c,v],...]}.
void save_matrix(const DesignMatrix& m, const std::string& space_path,
                 const std::string& rows_path);
DesignMatrix load_matrix(const std::string& space_path, const std::string& rows_path);

}  // namespace eocrc::feat
