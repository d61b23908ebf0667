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

#include "eocrc/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

namespace eocrc::feat {

using cohort::EventKind;
using nlohmann::json;

WindowedPatient window_patient(const cohort::PatientRecord& p,
                               const cohort::CohortCriteria& criteria) {
  return WindowedPatient{&p, cohort::extract_window(p, criteria)};
}

std::vector<WindowedPatient> window_patients(const std::vector<cohort::PatientRecord>& ps,
                                             const cohort::CohortCriteria& criteria) {
  std::vector<WindowedPatient> out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back(window_patient(p, criteria));
  return out;
}

namespace {

std::string kind_prefix(EventKind k) {
  switch (k) {
    case EventKind::Condition: return "cond";
    case EventKind::LabResult: return "lab";
    case EventKind::Observation: return "obs";
  }
  return "?";
}

std::string code_feature_name(const cohort::ClinicalEvent& ev) {
  return kind_prefix(ev.kind) + "|" + cohort::to_string(ev.code_system) + "|" + ev.code;
}

std::vector<std::string> demographic_names(const cohort::PatientRecord& p) {
  return {"age=" + std::to_string(p.age_years), "gender=" + cohort::to_string(p.gender),
          "race=" + cohort::to_string(p.race), "ethnicity=" + cohort::to_string(p.ethnicity)};
}

}  // namespace

int64_t FeatureSpace::column(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : static_cast<int64_t>(it->second);
}

void FeatureSpace::add(std::string name, std::string display, bool onehot) {
  if (index_.count(name)) return;
  index_.emplace(name, static_cast<uint32_t>(names_.size()));
  names_.push_back(std::move(name));
  displays_.push_back(std::move(display));
  onehot_.push_back(onehot ? 1 : 0);
}

std::string FeatureSpace::content_hash() const {
  uint64_t h = 1469598103934665603ull;
  for (const auto& n : names_) {
    h = splitmix64(h ^ fnv1a64(n));
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json FeatureSpace::to_json() const {
  json cols = json::array();
  for (size_t i = 0; i < names_.size(); ++i) {
    cols.push_back(json{{"name", names_[i]}, {"display", displays_[i]},
                        {"onehot", onehot_[i] != 0}});
  }
  json j{{"columns", std::move(cols)}, {"hash", content_hash()}};
  if (stats_) {
    j["stats"] = json{{"mean", stats_->mean}, {"stddev", stats_->stddev}};
  }
  return j;
}

std::shared_ptr<FeatureSpace> FeatureSpace::from_json(const json& j) {
  auto space = std::make_shared<FeatureSpace>();
  for (const auto& c : j.at("columns")) {
    space->add(c.at("name").get<std::string>(), c.at("display").get<std::string>(),
               c.at("onehot").get<bool>());
  }
  if (j.contains("stats")) {
    FeatureStats st;
    st.mean = j["stats"].at("mean").get<std::vector<double>>();
    st.stddev = j["stats"].at("stddev").get<std::vector<double>>();
    space->set_stats(std::move(st));
  }
  return space;
}

void FeatureVector::set(uint32_t col, double value) {
  auto it = std::lower_bound(entries.begin(), entries.end(), col,
                             [](const auto& e, uint32_t c) { return e.first < c; });
  if (it != entries.end() && it->first == col) {
    it->second = value;
  } else {
    entries.insert(it, {col, value});
  }
}

double FeatureVector::get(uint32_t col) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), col,
                             [](const auto& e, uint32_t c) { return e.first < c; });
  return (it != entries.end() && it->first == col) ? it->second : 0.0;
}

void FeatureVector::densify(std::span<double> out) const {
  for (const auto& [c, v] : entries) out[c] = v;
}

std::shared_ptr<FeatureSpace> build_feature_space(const std::vector<WindowedPatient>& train) {
  if (train.empty()) throw ConfigError("cannot build a feature space from an empty training set");
  auto space = std::make_shared<FeatureSpace>();
  // Demographics first, then codes, both in first-seen order.
  for (const auto& wp : train) {
    for (auto& name : demographic_names(*wp.patient)) {
      space->add(name, name, /*onehot=*/true);
    }
  }
  for (const auto& wp : train) {
    for (const auto& ev : wp.events) {
      space->add(code_feature_name(ev), ev.display, /*onehot=*/false);
    }
  }
  return space;
}

FeatureVector featurize(const WindowedPatient& wp, const FeatureSpace& space) {
  // Accumulate by column, then emit in sorted order.
  std::map<uint32_t, double> counts;      // condition occurrence counts
  std::map<uint32_t, std::pair<double, int>> value_acc;  // labs/obs: (sum, n)
  std::map<uint32_t, int> presence;       // valueless labs/obs

  for (auto& name : demographic_names(*wp.patient)) {
    int64_t col = space.column(name);
    if (col >= 0) counts[static_cast<uint32_t>(col)] = 1.0;
  }
  for (const auto& ev : wp.events) {
    int64_t col64 = space.column(code_feature_name(ev));
    if (col64 < 0) continue;  // unseen in training: dropped
    auto col = static_cast<uint32_t>(col64);
    if (ev.kind == EventKind::Condition) {
      counts[col] += 1.0;
    } else if (ev.value) {
      auto& [sum, n] = value_acc[col];
      sum += *ev.value;
      n += 1;
    } else {
      presence[col] = 1;
    }
  }

  FeatureVector x;
  x.entries.reserve(counts.size() + value_acc.size() + presence.size());
  for (auto& [col, v] : counts) x.entries.emplace_back(col, v);
  for (auto& [col, sv] : value_acc) x.entries.emplace_back(col, sv.first / sv.second);
  for (auto& [col, one] : presence) {
    if (!value_acc.count(col)) x.entries.emplace_back(col, 1.0);
  }
  std::sort(x.entries.begin(), x.entries.end());
  return x;
}

DesignMatrix featurize_all(const std::vector<WindowedPatient>& wps,
                           std::shared_ptr<const FeatureSpace> space) {
  DesignMatrix m;
  m.space = std::move(space);
  m.rows.reserve(wps.size());
  m.labels.reserve(wps.size());
  for (const auto& wp : wps) {
    m.rows.push_back(featurize(wp, *m.space));
    m.labels.push_back(wp.patient->label == cohort::Label::CRC ? 1 : 0);
  }
  return m;
}

DesignMatrix align_to_space(const DesignMatrix& test_matrix,
                            std::shared_ptr<const FeatureSpace> train_space) {
  DesignMatrix out;
  out.labels = test_matrix.labels;
  out.space = train_space;
  out.rows.reserve(test_matrix.rows.size());
  const auto& names = test_matrix.space->names();
  // Native column -> train column (or -1).
  std::vector<int64_t> remap(names.size());
  for (size_t c = 0; c < names.size(); ++c) remap[c] = train_space->column(names[c]);

  for (const auto& row : test_matrix.rows) {
    FeatureVector mapped;
    mapped.entries.reserve(row.entries.size());
    for (const auto& [c, v] : row.entries) {
      if (remap[c] >= 0) mapped.entries.emplace_back(static_cast<uint32_t>(remap[c]), v);
    }
    std::sort(mapped.entries.begin(), mapped.entries.end());
    out.rows.push_back(std::move(mapped));
  }
  return out;
}

FeatureStats compute_feature_stats(const DesignMatrix& train) {
  const size_t d = train.dim();
  const double n = static_cast<double>(train.n_rows());
  FeatureStats st;
  st.mean.assign(d, 0.0);
  st.stddev.assign(d, 0.0);
  if (train.n_rows() == 0) return st;
  for (const auto& row : train.rows) {
    for (const auto& [c, v] : row.entries) st.mean[c] += v;
  }
  for (auto& m : st.mean) m /= n;
  std::vector<double> sumsq(d, 0.0);
  for (const auto& row : train.rows) {
    for (const auto& [c, v] : row.entries) sumsq[c] += v * v;
  }
  for (size_t c = 0; c < d; ++c) {
    const double var = sumsq[c] / n - st.mean[c] * st.mean[c];
    st.stddev[c] = std::sqrt(std::max(0.0, var));
  }
  return st;
}

namespace {

double standardize_value(double v, double mean, double sd) {
  return (v - mean) / std::max(sd, 1e-12);
}

}  // namespace

FeatureVector standardize_vector(const FeatureVector& x, const FeatureSpace& space,
                                 const FeatureStats& stats) {
  FeatureVector out;
  const size_t d = space.dim();
  out.entries.reserve(d);
  size_t i = 0;
  for (uint32_t c = 0; c < d; ++c) {
    double v = 0.0;
    if (i < x.entries.size() && x.entries[i].first == c) {
      v = x.entries[i].second;
      ++i;
    }
    if (space.is_onehot(c)) {
      if (v != 0.0) out.entries.emplace_back(c, v);
    } else {
      const double z = standardize_value(v, stats.mean[c], stats.stddev[c]);
      if (z != 0.0) out.entries.emplace_back(c, z);
    }
  }
  return out;
}

DesignMatrix standardize(const DesignMatrix& matrix, const FeatureStats& stats) {
  DesignMatrix out;
  out.labels = matrix.labels;
  out.space = matrix.space;
  out.rows.reserve(matrix.rows.size());
  for (const auto& row : matrix.rows) {
    out.rows.push_back(standardize_vector(row, *matrix.space, stats));
  }
  return out;
}

void save_matrix(const DesignMatrix& m, const std::string& space_path,
                 const std::string& rows_path) {
  {
    std::ofstream out(space_path);
    if (!out) throw IoError("cannot open for writing: " + space_path);
    out << m.space->to_json().dump(2) << "\n";
  }
  std::ofstream out(rows_path);
  if (!out) throw IoError("cannot open for writing: " + rows_path);
  for (size_t i = 0; i < m.rows.size(); ++i) {
    json cols = json::array();
    for (const auto& [c, v] : m.rows[i].entries) cols.push_back(json::array({c, v}));
    out << json{{"label", m.labels[i]}, {"cols", std::move(cols)}}.dump() << "\n";
  }
}

DesignMatrix load_matrix(const std::string& space_path, const std::string& rows_path) {
  std::ifstream sp(space_path);
  if (!sp) throw IoError("cannot open space manifest: " + space_path);
  json sj = json::parse(sp);
  DesignMatrix m;
  m.space = FeatureSpace::from_json(sj);

  std::ifstream in(rows_path);
  if (!in) throw IoError("cannot open matrix rows: " + rows_path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    FeatureVector row;
    for (const auto& cv : j.at("cols")) {
      row.entries.emplace_back(cv.at(0).get<uint32_t>(), cv.at(1).get<double>());
    }
    m.rows.push_back(std::move(row));
    m.labels.push_back(j.at("label").get<int>());
  }
  return m;
}

}  // namespace eocrc::feat
