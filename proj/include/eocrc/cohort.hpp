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
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eocrc/core.hpp"

// Patient/event data model, eligibility and observation-window rules, the
// balanced-train / multi-run-test split protocol, and a seeded synthetic
// cohort generator.

namespace eocrc::cohort {

enum class EventKind { Condition, LabResult, Observation };
enum class CodeSystem { ICD10, SNOMEDCT, LOINC };
enum class Gender { Male, Female };
enum class Race { White, Black, Asian, Other, NotSpecified };
enum class Ethnicity { NotHispanic, Hispanic, MexicanOrPuertoRican, NotSpecified };
enum class Label { CRC, NonCRC };

std::string to_string(EventKind k);
std::string to_string(CodeSystem s);
std::string to_string(Gender g);
std::string to_string(Race r);
std::string to_string(Ethnicity e);
std::string to_string(Label l);

struct ClinicalEvent {
  EventKind kind = EventKind::Condition;
  CodeSystem code_system = CodeSystem::ICD10;
  std::string code;
  std::string display;  // human-readable name; the LLM arm serializes names, not codes
  Date date;
  std::optional<double> value;  // labs and observations only
  std::optional<std::string> unit;
};

struct PatientRecord {
  std::string id;
  int age_years = 0;
  Gender gender = Gender::Male;
  Race race = Race::NotSpecified;
  Ethnicity ethnicity = Ethnicity::NotSpecified;
  std::vector<ClinicalEvent> events;  // sorted ascending by date
  Date index_date;                    // diagnosis date for cases, synthetic anchor for controls
  Label label = Label::NonCRC;
};

struct CohortCriteria {
  // (code_system, code) pairs that exclude a patient anywhere in history.
  std::set<std::pair<CodeSystem, std::string>> exclusion_codes;
  int min_history_days = 210;
  int window_start_days_before_index = 210;
  int window_end_days_before_index = 30;

  // CRC history, family history, Crohn's, Lynch, ulcerative colitis.
  static CohortCriteria defaults();
};

struct SplitPlan {
  int train_pos = 0;
  int train_neg = 0;
  int n_test_runs = 10;
  int test_pos_per_run = 0;
  int test_neg_per_run = 0;
  uint64_t seed = 0;

  // 1853/1853 train; 10 runs of 10 + 990.
  static SplitPlan paper_scale(uint64_t seed);
  // 150/150 train; 10 runs of 5 + 495.
  static SplitPlan desk_scale(uint64_t seed);
};

// One concept in the synthetic vocabulary. risk_weight > 0 marks a designated
// signal concept: its occurrence odds for CRC patients are tilted by
// signal_strength through a logistic link, and value_case_shift_sds shifts the
// case value distribution in units of the concept's value stddev.
struct VocabEntry {
  EventKind kind = EventKind::Condition;
  CodeSystem system = CodeSystem::ICD10;
  std::string code;
  std::string display;
  double base_rate = 0.1;  // probability a control patient carries the concept
  double risk_weight = 0.0;
  double value_lo = 0.0;
  double value_hi = 0.0;
  std::string unit;
  double value_case_shift_sds = 0.0;
};

struct SyntheticCohortConfig {
  int n_patients = 0;
  double prevalence = 0.01;
  uint64_t seed = 0;
  double signal_strength = 2.0;
  std::vector<VocabEntry> vocabulary;  // empty -> invalid; use default_vocabulary()

  void validate() const;  // throws ConfigError
};

// Fixture vocabulary seeded from the screening-guideline concept names plus
// neutral primary-care concepts and prenatal events (zero signal).
const std::vector<VocabEntry>& default_vocabulary();

// Display names of concepts with risk_weight > 0, in vocabulary order.
std::vector<std::string> signal_feature_displays(const std::vector<VocabEntry>& vocab);

// Deterministic per (config, seed). Every generated patient satisfies the
// default eligibility rules; exactly round(n_patients * prevalence) carry the
// CRC label.
std::vector<PatientRecord> generate_synthetic_cohort(const SyntheticCohortConfig& config);

// Keeps patients with no exclusion code anywhere in history, age in [18, 44],
// and at least min_history_days of recorded history before the index date.
std::vector<PatientRecord> apply_eligibility(const std::vector<PatientRecord>& patients,
                                             const CohortCriteria& criteria);

// Events with date in [index - window_start, index - window_end); the final
// window_end days before the index are dropped.
std::vector<ClinicalEvent> extract_window(const PatientRecord& patient,
                                          const CohortCriteria& criteria);

struct Splits {
  std::vector<PatientRecord> train;
  std::vector<std::vector<PatientRecord>> test_runs;
};

// Balanced train set + n_test_runs test runs at the plan's prevalence. CRC
// patients are disjoint between train and test runs and across runs. Controls
// are drawn without replacement while the pool allows. Throws SplitError
// naming the deficient label when the population cannot satisfy the plan.
Splits make_splits(const std::vector<PatientRecord>& patients, const SplitPlan& plan);

// --- persistence ------------------------------------------------------------

nlohmann::json patient_to_json(const PatientRecord& p);
PatientRecord patient_from_json(const nlohmann::json& j);

// JSON Lines, one patient per line; metadata (config, seed, counts) goes to
// <path>.meta.json.
void save_cohort(const std::vector<PatientRecord>& patients, const std::string& path,
                 const nlohmann::json& metadata);
std::vector<PatientRecord> load_cohort(const std::string& path);

}  // namespace eocrc::cohort
