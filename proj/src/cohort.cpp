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

#include "eocrc/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace eocrc::cohort {

using nlohmann::json;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

template <typename E>
E enum_from_string(const std::string& s, const std::vector<std::pair<E, const char*>>& table,
                   const char* what) {
  for (const auto& [e, name] : table) {
    if (s == name) return e;
  }
  throw ConfigError(std::string("unknown ") + what + ": " + s);
}

const std::vector<std::pair<EventKind, const char*>> kEventKindNames = {
    {EventKind::Condition, "Condition"},
    {EventKind::LabResult, "LabResult"},
    {EventKind::Observation, "Observation"}};
const std::vector<std::pair<CodeSystem, const char*>> kCodeSystemNames = {
    {CodeSystem::ICD10, "ICD10"},
    {CodeSystem::SNOMEDCT, "SNOMEDCT"},
    {CodeSystem::LOINC, "LOINC"}};
const std::vector<std::pair<Gender, const char*>> kGenderNames = {
    {Gender::Male, "Male"}, {Gender::Female, "Female"}};
const std::vector<std::pair<Race, const char*>> kRaceNames = {
    {Race::White, "White"},
    {Race::Black, "Black"},
    {Race::Asian, "Asian"},
    {Race::Other, "Other"},
    {Race::NotSpecified, "NotSpecified"}};
const std::vector<std::pair<Ethnicity, const char*>> kEthnicityNames = {
    {Ethnicity::NotHispanic, "NotHispanic"},
    {Ethnicity::Hispanic, "Hispanic"},
    {Ethnicity::MexicanOrPuertoRican, "MexicanOrPuertoRican"},
    {Ethnicity::NotSpecified, "NotSpecified"}};
const std::vector<std::pair<Label, const char*>> kLabelNames = {{Label::CRC, "CRC"},
                                                                {Label::NonCRC, "NonCRC"}};

template <typename E>
std::string enum_to_string(E e, const std::vector<std::pair<E, const char*>>& table) {
  for (const auto& [v, name] : table) {
    if (v == e) return name;
  }
  return "?";
}

}  // namespace

std::string to_string(EventKind k) { return enum_to_string(k, kEventKindNames); }
std::string to_string(CodeSystem s) { return enum_to_string(s, kCodeSystemNames); }
std::string to_string(Gender g) { return enum_to_string(g, kGenderNames); }
std::string to_string(Race r) { return enum_to_string(r, kRaceNames); }
std::string to_string(Ethnicity e) { return enum_to_string(e, kEthnicityNames); }
std::string to_string(Label l) { return enum_to_string(l, kLabelNames); }

CohortCriteria CohortCriteria::defaults() {
  CohortCriteria c;
  c.exclusion_codes = {
      {CodeSystem::ICD10, "C18.9"},        // malignant neoplasm of colon
      {CodeSystem::ICD10, "C19"},          // malignant neoplasm of rectosigmoid junction
      {CodeSystem::ICD10, "C20"},          // malignant neoplasm of rectum
      {CodeSystem::ICD10, "Z85.038"},      // personal history of colon cancer
      {CodeSystem::ICD10, "Z85.048"},      // personal history of rectal cancer
      {CodeSystem::ICD10, "Z80.0"},        // family history of digestive-organ cancer
      {CodeSystem::ICD10, "K50.90"},       // Crohn's disease
      {CodeSystem::ICD10, "K51.90"},       // ulcerative colitis
      {CodeSystem::SNOMEDCT, "716318002"}  // Lynch syndrome
  };
  return c;
}

SplitPlan SplitPlan::paper_scale(uint64_t seed) {
  return SplitPlan{1853, 1853, 10, 10, 990, seed};
}

SplitPlan SplitPlan::desk_scale(uint64_t seed) {
  return SplitPlan{150, 150, 10, 5, 495, seed};
}

void SyntheticCohortConfig::validate() const {
  if (n_patients <= 0) throw ConfigError("n_patients must be positive");
  if (!(prevalence > 0.0 && prevalence < 1.0))
    throw ConfigError("prevalence must lie in (0, 1)");
  if (vocabulary.empty()) throw ConfigError("vocabulary must be non-empty");
  if (signal_strength < 0) throw ConfigError("signal_strength must be nonnegative");
}

namespace {

VocabEntry concept_entry(EventKind kind, CodeSystem sys, const char* code, const char* display,
                         double base_rate, double risk_weight, double lo = 0, double hi = 0,
                         const char* unit = "", double shift = 0) {
  VocabEntry v;
  v.kind = kind;
  v.system = sys;
  v.code = code;
  v.display = display;
  v.base_rate = base_rate;
  v.risk_weight = risk_weight;
  v.value_lo = lo;
  v.value_hi = hi;
  v.unit = unit;
  v.value_case_shift_sds = shift;
  return v;
}

}  // namespace

const std::vector<VocabEntry>& default_vocabulary() {
  using EK = EventKind;
  using CS = CodeSystem;
  auto C = [](CodeSystem sys, const char* code, const char* display, double base, double w) {
    return concept_entry(EK::Condition, sys, code, display, base, w);
  };
  auto L = [](const char* code, const char* display, double base, double w, double lo,
              double hi, const char* unit, double shift) {
    return concept_entry(EK::LabResult, CS::LOINC, code, display, base, w, lo, hi, unit, shift);
  };
  auto O = [](CodeSystem sys, const char* code, const char* display, double base, double w,
              double lo = 0, double hi = 0, const char* unit = "", double shift = 0) {
    return concept_entry(EK::Observation, sys, code, display, base, w, lo, hi, unit, shift);
  };
  static const std::vector<VocabEntry> vocab = {
      // Designated risk conditions (guideline high-risk list).
      C(CS::SNOMEDCT, "405729008", "Fresh blood passed per rectum", 0.030, 1.2),
      C(CS::ICD10, "K62.5", "Hemorrhage of rectum and anus", 0.025, 1.2),
      C(CS::SNOMEDCT, "12063002", "Rectal hemorrhage", 0.030, 1.2),
      C(CS::ICD10, "K92.1", "Melena", 0.020, 1.2),
      C(CS::ICD10, "K52.9", "Colitis", 0.030, 0.8),
      C(CS::ICD10, "K64.9", "Hemorrhoids", 0.060, 0.6),
      C(CS::SNOMEDCT, "88111009", "Altered bowel function", 0.040, 0.9),
      C(CS::SNOMEDCT, "236069009", "Chronic constipation", 0.050, 0.7),
      C(CS::ICD10, "R10.9", "Abdominal pain", 0.100, 0.6),
      C(CS::ICD10, "K62.89", "Rectal pain", 0.030, 0.8),
      C(CS::ICD10, "K92.2", "Gastrointestinal hemorrhage", 0.015, 1.2),
      C(CS::ICD10, "R59.0", "Localized enlarged lymph nodes", 0.020, 0.7),
      C(CS::ICD10, "R19.00", "Intra-abdominal and pelvic swelling, mass and lump", 0.015, 0.9),
      C(CS::SNOMEDCT, "203082005", "Pain due to neoplastic disease", 0.005, 1.2),
      C(CS::SNOMEDCT, "363346000", "Malignant neoplastic disease", 0.004, 1.2),
      C(CS::SNOMEDCT, "312850006", "History of disorder of digestive system", 0.050, 0.7),
      C(CS::ICD10, "B20", "Human immunodeficiency virus infection", 0.010, 0.5),
      // Designated risk labs (value ranges; case shift in stddev units).
      L("33914-3", "Glomerular filtration rate/1.73 sq M.predicted", 0.30, 0.4, 60, 130,
        "mL/min", -0.6),
      L("2028-9", "Carbon dioxide, total", 0.35, 0.3, 20, 30, "mmol/L", -0.5),
      L("2085-9", "Cholesterol in HDL", 0.25, 0.3, 30, 80, "mg/dL", -0.4),
      L("788-0", "Erythrocyte distribution width", 0.30, 0.5, 11.5, 15.5, "%", 1.6),
      L("2075-0", "Chloride", 0.35, 0.3, 96, 107, "mmol/L", 0.4),
      L("5905-5", "Monocytes/100 leukocytes", 0.25, 0.3, 2, 11, "%", 0.5),
      L("2823-3", "Potassium", 0.40, 0.3, 3.5, 5.2, "mmol/L", 0.3),
      L("6768-6", "Alkaline phosphatase", 0.25, 0.5, 40, 130, "U/L", 1.0),
      L("5902-2", "Prothrombin time (PT)", 0.10, 0.5, 9.5, 13.5, "s", 0.6),
      L("33037-3", "Anion gap", 0.30, 0.3, 6, 16, "mmol/L", 0.4),
      L("718-7", "Hemoglobin", 0.45, 0.6, 11.5, 16.5, "g/dL", -1.6),
      // Designated risk observations.
      O(CS::SNOMEDCT, "161832001", "Significant weight change", 0.040, 0.9),
      O(CS::LOINC, "38208-5", "Pain severity - 0-10 verbal numeric rating Score - Reported",
        0.25, 0.5, 0, 10, "", 1.5),
      // Neutral primary-care conditions.
      C(CS::ICD10, "J02.9", "Acute pharyngitis", 0.12, 0.0),
      C(CS::ICD10, "J06.9", "Acute upper respiratory infection", 0.18, 0.0),
      C(CS::ICD10, "M54.5", "Low back pain", 0.15, 0.0),
      C(CS::ICD10, "G43.909", "Migraine", 0.08, 0.0),
      C(CS::ICD10, "L70.0", "Acne vulgaris", 0.06, 0.0),
      C(CS::ICD10, "F41.1", "Generalized anxiety disorder", 0.10, 0.0),
      C(CS::ICD10, "J30.2", "Seasonal allergic rhinitis", 0.10, 0.0),
      C(CS::ICD10, "S93.401", "Sprain of ankle", 0.04, 0.0),
      C(CS::ICD10, "K21.9", "Gastro-esophageal reflux disease", 0.09, 0.0),
      C(CS::ICD10, "N39.0", "Urinary tract infection", 0.08, 0.0),
      C(CS::ICD10, "J45.909", "Asthma", 0.07, 0.0),
      C(CS::ICD10, "L30.9", "Atopic dermatitis", 0.05, 0.0),
      C(CS::ICD10, "G47.00", "Insomnia", 0.06, 0.0),
      C(CS::ICD10, "F32.9", "Major depressive disorder", 0.08, 0.0),
      C(CS::ICD10, "E55.9", "Vitamin D deficiency", 0.09, 0.0),
      // Prenatal events; zero generative signal.
      C(CS::ICD10, "Z34.01", "Supervision of normal first pregnancy", 0.05, 0.0),
      C(CS::ICD10, "Z36.89", "Encounter for antenatal screening", 0.04, 0.0),
      O(CS::LOINC, "55283-6", "Fetal heart rate", 0.04, 0.0, 110, 160, "/min", 0.0),
      // Neutral labs.
      L("2345-7", "Glucose", 0.40, 0.0, 70, 110, "mg/dL", 0.0),
      L("2160-0", "Creatinine", 0.38, 0.0, 0.6, 1.3, "mg/dL", 0.0),
      L("2951-2", "Sodium", 0.35, 0.0, 135, 145, "mmol/L", 0.0),
      L("1742-6", "Alanine aminotransferase", 0.25, 0.0, 10, 45, "U/L", 0.0),
      L("1920-8", "Aspartate aminotransferase", 0.25, 0.0, 10, 40, "U/L", 0.0),
      L("6690-2", "Leukocytes", 0.40, 0.0, 4, 11, "10*3/uL", 0.0),
      L("777-3", "Platelets", 0.35, 0.0, 150, 400, "10*3/uL", 0.0),
      L("3016-3", "Thyrotropin", 0.15, 0.0, 0.4, 4.5, "mIU/L", 0.0),
      // Neutral observations.
      O(CS::LOINC, "29463-7", "Body weight", 0.90, 0.0, 50, 110, "kg", 0.0),
      O(CS::LOINC, "39156-5", "Body mass index", 0.60, 0.0, 18, 38, "kg/m2", 0.0),
      O(CS::LOINC, "8867-4", "Heart rate", 0.55, 0.0, 55, 100, "/min", 0.0),
      O(CS::LOINC, "8480-6", "Systolic blood pressure", 0.55, 0.0, 95, 140, "mmHg", 0.0),
      O(CS::LOINC, "9279-1", "Respiratory rate", 0.30, 0.0, 12, 20, "/min", 0.0),
  };
  return vocab;
}

std::vector<std::string> signal_feature_displays(const std::vector<VocabEntry>& vocab) {
  std::vector<std::string> out;
  for (const auto& v : vocab) {
    if (v.risk_weight > 0) out.push_back(v.display);
  }
  return out;
}

namespace {

constexpr int kHistoryAnchorMinDays = 210;  // default min_history_days
constexpr int kWindowStartDays = 210;
constexpr int kWindowEndDays = 30;

double round2(double v) { return std::round(v * 100.0) / 100.0; }

// Fraction of CRC cases that present with coded prodrome; the rest look like
// controls, which keeps the case-score distribution left-skewed the way a
// screening cohort behaves.
constexpr double kExpressiveCaseFraction = 0.92;
constexpr double kExpressiveTiltBoost = 2.0;

PatientRecord generate_patient(const SyntheticCohortConfig& cfg, size_t index, Label label,
                               Rng& rng) {
  PatientRecord p;
  char idbuf[24];
  std::snprintf(idbuf, sizeof(idbuf), "P%06zu", index);
  p.id = idbuf;
  p.label = label;
  p.age_years = static_cast<int>(rng.uniform_int(18, 44));
  p.gender = rng.bernoulli(0.60) ? Gender::Female : Gender::Male;

  const double r = rng.uniform01();
  if (r < 0.615) p.race = Race::White;
  else if (r < 0.780) p.race = Race::Black;
  else if (r < 0.834) p.race = Race::Asian;
  else if (r < 0.930) p.race = Race::Other;
  else p.race = Race::NotSpecified;

  const double e = rng.uniform01();
  if (e < 0.795) p.ethnicity = Ethnicity::NotHispanic;
  else if (e < 0.975) p.ethnicity = Ethnicity::Hispanic;
  else if (e < 0.990) p.ethnicity = Ethnicity::MexicanOrPuertoRican;
  else p.ethnicity = Ethnicity::NotSpecified;

  p.index_date = Date::from_ymd(2024, 6, 15) + static_cast<int>(rng.uniform_int(-120, 120));

  const bool expressive = label == Label::CRC && rng.bernoulli(kExpressiveCaseFraction);
  const double tilt = expressive ? cfg.signal_strength * kExpressiveTiltBoost : 0.0;

  auto add_event = [&](const VocabEntry& v, int days_before_index) {
    ClinicalEvent ev;
    ev.kind = v.kind;
    ev.code_system = v.system;
    ev.code = v.code;
    ev.display = v.display;
    ev.date = p.index_date - days_before_index;
    if (v.kind != EventKind::Condition && v.value_hi > v.value_lo) {
      const double mid = 0.5 * (v.value_lo + v.value_hi);
      const double sd = (v.value_hi - v.value_lo) / 6.0;
      double mean = mid + v.value_case_shift_sds * sd * (tilt / 2.0);
      double val = rng.normal(mean, sd);
      val = std::clamp(val, std::max(0.0, v.value_lo - 3 * sd), v.value_hi + 3 * sd);
      ev.value = round2(val);
      if (!v.unit.empty()) ev.unit = v.unit;
    }
    p.events.push_back(std::move(ev));
  };

  // Anchor observation guarantees >= 210 days of recorded history.
  {
    VocabEntry anchor = concept_entry(EventKind::Observation, CodeSystem::LOINC, "29463-7",
                                      "Body weight", 1.0, 0.0, 50, 110, "kg", 0.0);
    add_event(anchor, static_cast<int>(rng.uniform_int(kHistoryAnchorMinDays,
                                                       kHistoryAnchorMinDays + 150)));
  }

  for (const auto& v : cfg.vocabulary) {
    double prob = v.base_rate;
    if (tilt > 0 && v.risk_weight > 0) {
      prob = sigmoid(logit(v.base_rate) + tilt * v.risk_weight);
    }
    if (!rng.bernoulli(prob)) continue;
    const double occ_lambda = v.kind == EventKind::Condition ? 0.5
                              : v.kind == EventKind::LabResult ? 0.7
                                                               : 0.3;
    const int n_occ = 1 + rng.poisson(occ_lambda);
    for (int k = 0; k < n_occ; ++k) {
      int offset;
      if (v.risk_weight > 0) {
        // Signal concepts land inside the observation window.
        offset = static_cast<int>(rng.uniform_int(kWindowEndDays + 1, kWindowStartDays));
      } else {
        offset = static_cast<int>(rng.uniform_int(0, 380));
      }
      add_event(v, offset);
    }
  }

  std::stable_sort(p.events.begin(), p.events.end(),
                   [](const ClinicalEvent& a, const ClinicalEvent& b) { return a.date < b.date; });
  return p;
}

}  // namespace

std::vector<PatientRecord> generate_synthetic_cohort(const SyntheticCohortConfig& config) {
  config.validate();
  const int n_pos = static_cast<int>(std::lround(config.n_patients * config.prevalence));

  Rng master(derive_seed(config.seed, "cohort.generate"));
  std::vector<Label> labels(static_cast<size_t>(config.n_patients), Label::NonCRC);
  std::fill(labels.begin(), labels.begin() + n_pos, Label::CRC);
  master.shuffle(labels);

  std::vector<PatientRecord> patients;
  patients.reserve(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    Rng prng(splitmix64(derive_seed(config.seed, "cohort.patient") + i));
    patients.push_back(generate_patient(config, i, labels[i], prng));
  }
  return patients;
}

std::vector<PatientRecord> apply_eligibility(const std::vector<PatientRecord>& patients,
                                             const CohortCriteria& criteria) {
  std::vector<PatientRecord> out;
  out.reserve(patients.size());
  for (const auto& p : patients) {
    if (p.age_years < 18 || p.age_years > 44) continue;
    if (p.events.empty()) continue;
    if (p.index_date - p.events.front().date < criteria.min_history_days) continue;
    bool excluded = false;
    for (const auto& ev : p.events) {
      if (criteria.exclusion_codes.count({ev.code_system, ev.code})) {
        excluded = true;
        break;
      }
    }
    if (!excluded) out.push_back(p);
  }
  return out;
}

std::vector<ClinicalEvent> extract_window(const PatientRecord& patient,
                                          const CohortCriteria& criteria) {
  const Date lo = patient.index_date - criteria.window_start_days_before_index;
  const Date hi = patient.index_date - criteria.window_end_days_before_index;
  std::vector<ClinicalEvent> out;
  for (const auto& ev : patient.events) {
    if (ev.date >= lo && ev.date < hi) out.push_back(ev);
  }
  return out;
}

Splits make_splits(const std::vector<PatientRecord>& patients, const SplitPlan& plan) {
  std::vector<size_t> pos_idx, neg_idx;
  for (size_t i = 0; i < patients.size(); ++i) {
    (patients[i].label == Label::CRC ? pos_idx : neg_idx).push_back(i);
  }

  const size_t need_pos =
      static_cast<size_t>(plan.train_pos) +
      static_cast<size_t>(plan.n_test_runs) * static_cast<size_t>(plan.test_pos_per_run);
  if (pos_idx.size() < need_pos) {
    throw SplitError("insufficient CRC patients: need " + std::to_string(need_pos) + ", have " +
                     std::to_string(pos_idx.size()));
  }
  const size_t min_neg =
      static_cast<size_t>(plan.train_neg) + static_cast<size_t>(plan.test_neg_per_run);
  if (neg_idx.size() < min_neg) {
    throw SplitError("insufficient NonCRC patients: need at least " + std::to_string(min_neg) +
                     ", have " + std::to_string(neg_idx.size()));
  }

  Rng rng(derive_seed(plan.seed, "cohort.splits"));
  rng.shuffle(pos_idx);
  rng.shuffle(neg_idx);

  Splits s;
  for (int i = 0; i < plan.train_pos; ++i) s.train.push_back(patients[pos_idx[i]]);
  for (int i = 0; i < plan.train_neg; ++i) s.train.push_back(patients[neg_idx[i]]);

  // Controls: draw without replacement across runs while the pool lasts, then
  // refill from all non-train controls (never repeating within a run).
  std::vector<size_t> pool(neg_idx.begin() + plan.train_neg, neg_idx.end());
  size_t cursor = 0;
  size_t pos_cursor = static_cast<size_t>(plan.train_pos);

  for (int r = 0; r < plan.n_test_runs; ++r) {
    std::vector<PatientRecord> run;
    std::unordered_set<size_t> in_run;
    for (int i = 0; i < plan.test_pos_per_run; ++i) {
      run.push_back(patients[pos_idx[pos_cursor++]]);
    }
    int need = plan.test_neg_per_run;
    while (need > 0) {
      if (cursor == pool.size()) {
        pool.clear();
        for (size_t j = static_cast<size_t>(plan.train_neg); j < neg_idx.size(); ++j) {
          if (!in_run.count(neg_idx[j])) pool.push_back(neg_idx[j]);
        }
        rng.shuffle(pool);
        cursor = 0;
        if (pool.empty()) throw SplitError("insufficient NonCRC patients to fill test run");
      }
      const size_t idx = pool[cursor++];
      if (in_run.count(idx)) continue;
      in_run.insert(idx);
      run.push_back(patients[idx]);
      --need;
    }
    s.test_runs.push_back(std::move(run));
  }
  return s;
}

// --- persistence -------------------------------------------------------------

json patient_to_json(const PatientRecord& p) {
  json events = json::array();
  for (const auto& ev : p.events) {
    json e = {{"kind", to_string(ev.kind)},
              {"code_system", to_string(ev.code_system)},
              {"code", ev.code},
              {"display", ev.display},
              {"date", ev.date.to_string()}};
    if (ev.value) e["value"] = *ev.value;
    if (ev.unit) e["unit"] = *ev.unit;
    events.push_back(std::move(e));
  }
  return json{{"id", p.id},
              {"age_years", p.age_years},
              {"gender", to_string(p.gender)},
              {"race", to_string(p.race)},
              {"ethnicity", to_string(p.ethnicity)},
              {"index_date", p.index_date.to_string()},
              {"label", to_string(p.label)},
              {"events", std::move(events)}};
}

PatientRecord patient_from_json(const json& j) {
  PatientRecord p;
  p.id = j.at("id").get<std::string>();
  p.age_years = j.at("age_years").get<int>();
  p.gender = enum_from_string<Gender>(j.at("gender"), kGenderNames, "gender");
  p.race = enum_from_string<Race>(j.at("race"), kRaceNames, "race");
  p.ethnicity = enum_from_string<Ethnicity>(j.at("ethnicity"), kEthnicityNames, "ethnicity");
  auto idx = Date::parse(j.at("index_date").get<std::string>());
  if (!idx) throw ConfigError("bad index_date: " + j.at("index_date").get<std::string>());
  p.index_date = *idx;
  p.label = enum_from_string<Label>(j.at("label"), kLabelNames, "label");
  for (const auto& e : j.at("events")) {
    ClinicalEvent ev;
    ev.kind = enum_from_string<EventKind>(e.at("kind"), kEventKindNames, "event kind");
    ev.code_system =
        enum_from_string<CodeSystem>(e.at("code_system"), kCodeSystemNames, "code system");
    ev.code = e.at("code").get<std::string>();
    ev.display = e.at("display").get<std::string>();
    auto d = Date::parse(e.at("date").get<std::string>());
    if (!d) throw ConfigError("bad event date: " + e.at("date").get<std::string>());
    ev.date = *d;
    if (e.contains("value")) ev.value = e.at("value").get<double>();
    if (e.contains("unit")) ev.unit = e.at("unit").get<std::string>();
    p.events.push_back(std::move(ev));
  }
  return p;
}

void save_cohort(const std::vector<PatientRecord>& patients, const std::string& path,
                 const json& metadata) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const auto& p : patients) {
    out << patient_to_json(p).dump() << "\n";
  }
  if (!out) throw IoError("write failed: " + path);

  std::ofstream meta(path + ".meta.json");
  if (!meta) throw IoError("cannot open for writing: " + path + ".meta.json");
  meta << metadata.dump(2) << "\n";
}

std::vector<PatientRecord> load_cohort(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cohort file: " + path);
  std::vector<PatientRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(patient_from_json(json::parse(line)));
  }
  return out;
}

}  // namespace eocrc::cohort
