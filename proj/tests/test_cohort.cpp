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

#include <doctest.h>

#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eocrc/cohort.hpp"

using namespace eocrc;
using namespace eocrc::cohort;

namespace {

const Date kIndex = Date::from_ymd(2024, 6, 15);

ClinicalEvent event_at(int days_before_index, EventKind kind = EventKind::Condition,
                       CodeSystem sys = CodeSystem::ICD10, std::string code = "J02.9",
                       std::string display = "Acute pharyngitis") {
  ClinicalEvent ev;
  ev.kind = kind;
  ev.code_system = sys;
  ev.code = std::move(code);
  ev.display = std::move(display);
  ev.date = kIndex - days_before_index;
  return ev;
}

PatientRecord make_patient(std::string id, int age, Label label,
                           std::vector<ClinicalEvent> events) {
  PatientRecord p;
  p.id = std::move(id);
  p.age_years = age;
  p.gender = Gender::Female;
  p.race = Race::White;
  p.ethnicity = Ethnicity::NotHispanic;
  p.index_date = kIndex;
  p.label = label;
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return a.date < b.date; });
  p.events = std::move(events);
  return p;
}

bool cohorts_equal(const std::vector<PatientRecord>& a, const std::vector<PatientRecord>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (patient_to_json(a[i]).dump() != patient_to_json(b[i]).dump()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("generator produces the exact positive count") {
  SyntheticCohortConfig cfg;
  cfg.n_patients = 2000;
  cfg.prevalence = 0.01;
  cfg.seed = 11;
  cfg.vocabulary = default_vocabulary();
  auto cohort = generate_synthetic_cohort(cfg);
  REQUIRE(cohort.size() == 2000);
  int pos = 0;
  for (const auto& p : cohort) pos += p.label == Label::CRC;
  CHECK(pos == 20);
}

TEST_CASE("generator is deterministic per (config, seed)") {
  SyntheticCohortConfig cfg;
  cfg.n_patients = 300;
  cfg.prevalence = 0.05;
  cfg.seed = 99;
  cfg.vocabulary = default_vocabulary();
  auto a = generate_synthetic_cohort(cfg);
  auto b = generate_synthetic_cohort(cfg);
  CHECK(cohorts_equal(a, b));

  cfg.seed = 100;
  auto c = generate_synthetic_cohort(cfg);
  CHECK_FALSE(cohorts_equal(a, c));
}

TEST_CASE("generated patients pass default eligibility") {
  SyntheticCohortConfig cfg;
  cfg.n_patients = 500;
  cfg.prevalence = 0.02;
  cfg.seed = 5;
  cfg.vocabulary = default_vocabulary();
  auto cohort = generate_synthetic_cohort(cfg);
  auto eligible = apply_eligibility(cohort, CohortCriteria::defaults());
  CHECK(eligible.size() == cohort.size());
  for (const auto& p : cohort) {
    REQUIRE_FALSE(p.events.empty());
    for (size_t i = 1; i < p.events.size(); ++i) {
      CHECK(p.events[i - 1].date <= p.events[i].date);
    }
  }
}

TEST_CASE("generator rejects invalid config") {
  SyntheticCohortConfig cfg;
  cfg.n_patients = 10;
  cfg.prevalence = 0.0;
  cfg.vocabulary = default_vocabulary();
  CHECK_THROWS_AS(generate_synthetic_cohort(cfg), ConfigError);
  cfg.prevalence = 0.5;
  cfg.vocabulary.clear();
  CHECK_THROWS_AS(generate_synthetic_cohort(cfg), ConfigError);
}

TEST_CASE("eligibility excludes exclusion codes, age, and short history") {
  auto criteria = CohortCriteria::defaults();
  auto ok = make_patient("ok", 30, Label::NonCRC, {event_at(300), event_at(90)});
  auto crohns = make_patient("crohns", 30, Label::NonCRC,
                             {event_at(300), event_at(120, EventKind::Condition,
                                                      CodeSystem::ICD10, "K50.90", "Crohn's")});
  auto too_old = make_patient("old", 45, Label::NonCRC, {event_at(300), event_at(90)});
  auto short_history = make_patient("short", 30, Label::NonCRC, {event_at(90)});

  auto kept = apply_eligibility({ok, crohns, too_old, short_history}, criteria);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].id == "ok");
}

TEST_CASE("eligibility rejects exclusion codes regardless of event date") {
  auto criteria = CohortCriteria::defaults();
  // Exclusion code far outside the observation window still excludes.
  auto p = make_patient("p", 30, Label::NonCRC,
                        {event_at(400, EventKind::Condition, CodeSystem::SNOMEDCT, "716318002",
                                  "Lynch syndrome"),
                         event_at(90)});
  CHECK(apply_eligibility({p}, criteria).empty());
}

TEST_CASE("window keeps [index-210, index-30) and preserves order") {
  auto criteria = CohortCriteria::defaults();
  auto p = make_patient("p", 30, Label::NonCRC,
                        {event_at(250), event_at(210), event_at(90), event_at(31),
                         event_at(30), event_at(15)});
  auto w = extract_window(p, criteria);
  REQUIRE(w.size() == 3);
  // Ascending dates: offsets 210, 90, 31.
  CHECK(p.index_date - w[0].date == 210);
  CHECK(p.index_date - w[1].date == 90);
  CHECK(p.index_date - w[2].date == 31);
  for (const auto& ev : w) {
    const int diff = p.index_date - ev.date;
    CHECK(diff > criteria.window_end_days_before_index);
    CHECK(diff <= criteria.window_start_days_before_index);
  }
}

TEST_CASE("window extraction is idempotent") {
  auto criteria = CohortCriteria::defaults();
  auto p = make_patient("p", 30, Label::NonCRC,
                        {event_at(250), event_at(150), event_at(60), event_at(10)});
  auto w1 = extract_window(p, criteria);
  PatientRecord q = p;
  q.events = w1;
  auto w2 = extract_window(q, criteria);
  REQUIRE(w1.size() == w2.size());
  for (size_t i = 0; i < w1.size(); ++i) CHECK(w1[i].date == w2[i].date);
}

TEST_CASE("desk-scale splits hit exact 1% prevalence with disjoint CRC ids") {
  SyntheticCohortConfig cfg;
  cfg.n_patients = 6000;
  cfg.prevalence = 200.0 / 6000.0;
  cfg.seed = 17;
  cfg.vocabulary = default_vocabulary();
  auto cohort = generate_synthetic_cohort(cfg);

  auto plan = SplitPlan::desk_scale(17);
  auto splits = make_splits(cohort, plan);

  REQUIRE(splits.train.size() == 300);
  int train_pos = 0;
  std::set<std::string> train_crc_ids;
  for (const auto& p : splits.train) {
    if (p.label == Label::CRC) {
      ++train_pos;
      train_crc_ids.insert(p.id);
    }
  }
  CHECK(train_pos == 150);

  REQUIRE(splits.test_runs.size() == 10);
  std::set<std::string> test_crc_ids;
  for (const auto& run : splits.test_runs) {
    REQUIRE(run.size() == 500);
    int pos = 0;
    std::set<std::string> run_neg_ids;
    for (const auto& p : run) {
      if (p.label == Label::CRC) {
        ++pos;
        CHECK_FALSE(train_crc_ids.count(p.id));
        CHECK_FALSE(test_crc_ids.count(p.id));
        test_crc_ids.insert(p.id);
      } else {
        // controls never repeat within a run
        CHECK_FALSE(run_neg_ids.count(p.id));
        run_neg_ids.insert(p.id);
      }
    }
    CHECK(pos == 5);
    CHECK(static_cast<double>(pos) / run.size() == doctest::Approx(0.01).epsilon(1e-12));
  }
  CHECK(test_crc_ids.size() == 50);  // 10 runs x 5, all distinct
}

TEST_CASE("splits are deterministic per seed") {
  SyntheticCohortConfig cfg;
  cfg.n_patients = 1200;
  cfg.prevalence = 0.1;
  cfg.seed = 23;
  cfg.vocabulary = default_vocabulary();
  auto cohort = generate_synthetic_cohort(cfg);
  SplitPlan plan{40, 40, 4, 5, 45, 7};
  auto a = make_splits(cohort, plan);
  auto b = make_splits(cohort, plan);
  CHECK(cohorts_equal(a.train, b.train));
  for (int r = 0; r < 4; ++r) CHECK(cohorts_equal(a.test_runs[r], b.test_runs[r]));
}

TEST_CASE("splits reuse controls across runs when the pool is short") {
  std::vector<PatientRecord> pop;
  for (int i = 0; i < 30; ++i) {
    pop.push_back(make_patient("pos" + std::to_string(i), 30, Label::CRC,
                               {event_at(300), event_at(90)}));
  }
  for (int i = 0; i < 25; ++i) {
    pop.push_back(make_patient("neg" + std::to_string(i), 30, Label::NonCRC,
                               {event_at(300), event_at(90)}));
  }
  // 5 train controls leaves 20 spare; runs need 3 x 15 = 45 -> reuse required.
  SplitPlan plan{5, 5, 3, 2, 15, 3};
  auto splits = make_splits(pop, plan);
  REQUIRE(splits.test_runs.size() == 3);
  for (const auto& run : splits.test_runs) {
    std::set<std::string> ids;
    for (const auto& p : run) ids.insert(p.id);
    CHECK(ids.size() == run.size());
  }
}

TEST_CASE("splits fail loudly naming the deficient label") {
  std::vector<PatientRecord> pop;
  for (int i = 0; i < 5; ++i) {
    pop.push_back(make_patient("pos" + std::to_string(i), 30, Label::CRC, {event_at(300)}));
    pop.push_back(make_patient("neg" + std::to_string(i), 30, Label::NonCRC, {event_at(300)}));
  }
  SplitPlan plan{10, 2, 2, 2, 2, 1};
  try {
    make_splits(pop, plan);
    FAIL("expected SplitError");
  } catch (const SplitError& e) {
    CHECK(std::string(e.what()).find("CRC") != std::string::npos);
  }
}

TEST_CASE("patient json round trip") {
  auto p = make_patient("p1", 33, Label::CRC,
                        {event_at(90, EventKind::LabResult, CodeSystem::LOINC, "718-7",
                                  "Hemoglobin")});
  p.events[0].value = 12.5;
  p.events[0].unit = "g/dL";
  auto q = patient_from_json(patient_to_json(p));
  CHECK(patient_to_json(q).dump() == patient_to_json(p).dump());
  CHECK(q.events[0].value == 12.5);
  CHECK(q.events[0].unit == "g/dL");
}
