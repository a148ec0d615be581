#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "frailwatch/pipeline.hpp"
#include "frailwatch/rng.hpp"
#include "frailwatch/synth.hpp"

using namespace frailwatch;

namespace {

FeatureTable planted_windows(std::uint64_t seed, int n, int informative) {
  FeatureTable t;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    int label = i % 2;
    std::array<double, kFeatureColumns> vals{};
    std::array<bool, kFeatureColumns> def{};
    for (int c = 0; c < kFeatureColumns; ++c) {
      def[c] = true;
      vals[c] = std::normal_distribution<>(0, 1)(rng);
    }
    for (int c = 0; c < informative; ++c)
      vals[23 + c] += label ? 1.8 : -1.8;
    vals[0] = 128;
    vals[1] = 1;
    vals[2] = 1;
    t.values.push_back(vals);
    t.defined.push_back(def);
    t.health.push_back(label);
    t.activity.push_back(i % 5);
    FeatureRowMeta m;
    m.record_id = "r" + std::to_string(i / 3);  // three windows per record
    m.participant_id = "P1";
    m.window_start = add_seconds(CivilTime{2024, 3, 4, 9, 0, 0}, (i / 3) * 3600);
    m.day = span_day_index(m.window_start);
    m.window_index = i % 3;
    t.meta.push_back(m);
  }
  return t;
}

}  // namespace

TEST_CASE("segment_windows rule arithmetic") {
  auto w1 = segment_windows(700, 300);
  REQUIRE(w1.size() == 2);  // the 100 s tail is below W/2
  CHECK(w1[1].t1 == doctest::Approx(600));

  auto w2 = segment_windows(900, 300);
  CHECK(w2.size() == 3);

  auto w3 = segment_windows(100, 300);
  REQUIRE(w3.size() == 1);  // short-record rule
  CHECK(w3[0].t0 == doctest::Approx(0));
  CHECK(w3[0].t1 == doctest::Approx(100));

  auto w4 = segment_windows(760, 300);
  REQUIRE(w4.size() == 3);  // 160 s tail kept (>= 150)
  CHECK(w4[2].t1 == doctest::Approx(760));

  CHECK_THROWS_AS(segment_windows(100, 0), std::invalid_argument);
}

TEST_CASE("windowing covers the record up to the partial rule") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    double duration = std::uniform_real_distribution<>(10, 4000)(rng);
    double w = std::uniform_real_distribution<>(20, 1300)(rng);
    auto windows = segment_windows(duration, w);
    double covered = 0;
    for (const auto& win : windows) covered += win.t1 - win.t0;
    CHECK(covered >= duration - w / 2 - 1e-9);
    CHECK(covered <= duration + 1e-9);
    for (std::size_t i = 1; i < windows.size(); ++i)
      CHECK(windows[i].t0 == doctest::Approx(windows[i - 1].t1));
  }
}

TEST_CASE("majority_vote examples and tie rule") {
  std::vector<int> a = {1, 1, 0};
  CHECK(majority_vote(a) == 1);
  std::vector<int> tie = {0, 1};
  CHECK(majority_vote(tie) == 1);  // ties resolve to weak
  std::vector<int> empty;
  CHECK_THROWS_AS(majority_vote(empty), std::invalid_argument);

  Rng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = std::uniform_int_distribution<>(1, 15)(rng);
    std::vector<int> labels(n);
    for (auto& l : labels) l = std::uniform_int_distribution<>(0, 1)(rng);
    int ones = std::accumulate(labels.begin(), labels.end(), 0);
    int zeros = n - ones;
    int expected = ones >= zeros ? 1 : 0;
    CHECK(majority_vote(labels) == expected);
  }

  for (int k = 1; k <= 5; ++k) {
    std::vector<int> rep(k, 0);
    CHECK(majority_vote(rep) == 0);
  }
}

TEST_CASE("aggregate_spans bins records on the 06:00 anchor") {
  std::vector<std::pair<CivilTime, int>> records = {
      {CivilTime{2024, 3, 4, 7, 0, 0}, 0},
      {CivilTime{2024, 3, 4, 13, 0, 0}, 0},
      {CivilTime{2024, 3, 4, 15, 0, 0}, 1},
      {CivilTime{2024, 3, 5, 2, 0, 0}, 1},  // previous span day, night bin
  };
  auto spans = aggregate_spans(records);
  REQUIRE(spans.daily.size() == 1);
  CHECK(spans.daily.begin()->second == 1);  // 2 vs 2 tie -> weak
  REQUIRE(spans.eight_hour.size() == 3);
  std::int64_t day = span_day_index(records[0].first);
  CHECK(spans.eight_hour.at(SpanKey{day, 0}) == 0);
  CHECK(spans.eight_hour.at(SpanKey{day, 1}) == 1);
  CHECK(spans.eight_hour.at(SpanKey{day, 2}) == 1);

  std::vector<std::pair<CivilTime, int>> one = {
      {CivilTime{2024, 3, 7, 9, 0, 0}, 0}};
  auto single = aggregate_spans(one);
  CHECK(single.daily.begin()->second == 0);
}

TEST_CASE("aggregate_spans is order-independent") {
  Rng rng(6);
  std::vector<std::pair<CivilTime, int>> records;
  for (int i = 0; i < 40; ++i) {
    records.emplace_back(
        add_seconds(CivilTime{2024, 3, 4, 6, 0, 0},
                    std::uniform_int_distribution<>(0, 5 * 86400)(rng)),
        std::uniform_int_distribution<>(0, 1)(rng));
  }
  auto a = aggregate_spans(records);
  std::shuffle(records.begin(), records.end(), rng);
  auto b = aggregate_spans(records);
  CHECK(a.daily == b.daily);
  CHECK(a.eight_hour == b.eight_hour);
}

TEST_CASE("forward_select finds the single informative feature") {
  // A cleanly separable single feature: the trace hits 1.0 at step one and
  // the first best prefix stops there.
  FeatureTable t;
  Rng rng(5);
  for (int i = 0; i < 60; ++i) {
    int label = i % 2;
    std::array<double, kFeatureColumns> vals{};
    std::array<bool, kFeatureColumns> def{};
    for (int c = 0; c < kFeatureColumns; ++c) {
      def[c] = true;
      vals[c] = std::normal_distribution<>(0, 1)(rng);
    }
    vals[23] = std::normal_distribution<>(label ? 6.0 : -6.0, 1.0)(rng);
    vals[0] = 128;
    vals[1] = 1;
    t.values.push_back(vals);
    t.defined.push_back(def);
    t.health.push_back(label);
    t.activity.push_back(0);
    FeatureRowMeta m;
    m.record_id = "r" + std::to_string(i);
    m.participant_id = "P1";
    m.window_start = CivilTime{2024, 3, 4, 10, 0, 0};
    m.day = 0;
    m.window_index = 0;
    t.meta.push_back(m);
  }
  std::vector<std::size_t> rows(t.size());
  std::iota(rows.begin(), rows.end(), 0);
  ClassifierSpec spec;
  spec.kind = ClassifierKind::BayesNet;
  spec.seed = 5;
  auto result = forward_select(spec, t, rows, 30, 5, 5);
  REQUIRE(!result.features.empty());
  CHECK(result.features[0] == 23);
  CHECK(result.features.size() == 1);  // first best prefix
  CHECK(result.best_f1 == doctest::Approx(1.0));
  CHECK(result.trace.size() <= 30);
}

TEST_CASE("forward_select recovers planted features before noise") {
  // Block construction: feature k separates only its third of the samples, so
  // each planted feature contributes a large non-redundant greedy gain.
  int hits = 0;
  const int runs = 20;
  for (int s = 0; s < runs; ++s) {
    FeatureTable t;
    Rng rng(900 + s);
    for (int i = 0; i < 90; ++i) {
      int label = i % 2;
      int block = (i / 2) % 3;
      std::array<double, kFeatureColumns> vals{};
      std::array<bool, kFeatureColumns> def{};
      for (int c = 0; c < kFeatureColumns; ++c) {
        def[c] = true;
        vals[c] = std::normal_distribution<>(0, 1)(rng);
      }
      vals[23 + block] += label ? 5.0 : -5.0;
      vals[0] = 128;
      vals[1] = 1;
      t.values.push_back(vals);
      t.defined.push_back(def);
      t.health.push_back(label);
      t.activity.push_back(0);
      FeatureRowMeta m;
      m.record_id = "r" + std::to_string(i);
      m.participant_id = "P1";
      m.window_start = CivilTime{2024, 3, 4, 10, 0, 0};
      m.day = 0;
      m.window_index = 0;
      t.meta.push_back(m);
    }
    std::vector<std::size_t> rows(t.size());
    std::iota(rows.begin(), rows.end(), 0);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::BayesNet;
    spec.seed = static_cast<std::uint64_t>(s);
    auto result = forward_select(spec, t, rows, 6, 5, s);
    bool ok = true;
    for (int k = 0; k < 3 && ok; ++k) {
      ok = result.features.size() > static_cast<std::size_t>(k) &&
           result.features[k] >= 23 && result.features[k] <= 25;
    }
    if (ok) ++hits;
  }
  CHECK(hits >= 18);  // >= 90% of seeded runs
}

TEST_CASE("subset search enumerates, filters and falls back") {
  auto t = planted_windows(7, 100, 2);
  std::vector<std::size_t> rows(t.size());
  std::iota(rows.begin(), rows.end(), 0);
  ClassifierSpec spec;
  spec.kind = ClassifierKind::BayesNet;
  spec.seed = 7;
  auto result = search_activity_subsets(spec, t, rows, 0.4, 10, 5, 7);
  CHECK(!result.activities.empty());
  CHECK(result.coverage > 0.4);
  CHECK_FALSE(result.coverage_fallback);
  CHECK(result.best_f1 > 0.8);

  FeatureTable solo = planted_windows(9, 40, 1);
  for (auto& a : solo.activity) a = 2;
  std::vector<std::size_t> rows2(solo.size());
  std::iota(rows2.begin(), rows2.end(), 0);
  auto fb = search_activity_subsets(spec, solo, rows2, 0.4, 10, 5, 9);
  CHECK(fb.coverage_fallback);
  REQUIRE(fb.warnings.size() == 1);
}

TEST_CASE("subset search selects the carrier activities") {
  int hits = 0;
  const int runs = 20;
  for (int s = 0; s < runs; ++s) {
    FeatureTable t;
    Rng rng(700 + s);
    for (int i = 0; i < 150; ++i) {
      int label = i % 2;
      int activity = i % 5;
      std::array<double, kFeatureColumns> vals{};
      std::array<bool, kFeatureColumns> def{};
      for (int c = 0; c < kFeatureColumns; ++c) {
        def[c] = true;
        vals[c] = std::normal_distribution<>(0, 1)(rng);
      }
      if (activity == 3 || activity == 4) {
        vals[23] += label ? 2.0 : -2.0;
        vals[24] += label ? 1.5 : -1.5;
      }
      vals[0] = 128;
      vals[1] = 1;
      t.values.push_back(vals);
      t.defined.push_back(def);
      t.health.push_back(label);
      t.activity.push_back(activity);
      FeatureRowMeta m;
      m.record_id = "r" + std::to_string(i);
      m.participant_id = "P1";
      m.window_start = CivilTime{2024, 3, 4, 10, 0, 0};
      m.day = 0;
      m.window_index = 0;
      t.meta.push_back(m);
    }
    std::vector<std::size_t> rows(t.size());
    std::iota(rows.begin(), rows.end(), 0);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::BayesNet;
    spec.seed = static_cast<std::uint64_t>(s);
    auto result = search_activity_subsets(spec, t, rows, 0.4, 8, 5, s);
    bool has_carrier = false;
    for (int a : result.activities)
      if (a == 3 || a == 4) has_carrier = true;
    if (has_carrier) ++hits;
  }
  CHECK(hits >= 18);
}

TEST_CASE("evaluate_levels aggregates windows to records and spans") {
  auto t = planted_windows(11, 90, 2);
  std::vector<std::size_t> rows(t.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<int> columns(kFeatureColumns);
  std::iota(columns.begin(), columns.end(), 0);
  ClassifierSpec spec;
  spec.kind = ClassifierKind::BayesNet;
  spec.seed = 11;
  auto scores = evaluate_levels(spec, t, rows, columns, 5, 11);
  CHECK(scores.record_micro >= 0.0);
  CHECK(scores.record_micro <= 1.0);
  CHECK(scores.daily_micro >= 0.0);
}

TEST_CASE("sweep_windows emits one row per participant per window size") {
  StudyConfig config;
  config.seed = 17;
  config.participants = 2;
  config.days_override = 6;
  config.duration_scale = 0.08;
  auto dataset = generate_study(config);
  ClassifierSpec spec;
  spec.kind = ClassifierKind::BayesNet;
  spec.seed = 17;
  std::vector<double> windows = {30, 60, 120};
  auto rows = sweep_windows(spec, dataset, windows, 5, 17);
  CHECK(rows.size() == 2 * windows.size());
  auto csv = sweep_to_csv(rows);
  std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == 1 + rows.size() * 3);

  auto rows2 = sweep_windows(spec, dataset, windows, 5, 17);
  CHECK(sweep_to_csv(rows2) == csv);
}

TEST_CASE("selection result serializes its provenance") {
  auto t = planted_windows(5, 60, 1);
  std::vector<std::size_t> rows(t.size());
  std::iota(rows.begin(), rows.end(), 0);
  ClassifierSpec spec;
  spec.kind = ClassifierKind::BayesNet;
  spec.seed = 5;
  auto result = forward_select(spec, t, rows, 5, 5, 5);
  auto json = result.to_json();
  CHECK(json.find("\"trace\"") != std::string::npos);
  CHECK(json.find("F5") != std::string::npos);
}
