#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "frailwatch/features.hpp"
#include "frailwatch/log_io.hpp"
#include "frailwatch/synth.hpp"

using namespace frailwatch;

namespace {

int col(int feature) { return column_of_feature(feature); }

double left_mpo_speed(const MonitoringRecord& rec) {
  auto fv = extract_features(rec, false);
  REQUIRE(fv.defined[col(31)]);
  return fv.values[col(31)];
}

}  // namespace

TEST_CASE("weak left-quadrant flow drops by the configured multiplier") {
  ParticipantProfile p = default_profile(0);  // left_speed 0.851
  double ratio_sum = 0;
  int n = 6;
  for (int i = 0; i < n; ++i) {
    auto normal = generate_record(p, Activity::PC, Health::Normal, 3600, 100 + i);
    auto weak = generate_record(p, Activity::PC, Health::Weak, 3600, 100 + i);
    ratio_sum += left_mpo_speed(weak) / left_mpo_speed(normal);
  }
  double expected = p.effects.left_speed * p.effects.global_speed;
  CHECK(ratio_sum / n == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("zero duration is rejected") {
  ParticipantProfile p = default_profile(0);
  CHECK_THROWS_AS(generate_record(p, Activity::Read, Health::Normal, 0.0, 1),
                  std::invalid_argument);
}

TEST_CASE("generated records validate and round trip through the log format") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ParticipantProfile p = default_profile(static_cast<int>(seed % 5));
    auto rec = generate_record(p, static_cast<Activity>(seed % 5),
                               seed % 2 ? Health::Weak : Health::Normal, 120.0,
                               seed);
    CHECK_NOTHROW(validate_record(rec));
    LabeledDataset d;
    d.records.push_back(rec);
    std::stringstream ss;
    serialize_log(d, ss);
    auto back = parse_log(ss);
    REQUIRE(back.records.size() == 1);
    CHECK(back.records[0] == rec);
  }
}

TEST_CASE("same seed gives a bit-identical dataset") {
  StudyConfig config;
  config.seed = 42;
  config.participants = 2;
  config.days_override = 3;
  config.duration_scale = 0.05;
  auto a = generate_study(config);
  auto b = generate_study(config);
  CHECK(a == b);
}

TEST_CASE("label mix approximates the calibration split") {
  // Normal fraction target 37.5 +- 10 points over seeds.
  double normal_total = 0, all_total = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    StudyConfig config;
    config.seed = seed;
    config.participants = 5;
    config.duration_scale = 0.02;
    auto plans = plan_study(config);
    for (const auto& plan : plans) {
      all_total += 1;
      if (plan.health == Health::Normal) normal_total += 1;
    }
  }
  double pct = 100.0 * normal_total / all_total;
  CHECK(pct > 27.5);
  CHECK(pct < 47.5);
}

TEST_CASE("per-activity mean durations stay near the calibration table") {
  // Study-wide means (minutes): read 22.5, PC 22.3, eat 8.6, nap 15.5,
  // watch 28.2; the check allows +-50%.
  const double expected[kActivityCount] = {22.5, 22.3, 8.6, 15.5, 28.2};
  std::map<int, std::pair<double, int>> by_activity;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    StudyConfig config;
    config.seed = seed;
    config.participants = 5;
    auto plans = plan_study(config);
    for (const auto& plan : plans) {
      auto& acc = by_activity[static_cast<int>(plan.activity)];
      acc.first += plan.duration / 60.0;
      acc.second += 1;
    }
  }
  for (int a = 0; a < kActivityCount; ++a) {
    REQUIRE(by_activity.count(a));
    double mean = by_activity[a].first / by_activity[a].second;
    CHECK(mean > expected[a] * 0.5);
    CHECK(mean < expected[a] * 1.5);
  }
}

TEST_CASE("extracted mean speed converges to the configured level") {
  ParticipantProfile p = default_profile(0);
  double sum = 0;
  const int seeds = 20;
  for (int i = 0; i < seeds; ++i) {
    auto rec = generate_record(p, Activity::PC, Health::Normal, 3600, 2000 + i);
    auto fv = extract_features(rec, false);
    sum += fv.values[col(17)];  // MPO mean speed tracks the bout speed level
  }
  double mean_mpo_speed = sum / seeds;
  // Per-bout level is log-normal with mean median*exp(sigma^2/2); per-frame
  // jitter multiplies in exp(sigma_f^2/2).
  const auto& ap = p.activity_params[static_cast<int>(Activity::PC)];
  double bout_mean =
      ap.speed_median * std::exp(ap.speed_log_sigma * ap.speed_log_sigma / 2.0);
  double frame_mean = std::exp(ap.frame_speed_sigma * ap.frame_speed_sigma / 2.0);
  CHECK(mean_mpo_speed / (bout_mean * frame_mean) ==
        doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("planted effects shift the carrying features in the right direction") {
  ParticipantProfile p = default_profile(0);
  double normal_left = 0, weak_left = 0, normal_scale = 0, weak_scale = 0;
  const int n = 50;
  for (int i = 0; i < n; ++i) {
    auto nr = generate_record(p, Activity::Read, Health::Normal, 600, 500 + i);
    auto wr = generate_record(p, Activity::Read, Health::Weak, 600, 9000 + i);
    auto nf = extract_features(nr, false);
    auto wf = extract_features(wr, false);
    normal_left += nf.values[col(31)];
    weak_left += wf.values[col(31)];
    normal_scale += nf.values[col(34)];
    weak_scale += wf.values[col(34)];
  }
  CHECK(weak_left < normal_left);
  CHECK(weak_scale < normal_scale);
}

TEST_CASE("gap reweighting grows the long-inactivity bucket") {
  ParticipantProfile p = default_profile(1);  // P2-like: gap_long_weight 3.0
  double normal_long = 0, weak_long = 0;
  const int n = 20;
  for (int i = 0; i < n; ++i) {
    auto nr = generate_record(p, Activity::Watch, Health::Normal, 2400, 700 + i);
    auto wr = generate_record(p, Activity::Watch, Health::Weak, 2400, 7700 + i);
    auto nf = extract_features(nr, false);
    auto wf = extract_features(wr, false);
    if (nf.defined[col(52)]) normal_long += nf.values[col(52)];
    if (wf.defined[col(52)]) weak_long += wf.values[col(52)];
  }
  CHECK(weak_long > normal_long * 1.3);
}

TEST_CASE("activity distribution respects zero-base activities") {
  ParticipantProfile p = default_profile(3);  // only read and watch
  auto dist = activity_distribution(p, Health::Normal, TimeOfDay::T1, true);
  CHECK(dist[static_cast<int>(Activity::PC)] == 0.0);
  CHECK(dist[static_cast<int>(Activity::Eat)] == 0.0);
  CHECK(dist[static_cast<int>(Activity::Nap)] == 0.0);
  double sum = 0;
  for (double v : dist) sum += v;
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("featurize_study matches generate-then-featurize") {
  StudyConfig config;
  config.seed = 9;
  config.participants = 2;
  config.days_override = 2;
  config.duration_scale = 0.05;
  auto table = featurize_study(config, 60.0);
  auto dataset = generate_study(config);
  auto expected = featurize_dataset(dataset, 60.0);
  REQUIRE(table.size() == expected.size());
  for (std::size_t r = 0; r < table.size(); ++r) {
    CHECK(table.values[r] == expected.values[r]);
    CHECK(table.meta[r].record_id == expected.meta[r].record_id);
  }
}
