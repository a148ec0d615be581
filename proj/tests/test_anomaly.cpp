#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "frailwatch/anomaly.hpp"
#include "frailwatch/features.hpp"
#include "frailwatch/rng.hpp"

using namespace frailwatch;

namespace {

// Window rows grouped into days; day labels and per-day record counts are
// driven by the caller. Columns F5/F6 carry Gaussians shifted on weak days.
FeatureTable day_table(std::uint64_t seed, const std::vector<int>& day_health,
                       const std::vector<int>& records_per_day,
                       double weak_shift) {
  REQUIRE(day_health.size() == records_per_day.size());
  FeatureTable t;
  Rng rng(seed);
  for (std::size_t day = 0; day < day_health.size(); ++day) {
    for (int rec = 0; rec < records_per_day[day]; ++rec) {
      for (int win = 0; win < 3; ++win) {
        int label = day_health[day];
        std::array<double, kFeatureColumns> vals{};
        std::array<bool, kFeatureColumns> def{};
        for (int c = 0; c < kFeatureColumns; ++c) {
          def[c] = true;
          vals[c] = 0.0;
        }
        vals[23] = std::normal_distribution<>(label ? weak_shift : 0.0, 1.0)(rng);
        vals[24] = std::normal_distribution<>(label ? -weak_shift : 0.0, 1.0)(rng);
        vals[0] = 128;
        vals[1] = 1;
        vals[2] = 1;
        t.values.push_back(vals);
        t.defined.push_back(def);
        t.health.push_back(label);
        t.activity.push_back(rec % 5);
        FeatureRowMeta m;
        m.record_id = "d" + std::to_string(day) + "_r" + std::to_string(rec);
        m.participant_id = "P1";
        m.window_start =
            add_seconds(CivilTime{2024, 3, 4, 9, 0, 0},
                        static_cast<std::int64_t>(day) * 86400 + rec * 3600);
        m.day = span_day_index(m.window_start);
        m.window_index = win;
        t.meta.push_back(m);
      }
    }
  }
  return t;
}

std::vector<std::size_t> all_rows(const FeatureTable& t) {
  std::vector<std::size_t> rows(t.size());
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

std::vector<int> two_columns() { return {23, 24}; }

}  // namespace

TEST_CASE("cohens_d worked examples") {
  std::vector<double> a = {0, 2}, b = {4, 6};
  CHECK(cohens_d(a, b) == doctest::Approx(-2.0 * std::sqrt(2.0)).epsilon(1e-12));
  std::vector<double> same = {1, 2, 3};
  CHECK(cohens_d(same, same) == doctest::Approx(0.0));
  CHECK(cohens_d(b, a) == doctest::Approx(-cohens_d(a, b)).epsilon(1e-12));

  std::vector<double> flat = {1, 1};
  CHECK_THROWS_AS(cohens_d(flat, flat), std::invalid_argument);
  std::vector<double> one = {1};
  CHECK_THROWS_AS(cohens_d(one, a), std::invalid_argument);
}

TEST_CASE("flag_days thresholds at mean minus k sigma") {
  std::vector<double> normal = {-10, -10.5, -9.5, -10.2, -9.8};
  auto none = flag_days(normal, normal, 2.0);
  for (bool f : none) CHECK_FALSE(f);

  double mean = -10.0;
  double sd = 0;
  for (double v : normal) sd += (v - mean) * (v - mean);
  sd = std::sqrt(sd / (normal.size() - 1));
  std::vector<double> probe = {mean - 3.0 * sd, mean - 1.0 * sd};
  auto flags = flag_days(probe, normal, 2.0);
  CHECK(flags[0]);
  CHECK_FALSE(flags[1]);
}

TEST_CASE("flag rate on pure-normal scores stays in the one-sided tail") {
  Rng rng(50);
  int flagged = 0, total = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> normal(20);
    for (auto& v : normal) v = std::normal_distribution<>(-5, 1)(rng);
    std::vector<double> fresh(20);
    for (auto& v : fresh) v = std::normal_distribution<>(-5, 1)(rng);
    auto flags = flag_days(fresh, normal, 2.0);
    for (bool f : flags) {
      ++total;
      if (f) ++flagged;
    }
  }
  CHECK(static_cast<double>(flagged) / total <= 0.05);
}

TEST_CASE("day grouping applies the exclusion rule") {
  // Normal days with 2, 3, 1 records: the single-record day does not qualify.
  auto t = day_table(1, {0, 0, 0, 1}, {2, 3, 1, 2}, 3.0);
  auto days = group_days(t, all_rows(t));
  REQUIRE(days.size() == 4);
  int qualifying = 0;
  for (const auto& d : days)
    if (d.qualifying) ++qualifying;
  CHECK(qualifying == 2);

  CHECK_NOTHROW(train_normal_model(t, all_rows(t), two_columns()));

  // Below two qualifying days the trainer refuses.
  auto t2 = day_table(2, {0, 1, 1}, {1, 2, 2}, 3.0);
  CHECK_THROWS_WITH_AS(train_normal_model(t2, all_rows(t2), two_columns()),
                       doctest::Contains("qualifying"), std::invalid_argument);
}

TEST_CASE("loo_scores runs one fold per qualifying day and is deterministic") {
  auto t = day_table(3, {0, 0, 1, 1}, {2, 2, 2, 1}, 3.0);
  auto scores = loo_scores(t, all_rows(t), two_columns());
  REQUIRE(scores.size() == 4);
  int loo_count = 0, weak_count = 0;
  for (const auto& s : scores) {
    if (s.loo) ++loo_count;
    if (s.group == "weak") ++weak_count;
  }
  CHECK(loo_count == 2);
  CHECK(weak_count == 2);

  auto again = loo_scores(t, all_rows(t), two_columns());
  for (std::size_t i = 0; i < scores.size(); ++i)
    CHECK(scores[i].log_likelihood == again[i].log_likelihood);
}

TEST_CASE("planted shift separates normal from weak day scores") {
  auto t = day_table(4, {0, 0, 0, 0, 0, 0, 1, 1, 1}, {3, 3, 3, 3, 3, 3, 3, 3, 3},
                     4.0);
  auto scores = loo_scores(t, all_rows(t), two_columns());
  double normal_mean = 0, weak_mean = 0;
  int n_normal = 0, n_weak = 0;
  for (const auto& s : scores) {
    if (s.group == "normal") {
      normal_mean += s.log_likelihood;
      ++n_normal;
    } else if (s.group == "weak") {
      weak_mean += s.log_likelihood;
      ++n_weak;
    }
  }
  normal_mean /= n_normal;
  weak_mean /= n_weak;
  CHECK(normal_mean > weak_mean);

  auto report = anomaly_report(t, all_rows(t), two_columns());
  CHECK(report.cohen_d > 0.7);
  auto csv = report.to_csv();
  CHECK(csv.find("log_likelihood") != std::string::npos);
}

TEST_CASE("LOO scores are exchangeable under day reordering") {
  auto t = day_table(5, {0, 0, 0, 1}, {2, 2, 2, 2}, 3.0);
  auto scores = loo_scores(t, all_rows(t), two_columns());

  // Feed rows in reversed order; per-day scores must be unchanged.
  auto rows = all_rows(t);
  std::reverse(rows.begin(), rows.end());
  auto reversed = loo_scores(t, rows, two_columns());
  REQUIRE(scores.size() == reversed.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    CHECK(scores[i].day == reversed[i].day);
    CHECK(scores[i].log_likelihood ==
          doctest::Approx(reversed[i].log_likelihood).epsilon(1e-12));
  }
}

TEST_CASE("paper profile name mapping for personalized feature sets") {
  // A P1-like personalized top-2 resolves to Scale(L-MPO) and VQ4(MPO).
  auto scale_l_mpo = group_by_label("Scale(L-MPO)");
  auto vq4_mpo = group_by_label("VQ4(MPO)");
  REQUIRE(scale_l_mpo.has_value());
  REQUIRE(vq4_mpo.has_value());
  CHECK(group_first_column(*scale_l_mpo) == column_of_feature(34));
  CHECK(group_first_column(*vq4_mpo) == column_of_feature(27));
}
