#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "frailwatch/log_io.hpp"
#include "frailwatch/rng.hpp"
#include "frailwatch/synth.hpp"
#include "frailwatch/types.hpp"

using namespace frailwatch;

namespace {

MonitoringRecord tiny_record() {
  MonitoringRecord r;
  r.record_id = "r1";
  r.participant_id = "P1";
  r.wall_clock_start = CivilTime{2024, 3, 4, 10, 0, 0};
  r.activity = Activity::Read;
  r.health = Health::Normal;
  r.env.lighting_luma = 150;
  r.env.time_of_day = TimeOfDay::T1;
  r.env.weather_suitable = true;
  for (int i = 0; i < 3; ++i) {
    FrameMotionSummary f;
    f.timestamp = i * 0.5;
    f.dt = 0.5;
    f.human_present = true;
    f.human_bbox = BBox{100, 50, 200, 300};
    f.human_pixel_count = 30000;
    f.movement_pixel_count = i == 1 ? 400 : 0;
    if (i == 1) {
      f.quadrants[0].movement_pixel_count = 400;
      f.quadrants[0].movement_bbox = BBox{210, 60, 60, 70};
      f.quadrants[0].mean_flow_magnitude = 12.5;
      f.movement_bbox = f.quadrants[0].movement_bbox;
      f.mean_flow_magnitude = 12.5;
    }
    r.frames.push_back(f);
  }
  r.duration = 1.5;
  return r;
}

}  // namespace

TEST_CASE("luma601 trivial and derived values") {
  CHECK(luma601(255, 255, 255) == doctest::Approx(255.0));
  CHECK(luma601(0, 0, 0) == doctest::Approx(0.0));
  // Direct evaluation of the Rec. 601 coefficients for pure red.
  CHECK(luma601(255, 0, 0) == doctest::Approx(76.245).epsilon(1e-12));
  CHECK_THROWS_AS(luma601(-1, 0, 0), std::domain_error);
  CHECK_THROWS_AS(luma601(0, 256, 0), std::domain_error);
}

TEST_CASE("luma601 linearity property") {
  Rng rng(7);
  std::uniform_real_distribution<> channel(0.0, 100.0);
  std::uniform_real_distribution<> scalar(0.0, 2.5);
  for (int i = 0; i < 200; ++i) {
    double r = channel(rng), g = channel(rng), b = channel(rng);
    double a = scalar(rng);
    if (a * r > 255 || a * g > 255 || a * b > 255) continue;
    CHECK(luma601(a * r, a * g, a * b) ==
          doctest::Approx(a * luma601(r, g, b)).epsilon(1e-9));
  }
}

TEST_CASE("time_of_day_bin boundaries") {
  CHECK(time_of_day_bin(CivilTime{2024, 1, 1, 6, 0, 0}) == TimeOfDay::T1);
  CHECK(time_of_day_bin(CivilTime{2024, 1, 1, 13, 59, 59}) == TimeOfDay::T1);
  CHECK(time_of_day_bin(CivilTime{2024, 1, 1, 14, 0, 0}) == TimeOfDay::T2);
  CHECK(time_of_day_bin(CivilTime{2024, 1, 1, 21, 59, 59}) == TimeOfDay::T2);
  CHECK(time_of_day_bin(CivilTime{2024, 1, 1, 22, 0, 0}) == TimeOfDay::T3);
  // Third bin spans past midnight.
  CHECK(time_of_day_bin(CivilTime{2024, 1, 1, 2, 30, 0}) == TimeOfDay::T3);
}

TEST_CASE("civil time round trips and span bins") {
  CivilTime t{2024, 2, 29, 23, 59, 59};
  CHECK(from_linear_seconds(to_linear_seconds(t)) == t);
  CHECK(parse_civil(format_civil(t)) == t);
  // 02:00 belongs to the previous span day's 22:00-06:00 bin.
  CivilTime night{2024, 3, 5, 2, 0, 0};
  CivilTime evening{2024, 3, 4, 23, 0, 0};
  CHECK(span_day_index(night) == span_day_index(evening));
  CHECK(span_eight_hour_bin(night) == 2);
  CHECK(span_eight_hour_bin(evening) == 2);
  CHECK(span_eight_hour_bin(CivilTime{2024, 3, 4, 7, 0, 0}) == 0);
  CHECK(span_eight_hour_bin(CivilTime{2024, 3, 4, 13, 0, 0}) == 0);
  CHECK(span_eight_hour_bin(CivilTime{2024, 3, 4, 15, 0, 0}) == 1);
}

TEST_CASE("well-formed two-record file parses") {
  LabeledDataset d;
  d.records.push_back(tiny_record());
  auto r2 = tiny_record();
  r2.record_id = "r2";
  r2.wall_clock_start = CivilTime{2024, 3, 4, 12, 0, 0};
  d.records.push_back(r2);
  d.participants.push_back(ParticipantInfo{"P1", "R", false});

  std::stringstream ss;
  serialize_log(d, ss);
  auto parsed = parse_log(ss);
  CHECK(parsed.records.size() == 2);
}

TEST_CASE("invariant violation reports the invariant and line") {
  auto r = tiny_record();
  r.frames[1].movement_pixel_count = r.frames[1].human_pixel_count + 1;
  r.frames[1].quadrants[0].movement_pixel_count =
      r.frames[1].movement_pixel_count;
  LabeledDataset d;
  d.records.push_back(r);
  std::stringstream ss;
  serialize_log(d, ss);
  CHECK_THROWS_WITH_AS(parse_log(ss),
                       doctest::Contains("movement_pixel_count exceeds"),
                       ValidationError);
}

TEST_CASE("quadrant sum invariant is enforced") {
  auto r = tiny_record();
  r.frames[1].quadrants[0].movement_pixel_count = 399;  // breaks the sum
  LabeledDataset d;
  d.records.push_back(r);
  std::stringstream ss;
  serialize_log(d, ss);
  CHECK_THROWS_WITH_AS(parse_log(ss), doctest::Contains("quadrant"),
                       ValidationError);
}

TEST_CASE("malformed line carries its line number") {
  std::stringstream ss;
  ss << record_header_json(tiny_record()) << "\n";
  ss << "{ not json\n";
  try {
    parse_log(ss);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("empty file parses to an empty dataset") {
  std::stringstream ss;
  auto d = parse_log(ss);
  CHECK(d.records.empty());
}

TEST_CASE("timestamps must strictly increase") {
  auto r = tiny_record();
  r.frames[2].timestamp = r.frames[1].timestamp;
  LabeledDataset d;
  d.records.push_back(r);
  std::stringstream ss;
  serialize_log(d, ss);
  CHECK_THROWS_WITH_AS(parse_log(ss), doctest::Contains("strictly increasing"),
                       ValidationError);
}

TEST_CASE("serialize/parse round trip is bit-exact on random datasets") {
  // Round-trip oracle: 100 generator-built records with irregular values.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    StudyConfig config;
    config.seed = seed;
    config.participants = 1;
    config.days_override = 1;
    config.duration_scale = 0.02;  // ~30 s records keep this fast
    LabeledDataset d = generate_study(config);
    std::stringstream ss;
    serialize_log(d, ss);
    LabeledDataset back = parse_log(ss);
    REQUIRE(back.records.size() == d.records.size());
    for (std::size_t i = 0; i < d.records.size(); ++i)
      CHECK(back.records[i] == d.records[i]);
  }
}

TEST_CASE("manifest round trip keeps participant metadata") {
  StudyConfig config;
  config.seed = 5;
  config.participants = 2;
  config.days_override = 1;
  config.duration_scale = 0.02;
  LabeledDataset d = generate_study(config);
  d.participants[1].mirror = true;
  d.participants[1].handedness = "L";

  std::string dir = "manifest_test_tmp";
  std::filesystem::create_directories(dir);
  serialize_log_file(d, dir + "/records.jsonl");
  write_manifest(d, {"records.jsonl"}, dir + "/manifest.json");
  LabeledDataset back = load_manifest(dir + "/manifest.json");
  CHECK(back.records.size() == d.records.size());
  REQUIRE(back.participants.size() == 2);
  CHECK(back.participants[1].mirror == true);
  CHECK(back.participants[1].handedness == "L");
  std::filesystem::remove_all(dir);
}
