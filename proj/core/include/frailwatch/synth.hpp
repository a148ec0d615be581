#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "frailwatch/feature_table.hpp"
#include "frailwatch/types.hpp"

namespace frailwatch {

// Inactivity gaps are drawn from a three-component exponential mixture
// (micro-pauses, mid rests, long rests). Gaps shorter than the inactivity
// minimum merge into the surrounding movement during extraction.
struct GapMixture {
  std::array<double, 3> weights{0.55, 0.30, 0.15};
  std::array<double, 3> mean_seconds{0.8, 8.0, 45.0};
};

struct ActivityMotionParams {
  double bout_median_seconds = 8.0;   // movement bout duration (log-normal)
  double bout_log_sigma = 0.8;
  GapMixture gaps;
  double speed_median = 20.0;         // per-bout speed level, px/s (log-normal)
  double speed_log_sigma = 0.35;
  double frame_speed_sigma = 0.15;    // per-frame jitter around the bout level
  std::array<double, 4> quadrant_share{0.40, 0.30, 0.15, 0.15};  // TR TL BR BL
  double density = 0.30;              // moving fraction of human pixels in a bout
  double scale = 0.35;                // movement bbox area fraction per quadrant
  double duration_median_minutes = 20.0;
  double duration_log_sigma = 0.45;
};

// Multiplicative changes applied to the generative parameters when the
// health state is weak. Values are targets in the spirit of the reported
// per-participant percentage shifts; they act on parameters, not features,
// so the whole extraction pipeline is exercised.
struct HealthEffects {
  double left_speed = 1.0;
  double left_extent = 1.0;   // pixel counts and bbox area on the left side
  double top_speed = 1.0;
  double top_extent = 1.0;
  double global_speed = 1.0;
  double global_extent = 1.0;
  double gap_short_weight = 1.0;  // reweights the gap mixture
  double gap_long_weight = 1.0;
  double bout_duration = 1.0;
};

struct ParticipantProfile {
  std::string id;
  std::string handedness = "R";
  bool mirror = false;
  std::array<double, kActivityCount> activity_base{};  // preference weights
  std::array<ActivityMotionParams, kActivityCount> activity_params{};
  HealthEffects effects;
  std::array<double, kActivityCount> activity_effect_weight{1, 1, 1, 1, 1};
  double records_per_day = 4.0;
  int days = 12;
  // Fraction of a workout day's records captured before the workout.
  double morning_normal_fraction = 0.125;
};

// Profiles 0..4 modeled on the study's five participants: activity mixes,
// mean durations, records-per-day and the per-participant weak-state effect
// themes (left-side speed/scale drops, inactivity redistribution, ...).
ParticipantProfile default_profile(int index);

// P(A | H, time-of-day, weather) for one profile, normalized over the
// activities the participant actually performs.
std::array<double, kActivityCount> activity_distribution(
    const ParticipantProfile& profile, Health health, TimeOfDay tod,
    bool weather_suitable);

struct StudyConfig {
  std::uint64_t seed = 0;
  int participants = 5;  // default_profile(0..n-1) unless profiles is set
  std::vector<ParticipantProfile> profiles;
  int days_override = 0;          // > 0 replaces each profile's day count
  double duration_scale = 1.0;    // scales record durations
  int start_year = 2024, start_month = 3, start_day = 4;
};

struct RecordPlan {
  std::string record_id;
  std::string participant_id;
  int profile_index = 0;
  Activity activity = Activity::Read;
  Health health = Health::Normal;
  double duration = 0;  // seconds, multiple of the frame interval
  CivilTime start;
  bool weather_suitable = true;
  int day_number = 0;
  std::uint64_t seed = 0;
};

// Deterministic, cheap planning pass: day plans (normal / workout / post),
// record schedule, activities, durations and per-record seeds.
std::vector<RecordPlan> plan_study(const StudyConfig& config);

// Synthesizes the frame stream for one planned record at 10 Hz. All frame
// invariants hold by construction; the record validates after a
// serialize/parse round trip.
MonitoringRecord generate_record(const ParticipantProfile& profile,
                                 const RecordPlan& plan);

// Convenience wrapper matching the simulator's public contract.
MonitoringRecord generate_record(const ParticipantProfile& profile,
                                 Activity activity, Health health,
                                 double duration_seconds, std::uint64_t seed);

LabeledDataset generate_study(const StudyConfig& config);

// Streams records one at a time (generation order) without holding the whole
// frame set in memory.
void generate_study_stream(const StudyConfig& config,
                           const std::function<void(MonitoringRecord&&)>& sink);

// Generate + featurize without materializing frames; window_seconds <= 0
// extracts whole-record features. Parallel across records, deterministic.
FeatureTable featurize_study(const StudyConfig& config, double window_seconds);

}  // namespace frailwatch
