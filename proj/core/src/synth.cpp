#include "frailwatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "frailwatch/parallel.hpp"
#include "frailwatch/rng.hpp"

namespace frailwatch {

namespace {

constexpr double kFrameDt = 0.1;  // 10 Hz synthetic capture

ActivityMotionParams make_params(double bout_med, double speed_med,
                                 std::array<double, 4> share, double density,
                                 double scale, double dur_minutes) {
  ActivityMotionParams p;
  p.bout_median_seconds = bout_med;
  p.speed_median = speed_med;
  p.quadrant_share = share;
  p.density = density;
  p.scale = scale;
  p.duration_median_minutes = dur_minutes;
  return p;
}

}  // namespace

ParticipantProfile default_profile(int index) {
  ParticipantProfile p;
  p.id = "P" + std::to_string(index + 1);

  // Per-activity motion character (shared baseline): quadrant shares follow
  // the upper-body scenario, hands mostly in the top half.
  //                       bout  speed  share TR   TL   BR   BL  dens scale dur(min)
  auto read = make_params(6.0, 16.0, {0.42, 0.34, 0.12, 0.12}, 0.22, 0.30, 22.0);
  auto pc = make_params(10.0, 24.0, {0.50, 0.26, 0.14, 0.10}, 0.30, 0.34, 22.0);
  auto eat = make_params(7.0, 28.0, {0.40, 0.34, 0.14, 0.12}, 0.34, 0.40, 8.6);
  auto nap = make_params(3.0, 8.0, {0.30, 0.30, 0.20, 0.20}, 0.10, 0.16, 15.5);
  auto watch = make_params(4.0, 12.0, {0.36, 0.32, 0.16, 0.16}, 0.16, 0.22, 28.0);
  nap.gaps.weights = {0.25, 0.35, 0.40};
  nap.gaps.mean_seconds = {0.8, 15.0, 90.0};
  watch.gaps.weights = {0.40, 0.35, 0.25};
  watch.gaps.mean_seconds = {0.8, 10.0, 60.0};

  p.activity_params = {read, pc, eat, nap, watch};

  switch (index) {
    case 0:  // P1-like: busiest participant, left-side slowdown when weak
      p.activity_base = {24.2, 33.2, 15.7, 10.1, 16.9};
      p.records_per_day = 8.1;
      p.days = 22;
      p.effects.left_speed = 0.851;
      p.effects.left_extent = 0.869;
      p.effects.global_speed = 0.93;
      break;
    case 1:  // P2-like: inactivity redistribution toward long rests
      p.activity_base = {10.6, 40.4, 0.0, 12.8, 36.2};
      p.records_per_day = 2.0;
      p.days = 23;
      p.effects.gap_long_weight = 3.0;
      p.effects.gap_short_weight = 0.7;
      p.effects.left_extent = 1.15;
      break;
    case 2:  // P3-like: overall slowdown, mild left effect and longer rests
      p.activity_base = {18.75, 18.75, 18.75, 18.75, 25.0};
      p.records_per_day = 1.6;
      p.days = 10;
      p.effects.global_speed = 0.82;
      p.effects.left_speed = 0.926;
      p.effects.gap_long_weight = 1.6;
      break;
    case 3:  // P4-like: few records, faster left side when weak
      p.activity_base = {57.1, 0.0, 0.0, 0.0, 42.9};
      p.records_per_day = 1.4;
      p.days = 8;
      p.effects.left_speed = 1.30;
      p.effects.gap_long_weight = 1.5;
      p.effects.bout_duration = 0.8;
      break;
    default:  // P5-like: scale/density contraction
      p.activity_base = {25.0, 25.0, 25.0, 0.0, 25.0};
      p.records_per_day = 1.7;
      p.days = 8;
      p.effects.global_extent = 0.9;
      p.effects.left_extent = 0.795;
      p.effects.top_speed = 0.946;
      break;
  }
  // Per-activity duration medians from the study's mean-duration table.
  static const double durations[5][kActivityCount] = {
      {19.8, 24.3, 9.9, 13.5, 20.0},
      {13.8, 20.7, 0.0, 11.0, 17.1},
      {26.0, 21.3, 8.6, 22.1, 22.9},
      {23.3, 0.0, 0.0, 0.0, 28.7},
      {29.8, 22.8, 7.4, 0.0, 52.5},
  };
  for (int a = 0; a < kActivityCount; ++a) {
    if (durations[index % 5][a] > 0)
      p.activity_params[a].duration_median_minutes = durations[index % 5][a];
  }
  return p;
}

std::array<double, kActivityCount> activity_distribution(
    const ParticipantProfile& profile, Health health, TimeOfDay tod,
    bool weather_suitable) {
  std::array<double, kActivityCount> w = profile.activity_base;
  // Mild context modulation: meals in the morning bin, passive activities at
  // night and when feeling weak.
  for (int a = 0; a < kActivityCount; ++a) {
    if (w[a] <= 0) continue;
    if (tod == TimeOfDay::T1 && a == static_cast<int>(Activity::Eat)) w[a] *= 1.4;
    if (tod == TimeOfDay::T3) {
      if (a == static_cast<int>(Activity::Nap) ||
          a == static_cast<int>(Activity::Watch))
        w[a] *= 1.5;
      if (a == static_cast<int>(Activity::PC)) w[a] *= 0.6;
    }
    if (health == Health::Weak) {
      if (a == static_cast<int>(Activity::Nap) ||
          a == static_cast<int>(Activity::Watch))
        w[a] *= 1.25;
      if (a == static_cast<int>(Activity::Eat)) w[a] *= 0.85;
    }
    if (!weather_suitable && a == static_cast<int>(Activity::Watch)) w[a] *= 1.1;
  }
  double total = 0;
  for (double v : w) total += v;
  if (total <= 0) throw std::invalid_argument("profile has no activities");
  for (double& v : w) v /= total;
  return w;
}

// --------------------------------------------------------------------------
// Planning
// --------------------------------------------------------------------------

std::vector<RecordPlan> plan_study(const StudyConfig& config) {
  std::vector<ParticipantProfile> profiles = config.profiles;
  if (profiles.empty()) {
    for (int i = 0; i < config.participants; ++i)
      profiles.push_back(default_profile(i));
  }

  std::vector<RecordPlan> plans;
  for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
    const ParticipantProfile& prof = profiles[pi];
    int days = config.days_override > 0 ? config.days_override : prof.days;
    int record_counter = 0;
    for (int day = 0; day < days; ++day) {
      Rng rng(derive_seed(config.seed, pi, static_cast<std::uint64_t>(day), 0xDA));

      // Three-day cycle: normal day, workout day (weak after the workout),
      // post-workout day (all weak).
      int phase = day % 3;
      bool weather = std::uniform_real_distribution<>(0, 1)(rng) < 0.7;

      int n_records = std::max<int>(
          1, std::poisson_distribution<int>(prof.records_per_day)(rng));

      int normal_count;
      if (phase == 0) {
        normal_count = n_records;
      } else if (phase == 1) {
        normal_count = static_cast<int>(
            std::floor(prof.morning_normal_fraction * n_records + 0.5));
      } else {
        normal_count = 0;
      }

      CivilTime day_start{config.start_year, config.start_month, config.start_day,
                          6, 30, 0};
      std::int64_t t =
          to_linear_seconds(day_start) + static_cast<std::int64_t>(day) * 86400;
      t += static_cast<std::int64_t>(
          std::uniform_real_distribution<>(0, 3600)(rng));

      for (int r = 0; r < n_records; ++r) {
        RecordPlan plan;
        plan.participant_id = prof.id;
        plan.profile_index = static_cast<int>(pi);
        plan.day_number = day;
        plan.health = r < normal_count ? Health::Normal : Health::Weak;
        plan.weather_suitable = weather;
        plan.start = from_linear_seconds(t);

        auto dist = activity_distribution(prof, plan.health,
                                          time_of_day_bin(plan.start), weather);
        double u = std::uniform_real_distribution<>(0, 1)(rng);
        int act = 0;
        double cum = 0;
        for (int a = 0; a < kActivityCount; ++a) {
          cum += dist[a];
          if (u <= cum) {
            act = a;
            break;
          }
          act = a;
        }
        plan.activity = static_cast<Activity>(act);

        const auto& ap = prof.activity_params[act];
        double median = ap.duration_median_minutes * 60.0 * config.duration_scale;
        std::lognormal_distribution<double> dur(std::log(median),
                                                ap.duration_log_sigma);
        double duration = std::clamp(dur(rng), 90.0, 2.5 * 3600.0);
        plan.duration = std::round(duration / kFrameDt) * kFrameDt;

        plan.record_id =
            prof.id + "_d" + std::to_string(day) + "_r" + std::to_string(r);
        plan.seed = derive_seed(config.seed, pi, static_cast<std::uint64_t>(day),
                                static_cast<std::uint64_t>(r));
        plans.push_back(plan);

        ++record_counter;
        t += static_cast<std::int64_t>(plan.duration);
        t += static_cast<std::int64_t>(
            std::uniform_real_distribution<>(15 * 60, 75 * 60)(rng));
        // Keep the schedule inside the 06:00-anchored day.
        std::int64_t day_end = to_linear_seconds(day_start) +
                               static_cast<std::int64_t>(day) * 86400 +
                               (23 * 3600 - 6 * 3600 + 1800);
        if (t > day_end) break;
      }
    }
    (void)record_counter;
  }
  return plans;
}

// --------------------------------------------------------------------------
// Frame synthesis
// --------------------------------------------------------------------------

namespace {

// Quadrant rectangles of the human bbox in sub-box order TR, TL, BR, BL.
BBox quadrant_rect(const BBox& human, int q) {
  double hw = human.w / 2, hh = human.h / 2;
  switch (q) {
    case 0: return BBox{human.x + hw, human.y, hw, hh};
    case 1: return BBox{human.x, human.y, hw, hh};
    case 2: return BBox{human.x + hw, human.y + hh, hw, hh};
    default: return BBox{human.x, human.y + hh, hw, hh};
  }
}

struct EffectMultipliers {
  std::array<double, 4> speed{1, 1, 1, 1};
  std::array<double, 4> extent{1, 1, 1, 1};
  std::array<double, 3> gap_weights;
  double bout_duration = 1;
};

// Interpolates an effect multiplier toward 1 by the activity weight.
double blend(double mult, double w) { return 1.0 + (mult - 1.0) * w; }

EffectMultipliers effect_multipliers(const ParticipantProfile& profile,
                                     Activity activity, Health health,
                                     const GapMixture& gaps) {
  EffectMultipliers m;
  m.gap_weights = gaps.weights;
  if (health != Health::Weak) return m;
  double w = profile.activity_effect_weight[static_cast<int>(activity)];
  const HealthEffects& e = profile.effects;
  for (int q = 0; q < 4; ++q) {
    bool left = q == 1 || q == 3;  // sub-boxes 2 and 4
    bool top = q == 0 || q == 1;   // sub-boxes 1 and 2
    double speed = blend(e.global_speed, w);
    double extent = blend(e.global_extent, w);
    if (left) {
      speed *= blend(e.left_speed, w);
      extent *= blend(e.left_extent, w);
    }
    if (top) {
      speed *= blend(e.top_speed, w);
      extent *= blend(e.top_extent, w);
    }
    m.speed[q] = speed;
    m.extent[q] = extent;
  }
  m.gap_weights[0] *= blend(e.gap_short_weight, w);
  m.gap_weights[2] *= blend(e.gap_long_weight, w);
  m.bout_duration = blend(e.bout_duration, w);
  return m;
}

}  // namespace

MonitoringRecord generate_record(const ParticipantProfile& profile,
                                 const RecordPlan& plan) {
  if (plan.duration <= 0)
    throw std::invalid_argument("generate_record: duration must be positive");
  int act = static_cast<int>(plan.activity);
  if (act < 0 || act >= kActivityCount)
    throw std::invalid_argument("generate_record: activity must be observed");
  const ActivityMotionParams& ap = profile.activity_params[act];

  Rng rng(plan.seed);
  MonitoringRecord rec;
  rec.record_id = plan.record_id.empty()
                      ? profile.id + "_s" + std::to_string(plan.seed)
                      : plan.record_id;
  rec.participant_id = profile.id;
  rec.wall_clock_start = plan.start;
  rec.activity = plan.activity;
  rec.health = plan.health;

  // Environment context.
  rec.env.time_of_day = time_of_day_bin(plan.start);
  rec.env.weather_suitable = plan.weather_suitable;
  double base_luma = rec.env.time_of_day == TimeOfDay::T3 ? 42.0 : 168.0;
  rec.env.lighting_luma = std::clamp(
      base_luma + std::normal_distribution<>(0, 18)(rng), 0.0, 255.0);
  // One signature object per activity plus background clutter.
  rec.env.object_likelihoods.fill(0.0);
  rec.env.object_likelihoods[act] =
      std::uniform_real_distribution<>(0.65, 0.95)(rng);
  for (int i = 0; i < 5; ++i) {
    int slot = std::uniform_int_distribution<>(5, kObjectCount - 1)(rng);
    rec.env.object_likelihoods[slot] = std::max(
        rec.env.object_likelihoods[slot],
        std::uniform_real_distribution<>(0.0, 0.25)(rng));
  }

  EffectMultipliers eff =
      effect_multipliers(profile, plan.activity, plan.health, ap.gaps);

  // Human geometry, constant per record.
  BBox human{200.0 + std::uniform_int_distribution<>(-12, 12)(rng),
             40.0 + std::uniform_int_distribution<>(-8, 8)(rng),
             240.0 + std::uniform_int_distribution<>(-16, 16)(rng),
             360.0 + std::uniform_int_distribution<>(-16, 16)(rng)};
  const std::uint32_t human_px =
      static_cast<std::uint32_t>(0.55 * human.area());
  const std::uint32_t quadrant_cap = human_px / 4;

  // Alternating bout / gap timeline.
  struct Bout {
    double start, end;
    double speed_level;
    std::array<double, 4> share;
    double scale_jitter;
  };
  std::vector<Bout> bouts;
  double gw_total = eff.gap_weights[0] + eff.gap_weights[1] + eff.gap_weights[2];
  bool moving = std::uniform_real_distribution<>(0, 1)(rng) < 0.6;
  double t = 0;
  while (t < plan.duration) {
    if (moving) {
      std::lognormal_distribution<double> bout_dur(
          std::log(ap.bout_median_seconds * eff.bout_duration), ap.bout_log_sigma);
      double len = std::max(0.2, bout_dur(rng));
      Bout b;
      b.start = t;
      b.end = std::min(t + len, plan.duration);
      b.speed_level = std::lognormal_distribution<double>(
          std::log(ap.speed_median), ap.speed_log_sigma)(rng);
      for (int q = 0; q < 4; ++q) {
        b.share[q] = ap.quadrant_share[q] *
                     std::lognormal_distribution<double>(0.0, 0.25)(rng);
      }
      b.scale_jitter = std::lognormal_distribution<double>(0.0, 0.2)(rng);
      bouts.push_back(b);
      t = b.end;
    } else {
      double u = std::uniform_real_distribution<>(0, gw_total)(rng);
      int comp = u < eff.gap_weights[0]
                     ? 0
                     : (u < eff.gap_weights[0] + eff.gap_weights[1] ? 1 : 2);
      std::exponential_distribution<double> gap(1.0 / ap.gaps.mean_seconds[comp]);
      t += std::max(0.05, gap(rng));
    }
    moving = !moving;
  }

  // Frames at 10 Hz.
  const int n_frames = static_cast<int>(std::round(plan.duration / kFrameDt));
  rec.duration = n_frames * kFrameDt;
  rec.frames.reserve(n_frames);
  std::size_t bout_idx = 0;
  for (int i = 0; i < n_frames; ++i) {
    double ft = i * kFrameDt;
    while (bout_idx < bouts.size() && bouts[bout_idx].end <= ft) ++bout_idx;
    const Bout* bout = (bout_idx < bouts.size() && bouts[bout_idx].start <= ft)
                           ? &bouts[bout_idx]
                           : nullptr;

    FrameMotionSummary f;
    f.timestamp = ft;
    f.dt = kFrameDt;
    f.human_present = true;
    f.human_bbox = human;
    f.human_pixel_count = human_px;

    if (bout) {
      std::uint64_t total_px = 0;
      int strongest = 0;
      double strongest_share = -1;
      for (int q = 0; q < 4; ++q) {
        if (bout->share[q] > strongest_share) {
          strongest_share = bout->share[q];
          strongest = q;
        }
      }
      for (int q = 0; q < 4; ++q) {
        double jitter = std::lognormal_distribution<double>(0.0, 0.15)(rng);
        double frac = ap.density * bout->share[q] * eff.extent[q] * jitter;
        auto count = static_cast<std::uint32_t>(
            std::min<double>(quadrant_cap, std::round(quadrant_cap * frac)));
        if (q == strongest && count == 0) count = 1;  // keep bout frames moving
        f.quadrants[q].movement_pixel_count = count;
        if (count > 0) {
          double flow = bout->speed_level * eff.speed[q] *
                        std::lognormal_distribution<double>(
                            0.0, ap.frame_speed_sigma)(rng);
          f.quadrants[q].mean_flow_magnitude = flow;
          BBox rect = quadrant_rect(human, q);
          double area_frac = std::min(
              0.95, ap.scale * bout->scale_jitter * eff.extent[q]);
          double side = std::sqrt(area_frac);
          double bw = rect.w * side, bh = rect.h * side;
          double cx = rect.x + rect.w / 2 +
                      std::uniform_real_distribution<>(-0.08, 0.08)(rng) * rect.w;
          double cy = rect.y + rect.h / 2 +
                      std::uniform_real_distribution<>(-0.08, 0.08)(rng) * rect.h;
          BBox box{cx - bw / 2, cy - bh / 2, bw, bh};
          box.x = std::max(box.x, rect.x);
          box.y = std::max(box.y, rect.y);
          if (box.x + box.w > rect.x + rect.w) box.x = rect.x + rect.w - box.w;
          if (box.y + box.h > rect.y + rect.h) box.y = rect.y + rect.h - box.h;
          f.quadrants[q].movement_bbox = box;
        }
        total_px += count;
      }
      f.movement_pixel_count = static_cast<std::uint32_t>(total_px);
      double flow_num = 0;
      BBox whole;
      for (int q = 0; q < 4; ++q) {
        flow_num += double(f.quadrants[q].movement_pixel_count) *
                    f.quadrants[q].mean_flow_magnitude;
        whole = bbox_union(whole, f.quadrants[q].movement_bbox);
      }
      f.movement_bbox = whole;
      f.mean_flow_magnitude = total_px > 0 ? flow_num / double(total_px) : 0.0;
    }
    rec.frames.push_back(f);
  }
  return rec;
}

MonitoringRecord generate_record(const ParticipantProfile& profile,
                                 Activity activity, Health health,
                                 double duration_seconds, std::uint64_t seed) {
  RecordPlan plan;
  plan.participant_id = profile.id;
  plan.activity = activity;
  plan.health = health;
  plan.duration = std::round(duration_seconds / kFrameDt) * kFrameDt;
  plan.start = CivilTime{2024, 3, 4, 10, 0, 0};
  plan.seed = seed;
  return generate_record(profile, plan);
}

// --------------------------------------------------------------------------
// Study assembly
// --------------------------------------------------------------------------

namespace {

std::vector<ParticipantProfile> study_profiles(const StudyConfig& config) {
  if (!config.profiles.empty()) return config.profiles;
  std::vector<ParticipantProfile> out;
  for (int i = 0; i < config.participants; ++i) out.push_back(default_profile(i));
  return out;
}

}  // namespace

void generate_study_stream(const StudyConfig& config,
                           const std::function<void(MonitoringRecord&&)>& sink) {
  auto profiles = study_profiles(config);
  auto plans = plan_study(config);
  for (const auto& plan : plans) {
    sink(generate_record(profiles[plan.profile_index], plan));
  }
}

LabeledDataset generate_study(const StudyConfig& config) {
  LabeledDataset out;
  for (const auto& prof : study_profiles(config))
    out.participants.push_back(ParticipantInfo{prof.id, prof.handedness, prof.mirror});
  generate_study_stream(config,
                        [&](MonitoringRecord&& r) { out.records.push_back(std::move(r)); });
  return out;
}

FeatureTable featurize_study(const StudyConfig& config, double window_seconds) {
  auto profiles = study_profiles(config);
  auto plans = plan_study(config);
  std::vector<FeatureTable> parts(plans.size());
  parallel_for(plans.size(), [&](std::size_t i) {
    MonitoringRecord rec = generate_record(profiles[plans[i].profile_index], plans[i]);
    parts[i] = featurize_record(rec, window_seconds,
                                profiles[plans[i].profile_index].mirror);
  });
  FeatureTable out;
  for (auto& p : parts) {
    for (std::size_t r = 0; r < p.size(); ++r) {
      out.values.push_back(p.values[r]);
      out.defined.push_back(p.defined[r]);
      out.health.push_back(p.health[r]);
      out.activity.push_back(p.activity[r]);
      out.meta.push_back(std::move(p.meta[r]));
    }
  }
  return out;
}

}  // namespace frailwatch
