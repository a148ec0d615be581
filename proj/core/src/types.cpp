#include "frailwatch/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace frailwatch {

BBox bbox_union(const BBox& a, const BBox& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  double x0 = std::min(a.x, b.x);
  double y0 = std::min(a.y, b.y);
  double x1 = std::max(a.x + a.w, b.x + b.w);
  double y1 = std::max(a.y + a.h, b.y + b.h);
  return BBox{x0, y0, x1 - x0, y1 - y0};
}

const char* activity_name(Activity a) {
  switch (a) {
    case Activity::Read: return "read";
    case Activity::PC: return "PC";
    case Activity::Eat: return "eat";
    case Activity::Nap: return "nap";
    case Activity::Watch: return "watch";
    default: return "UNKNOWN";
  }
}

const char* health_name(Health h) {
  switch (h) {
    case Health::Normal: return "normal";
    case Health::Weak: return "weak";
    default: return "UNKNOWN";
  }
}

Activity parse_activity(const std::string& s) {
  if (s == "read") return Activity::Read;
  if (s == "PC") return Activity::PC;
  if (s == "eat") return Activity::Eat;
  if (s == "nap") return Activity::Nap;
  if (s == "watch") return Activity::Watch;
  if (s == "UNKNOWN") return Activity::Unknown;
  throw std::invalid_argument("unknown activity label: '" + s + "'");
}

Health parse_health(const std::string& s) {
  if (s == "normal") return Health::Normal;
  if (s == "weak") return Health::Weak;
  if (s == "UNKNOWN") return Health::Unknown;
  throw std::invalid_argument("unknown health label: '" + s + "'");
}

const ParticipantInfo* LabeledDataset::find_participant(const std::string& id) const {
  for (const auto& p : participants)
    if (p.id == id) return &p;
  return nullptr;
}

void validate_env(const EnvContext& env, int line) {
  if (!(env.lighting_luma >= 0.0 && env.lighting_luma <= 255.0))
    throw ValidationError("lighting_luma outside [0,255]", line);
  for (double v : env.object_likelihoods) {
    if (!(v >= 0.0 && v <= 1.0))
      throw ValidationError("object likelihood outside [0,1]", line);
  }
}

void validate_frame(const FrameMotionSummary& f, int line) {
  if (!(f.timestamp >= 0.0))
    throw ValidationError("frame timestamp must be non-negative", line);
  if (!(f.dt > 0.0)) throw ValidationError("frame dt must be positive", line);
  if (!(f.mean_flow_magnitude >= 0.0))
    throw ValidationError("mean_flow_magnitude must be non-negative", line);
  if (f.human_present && f.movement_pixel_count > f.human_pixel_count)
    throw ValidationError(
        "movement_pixel_count exceeds human_pixel_count while human present", line);

  std::uint64_t quadrant_sum = 0;
  for (const auto& q : f.quadrants) {
    quadrant_sum += q.movement_pixel_count;
    if (!(q.mean_flow_magnitude >= 0.0))
      throw ValidationError("quadrant mean_flow_magnitude must be non-negative",
                            line);
  }
  if (quadrant_sum != f.movement_pixel_count)
    throw ValidationError(
        "quadrant movement pixel counts do not sum to whole-body count", line);

  if (!f.movement_bbox.empty() && !f.human_bbox.empty() &&
      !f.human_bbox.contains(f.movement_bbox))
    throw ValidationError("movement_bbox not contained in human_bbox", line);
}

void validate_record(const MonitoringRecord& r, int line) {
  validate_env(r.env, line);
  if (r.env.time_of_day != time_of_day_bin(r.wall_clock_start))
    throw ValidationError("time_of_day does not match wall_clock_start", line);
  double prev = -1.0;
  for (const auto& f : r.frames) {
    validate_frame(f, line);
    if (f.timestamp <= prev)
      throw ValidationError("frame timestamps not strictly increasing", line);
    prev = f.timestamp;
  }
  if (!r.frames.empty()) {
    const auto& last = r.frames.back();
    double end = last.timestamp + last.dt;
    if (std::abs(r.duration - end) > last.dt + 1e-9)
      throw ValidationError(
          "record duration does not match last frame end within one frame", line);
  }
}

void validate_dataset(const LabeledDataset& d) {
  std::set<std::string> ids;
  for (const auto& r : d.records) {
    validate_record(r);
    if (!ids.insert(r.record_id).second)
      throw ValidationError("duplicate record_id: " + r.record_id);
  }
  // Per-participant records must be ordered by wall clock.
  std::set<std::string> participants;
  for (const auto& r : d.records) participants.insert(r.participant_id);
  for (const auto& pid : participants) {
    std::int64_t prev = INT64_MIN;
    for (const auto& r : d.records) {
      if (r.participant_id != pid) continue;
      std::int64_t t = to_linear_seconds(r.wall_clock_start);
      if (t < prev)
        throw ValidationError("records for participant " + pid +
                              " not ordered by wall clock");
      prev = t;
    }
  }
}

double luma601(double r, double g, double b) {
  auto in_range = [](double c) { return c >= 0.0 && c <= 255.0; };
  if (!in_range(r) || !in_range(g) || !in_range(b))
    throw std::domain_error("luma601: channel outside [0,255]");
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

}  // namespace frailwatch
