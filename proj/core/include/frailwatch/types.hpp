#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "frailwatch/civil_time.hpp"

namespace frailwatch {

// Thrown when a log line cannot be decoded at all.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg, int line = -1)
      : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + msg
                                     : msg),
        line(line) {}
  int line;
};

// Thrown when decoded data violates a schema invariant; the message names the
// invariant.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg, int line = -1)
      : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + msg
                                     : msg),
        line(line) {}
  int line;
};

struct BBox {
  double x = 0, y = 0, w = 0, h = 0;

  bool empty() const { return w <= 0.0 || h <= 0.0; }
  double area() const { return empty() ? 0.0 : w * h; }
  bool contains(const BBox& inner) const {
    if (inner.empty()) return true;
    return inner.x >= x && inner.y >= y && inner.x + inner.w <= x + w + 1e-9 &&
           inner.y + inner.h <= y + h + 1e-9;
  }
  bool operator==(const BBox&) const = default;
};

BBox bbox_union(const BBox& a, const BBox& b);

// Quadrant grid over the human bounding box, image coordinates (y grows
// downward): index 0 -> sub-box 1 = top-right, 1 -> 2 = top-left,
// 2 -> 3 = bottom-right, 3 -> 4 = bottom-left.
// Body regions: Top = {1,2}, Right = {1,3}, Left = {2,4}.
inline constexpr int kQuadrantCount = 4;

struct QuadrantStats {
  std::uint32_t movement_pixel_count = 0;
  BBox movement_bbox;
  double mean_flow_magnitude = 0.0;  // px/s over moving pixels, 0 when none

  bool operator==(const QuadrantStats&) const = default;
};

// One per-frame motion measurement, the atomic log unit.
struct FrameMotionSummary {
  double timestamp = 0.0;  // seconds since record start
  double dt = 0.0;         // frame interval, > 0
  bool human_present = false;
  BBox human_bbox;
  std::uint32_t human_pixel_count = 0;
  std::uint32_t movement_pixel_count = 0;
  BBox movement_bbox;  // empty allowed
  double mean_flow_magnitude = 0.0;
  std::array<QuadrantStats, kQuadrantCount> quadrants{};

  bool operator==(const FrameMotionSummary&) const = default;
};

enum class Activity : int { Read = 0, PC = 1, Eat = 2, Nap = 3, Watch = 4, Unknown = -1 };
enum class Health : int { Normal = 0, Weak = 1, Unknown = -1 };

inline constexpr int kActivityCount = 5;
inline constexpr int kHealthStates = 2;

const char* activity_name(Activity a);
const char* health_name(Health h);
Activity parse_activity(const std::string& s);  // throws std::invalid_argument
Health parse_health(const std::string& s);

inline constexpr int kObjectCount = 20;

struct EnvContext {
  double lighting_luma = 0.0;  // [0,255]
  TimeOfDay time_of_day = TimeOfDay::T1;
  bool weather_suitable = true;
  std::array<double, kObjectCount> object_likelihoods{};

  bool operator==(const EnvContext&) const = default;
};

// One activity session: frame stream plus context and labels.
struct MonitoringRecord {
  std::string record_id;
  std::string participant_id;
  CivilTime wall_clock_start;
  double duration = 0.0;  // seconds
  Activity activity = Activity::Unknown;
  Health health = Health::Unknown;
  EnvContext env;
  std::vector<FrameMotionSummary> frames;

  bool operator==(const MonitoringRecord&) const = default;
};

struct ParticipantInfo {
  std::string id;
  std::string handedness = "R";
  // When true, image-left/right are swapped during feature extraction so the
  // "Left" features track the participant's non-dominant side.
  bool mirror = false;

  bool operator==(const ParticipantInfo&) const = default;
};

struct LabeledDataset {
  std::vector<MonitoringRecord> records;
  std::vector<ParticipantInfo> participants;

  const ParticipantInfo* find_participant(const std::string& id) const;
  bool operator==(const LabeledDataset&) const = default;
};

// Validation. Throws ValidationError naming the violated invariant; `line`
// is carried into the error when the caller knows it.
void validate_env(const EnvContext& env, int line = -1);
void validate_frame(const FrameMotionSummary& f, int line = -1);
void validate_record(const MonitoringRecord& r, int line = -1);
void validate_dataset(const LabeledDataset& d);

// Rec. 601 luma of an RGB triple, each channel in [0,255].
// Throws std::domain_error on out-of-range channels.
double luma601(double r, double g, double b);

}  // namespace frailwatch
