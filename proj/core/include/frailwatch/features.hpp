#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frailwatch/types.hpp"

namespace frailwatch {

// A motionless gap must last at least this long to count as inactivity;
// shorter pauses stay inside the surrounding movement.
inline constexpr double kMinInactivitySeconds = 1.0;

enum class SegmentKind { Inactivity = 0, Movement = 1 };

struct Segment {
  SegmentKind kind;
  double start;  // seconds
  double end;    // exclusive

  double duration() const { return end - start; }
};

// Segments a frame stream into alternating movement/inactivity spans that
// tile [first frame start, last frame end). A frame is "motion" iff its
// movement_pixel_count > 0; maximal motionless runs of >= 1 s become
// inactivity, everything else is movement.
std::vector<Segment> derive_segments(std::span<const FrameMotionSummary> frames);

// Duration-distribution buckets (seconds):
//   6 disjoint: [.,2) [2,5) [5,10) [10,30) [30,60) [60,inf)
//   4 cumulative: [2,inf) [5,inf) [10,inf) [30,inf)
// Values are percentages of the duration count; all zeros when there are no
// durations. Any duration below 2 s lands in the first bucket so the disjoint
// buckets always sum to 100 (inactivity durations are >= 1 s by definition,
// movement bouts may be shorter).
inline constexpr int kDurationBuckets = 10;
std::array<double, kDurationBuckets> duration_distribution(
    std::span<const double> durations);
std::array<double, kDurationBuckets> duration_distribution(
    std::span<const Segment> segments, SegmentKind kind);

struct QuartileMeans {
  double q1 = 0, q2 = 0, q3 = 0, q4 = 0;
};

// Weighted quartile-band means: samples sorted ascending, band boundaries at
// 25/50/75% of total weight, samples straddling a boundary split their weight
// across bands. Q4 is the mean of the fastest quarter. Throws on empty input.
QuartileMeans quartile_means(std::span<const double> values,
                             std::span<const double> weights);

// ---------------------------------------------------------------------------
// Feature vector layout. The 66 features of the extraction table occupy 85
// columns once the 20 object likelihoods are expanded:
//   col 0..2   F1..F3, cols 3..22  F4_01..F4_20, cols 23..84  F5..F66.
// Feature groups (66 of them) are the ranking granularity: group 4 spans the
// 20 object columns, every other group is a single column.
// ---------------------------------------------------------------------------
inline constexpr int kFeatureColumns = 85;
inline constexpr int kFeatureGroups = 66;

int column_of_feature(int feature_number);        // F5 -> 23; F4 -> 3 (first col)
const std::string& column_name(int column);       // "F4_07", "F31", ...
int group_of_column(int column);                  // 0-based group index
int group_first_column(int group);
int group_column_count(int group);
const std::string& group_label(int group);        // "V(L-MPO)", "Inact.geq60s", ...
std::optional<int> group_by_label(const std::string& label);

struct FeatureVector {
  std::array<double, kFeatureColumns> values{};
  // false => value undefined for this window (empty denominator); the value
  // slot holds 0 so vectors stay fixed-length for the models.
  std::array<bool, kFeatureColumns> defined{};
};

struct Window {
  double t0 = 0;
  double t1 = 0;
};

// Extracts the full feature vector over frames intersecting [w.t0, w.t1).
// MPO statistics use frames inside movement segments only; TRL statistics
// use the quadrant unions Top={1,2}, Right={1,3}, Left={2,4} (after applying
// `mirror`, which swaps image-left and image-right quadrants).
// Throws std::invalid_argument when no frame intersects the window.
FeatureVector extract_features(const MonitoringRecord& rec, Window w, bool mirror);
FeatureVector extract_features(const MonitoringRecord& rec, bool mirror = false);

}  // namespace frailwatch
