#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "frailwatch/classifiers.hpp"

namespace frailwatch {

// The paper's temporal window sweep set.
inline const std::vector<double> kDefaultWindowSweep = {30, 60, 120, 300, 600, 1200};

struct WindowingConfig {
  double window_seconds = 300;
  double partial_keep_fraction = 0.5;  // trailing partial kept when >= W/2
  int tie_break_label = 1;             // majority-vote ties resolve to "weak"
};

// Consecutive [kW, (k+1)W) windows from record start; the trailing partial is
// kept when it reaches W/2; records shorter than W/2 become one whole-record
// window.
std::vector<Window> segment_windows(double record_duration, double window_seconds);

// Most frequent label; exact ties resolve to "weak" (a false alarm is cheaper
// than a miss for a monitoring system). Throws on empty input.
int majority_vote(std::span<const int> labels);

struct SpanKey {
  std::int64_t day = 0;
  int bin = 0;  // 8-hour bin, -1 for the whole-day span

  auto operator<=>(const SpanKey&) const = default;
};

struct SpanLabels {
  std::map<std::int64_t, int> daily;
  std::map<SpanKey, int> eight_hour;
};

// Majority-vote aggregation of record-level labels into 06:00-anchored 8-hour
// and daily spans.
SpanLabels aggregate_spans(
    const std::vector<std::pair<CivilTime, int>>& record_labels);

struct SelectionResult {
  std::vector<int> activities;      // chosen activity subset (enum ints)
  std::vector<int> features;        // chosen columns, in entry order
  std::vector<double> trace;        // F1-macro after each forward step
  double best_f1 = 0;               // best prefix F1-macro
  double coverage = 1.0;            // selected rows / all rows
  bool coverage_fallback = false;   // no subset passed the coverage floor
  std::vector<std::string> warnings;

  std::string to_json() const;
};

// Greedy forward feature selection by cross-validated F1-macro over single
// columns; the returned feature list is the first best prefix of the trace.
SelectionResult forward_select(const ClassifierSpec& spec, const FeatureTable& t,
                               const std::vector<std::size_t>& rows,
                               int max_features = 30, int k = 5,
                               std::uint64_t seed = 0);

// Enumerates non-empty activity subsets (skipping those at or below the
// coverage floor and the singleton of the most frequent activity), runs
// forward selection on each survivor and returns the best. Falls back to all
// activities when nothing passes the floor.
SelectionResult search_activity_subsets(const ClassifierSpec& spec,
                                        const FeatureTable& t,
                                        const std::vector<std::size_t>& rows,
                                        double coverage_min = 0.4,
                                        int max_features = 30, int k = 5,
                                        std::uint64_t seed = 0);

struct LevelScores {
  double record_macro = 0, record_micro = 0;
  double eight_hour_macro = 0, eight_hour_micro = 0;
  double daily_macro = 0, daily_micro = 0;
};

// Cross-validates per-window rows, majority-votes out-of-fold predictions to
// record level, then aggregates records into 8-hour/daily spans; truth labels
// aggregate the same way.
LevelScores evaluate_levels(const ClassifierSpec& spec, const FeatureTable& t,
                            const std::vector<std::size_t>& rows,
                            const std::vector<int>& columns, int k,
                            std::uint64_t seed);

struct SweepRow {
  std::string participant;
  double window_seconds = 0;
  bool whole_record = false;  // window longer than every record
  LevelScores scores;
};

// Per-participant window sweep over the given sizes (defaults to the paper
// set), using all feature columns.
std::vector<SweepRow> sweep_windows(const ClassifierSpec& spec,
                                    const LabeledDataset& dataset,
                                    std::span<const double> window_set,
                                    int k = 5, std::uint64_t seed = 0);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace frailwatch
