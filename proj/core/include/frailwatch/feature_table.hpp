#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "frailwatch/features.hpp"
#include "frailwatch/types.hpp"

namespace frailwatch {

// Discrete environment observation as consumed by the Bayesian network.
// Everything here is derivable from the feature columns F1..F4, so a feature
// CSV is self-contained evidence.
struct EnvObservation {
  int time_of_day = 0;      // 0..2
  int weather = 0;          // 0/1
  double lighting = 0.0;    // raw luma; terciles are model-side
  int dominant_object = kObjectCount;  // argmax of F4_*, kObjectCount = none
};

struct FeatureRowMeta {
  std::string record_id;
  std::string participant_id;
  CivilTime window_start;   // record start + window offset
  std::int64_t day = 0;     // span_day_index(window_start)
  int window_index = 0;
};

// One row per (record, window). health/activity use the enum int values with
// -1 for UNKNOWN.
struct FeatureTable {
  std::vector<std::array<double, kFeatureColumns>> values;
  std::vector<std::array<bool, kFeatureColumns>> defined;
  std::vector<int> health;
  std::vector<int> activity;
  std::vector<FeatureRowMeta> meta;

  std::size_t size() const { return values.size(); }
  void append(const FeatureVector& fv, int health_label, int activity_label,
              FeatureRowMeta m);
  FeatureTable select(const std::vector<std::size_t>& rows) const;
};

EnvObservation env_from_row(const std::array<double, kFeatureColumns>& values);

// Splits the record into consecutive windows of `window_seconds` (0 means one
// whole-record window) and extracts per-window features.
FeatureTable featurize_record(const MonitoringRecord& rec, double window_seconds,
                              bool mirror);

// Featurizes every record, honoring each participant's mirror flag (overridden
// by `force_mirror` when set). Parallel across records, deterministic output.
FeatureTable featurize_dataset(const LabeledDataset& d, double window_seconds,
                               int force_mirror = -1);

// CSV export: meta + label columns, then the 85 feature columns; undefined
// cells are written as empty fields and read back as undefined.
void write_feature_csv(const FeatureTable& t, std::ostream& out);
void write_feature_csv_file(const FeatureTable& t, const std::string& path);
FeatureTable read_feature_csv(std::istream& in);
FeatureTable read_feature_csv_file(const std::string& path);

}  // namespace frailwatch
