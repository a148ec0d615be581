#include "frailwatch/feature_table.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "frailwatch/log_io.hpp"
#include "frailwatch/parallel.hpp"
#include "frailwatch/pipeline.hpp"

namespace frailwatch {

void FeatureTable::append(const FeatureVector& fv, int health_label,
                          int activity_label, FeatureRowMeta m) {
  values.push_back(fv.values);
  defined.push_back(fv.defined);
  health.push_back(health_label);
  activity.push_back(activity_label);
  meta.push_back(std::move(m));
}

FeatureTable FeatureTable::select(const std::vector<std::size_t>& rows) const {
  FeatureTable out;
  out.values.reserve(rows.size());
  for (std::size_t r : rows) {
    out.values.push_back(values[r]);
    out.defined.push_back(defined[r]);
    out.health.push_back(health[r]);
    out.activity.push_back(activity[r]);
    out.meta.push_back(meta[r]);
  }
  return out;
}

EnvObservation env_from_row(const std::array<double, kFeatureColumns>& values) {
  EnvObservation e;
  e.lighting = values[0];
  e.time_of_day = static_cast<int>(std::lround(values[1])) - 1;
  if (e.time_of_day < 0) e.time_of_day = 0;
  if (e.time_of_day > 2) e.time_of_day = 2;
  e.weather = values[2] >= 0.5 ? 1 : 0;
  double best = 0.0;
  e.dominant_object = kObjectCount;  // none
  for (int i = 0; i < kObjectCount; ++i) {
    if (values[3 + i] > best) {
      best = values[3 + i];
      e.dominant_object = i;
    }
  }
  return e;
}

FeatureTable featurize_record(const MonitoringRecord& rec, double window_seconds,
                              bool mirror) {
  FeatureTable out;
  std::vector<Window> windows;
  if (window_seconds <= 0) {
    windows.push_back(Window{0.0, rec.duration});
  } else {
    windows = segment_windows(rec.duration, window_seconds);
  }
  for (std::size_t i = 0; i < windows.size(); ++i) {
    FeatureVector fv = extract_features(rec, windows[i], mirror);
    FeatureRowMeta m;
    m.record_id = rec.record_id;
    m.participant_id = rec.participant_id;
    m.window_start =
        add_seconds(rec.wall_clock_start, static_cast<std::int64_t>(windows[i].t0));
    m.day = span_day_index(m.window_start);
    m.window_index = static_cast<int>(i);
    out.append(fv, static_cast<int>(rec.health), static_cast<int>(rec.activity),
               std::move(m));
  }
  return out;
}

FeatureTable featurize_dataset(const LabeledDataset& d, double window_seconds,
                               int force_mirror) {
  std::vector<FeatureTable> parts(d.records.size());
  parallel_for(d.records.size(), [&](std::size_t i) {
    const auto& rec = d.records[i];
    bool mirror = false;
    if (force_mirror >= 0) {
      mirror = force_mirror != 0;
    } else if (const ParticipantInfo* p = d.find_participant(rec.participant_id)) {
      mirror = p->mirror;
    }
    parts[i] = featurize_record(rec, window_seconds, mirror);
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

// --------------------------------------------------------------------------
// CSV
// --------------------------------------------------------------------------

namespace {

// Shortest round-trip double formatting, same contract as the JSON writer.
std::string format_double(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_feature_csv(const FeatureTable& t, std::ostream& out) {
  out << "record_id,participant,day_index,window_index,window_start,activity,health";
  for (int c = 0; c < kFeatureColumns; ++c) out << ',' << column_name(c);
  out << '\n';
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto& m = t.meta[r];
    out << m.record_id << ',' << m.participant_id << ',' << m.day << ','
        << m.window_index << ',' << format_civil(m.window_start) << ','
        << activity_name(static_cast<Activity>(t.activity[r])) << ','
        << health_name(static_cast<Health>(t.health[r]));
    for (int c = 0; c < kFeatureColumns; ++c) {
      out << ',';
      if (t.defined[r][c]) out << format_double(t.values[r][c]);
    }
    out << '\n';
  }
}

void write_feature_csv_file(const FeatureTable& t, const std::string& path) {
  std::ostringstream ss;
  write_feature_csv(t, ss);
  write_file_atomic(path, ss.str());
}

FeatureTable read_feature_csv(std::istream& in) {
  FeatureTable t;
  std::string line;
  if (!std::getline(in, line)) return t;
  auto header = split_csv_line(line);
  const std::size_t expected = 7 + kFeatureColumns;
  if (header.size() != expected)
    throw ParseError("feature CSV header has " + std::to_string(header.size()) +
                     " columns, expected " + std::to_string(expected));
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != expected)
      throw ParseError("feature CSV row has wrong column count", line_no);
    FeatureRowMeta m;
    m.record_id = cells[0];
    m.participant_id = cells[1];
    m.day = std::stoll(cells[2]);
    m.window_index = std::stoi(cells[3]);
    m.window_start = parse_civil(cells[4]);
    int activity = static_cast<int>(parse_activity(cells[5]));
    int health = static_cast<int>(parse_health(cells[6]));
    std::array<double, kFeatureColumns> vals{};
    std::array<bool, kFeatureColumns> def{};
    for (int c = 0; c < kFeatureColumns; ++c) {
      const std::string& cell = cells[7 + c];
      if (cell.empty()) {
        vals[c] = 0.0;
        def[c] = false;
      } else {
        vals[c] = std::strtod(cell.c_str(), nullptr);
        def[c] = true;
      }
    }
    t.values.push_back(vals);
    t.defined.push_back(def);
    t.health.push_back(health);
    t.activity.push_back(activity);
    t.meta.push_back(std::move(m));
  }
  return t;
}

FeatureTable read_feature_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open feature CSV: " + path);
  return read_feature_csv(in);
}

}  // namespace frailwatch
