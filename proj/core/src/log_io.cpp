#include "frailwatch/log_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace frailwatch {

using nlohmann::json;

namespace {

json bbox_to_json(const BBox& b) {
  if (b.empty()) return json::array();
  return json::array({b.x, b.y, b.w, b.h});
}

BBox bbox_from_json(const json& j, int line) {
  if (!j.is_array()) throw ParseError("bbox must be an array", line);
  if (j.empty()) return BBox{};
  if (j.size() != 4) throw ParseError("bbox must have 0 or 4 entries", line);
  return BBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
              j[3].get<double>()};
}

json env_to_json(const EnvContext& e) {
  return json{{"lighting_luma", e.lighting_luma},
              {"time_of_day", time_of_day_name(e.time_of_day)},
              {"weather_suitable", e.weather_suitable},
              {"object_likelihoods", e.object_likelihoods}};
}

EnvContext env_from_json(const json& j, int line) {
  EnvContext e;
  e.lighting_luma = j.at("lighting_luma").get<double>();
  std::string tod = j.at("time_of_day").get<std::string>();
  if (tod == "T1")
    e.time_of_day = TimeOfDay::T1;
  else if (tod == "T2")
    e.time_of_day = TimeOfDay::T2;
  else if (tod == "T3")
    e.time_of_day = TimeOfDay::T3;
  else
    throw ParseError("unknown time_of_day: '" + tod + "'", line);
  e.weather_suitable = j.at("weather_suitable").get<bool>();
  const auto& objs = j.at("object_likelihoods");
  if (!objs.is_array() || objs.size() != kObjectCount)
    throw ParseError("object_likelihoods must have 20 entries", line);
  for (int i = 0; i < kObjectCount; ++i) e.object_likelihoods[i] = objs[i].get<double>();
  return e;
}

}  // namespace

std::string record_header_json(const MonitoringRecord& r) {
  json j{{"type", "record"},
         {"record_id", r.record_id},
         {"participant_id", r.participant_id},
         {"wall_clock_start", format_civil(r.wall_clock_start)},
         {"duration", r.duration},
         {"activity", activity_name(r.activity)},
         {"health", health_name(r.health)},
         {"env", env_to_json(r.env)}};
  return j.dump();
}

std::string frame_json(const FrameMotionSummary& f) {
  json quads = json::array();
  for (const auto& q : f.quadrants) {
    quads.push_back(json{{"movement_pixel_count", q.movement_pixel_count},
                         {"movement_bbox", bbox_to_json(q.movement_bbox)},
                         {"mean_flow_magnitude", q.mean_flow_magnitude}});
  }
  json j{{"type", "frame"},
         {"t", f.timestamp},
         {"dt", f.dt},
         {"human_present", f.human_present},
         {"human_bbox", bbox_to_json(f.human_bbox)},
         {"human_pixel_count", f.human_pixel_count},
         {"movement_pixel_count", f.movement_pixel_count},
         {"movement_bbox", bbox_to_json(f.movement_bbox)},
         {"mean_flow_magnitude", f.mean_flow_magnitude},
         {"quadrants", quads}};
  return j.dump();
}

void serialize_record(const MonitoringRecord& r, std::ostream& out) {
  out << record_header_json(r) << '\n';
  for (const auto& f : r.frames) out << frame_json(f) << '\n';
}

void serialize_log(const LabeledDataset& d, std::ostream& out) {
  for (const auto& r : d.records) serialize_record(r, out);
}

void serialize_log_file(const LabeledDataset& d, const std::string& path) {
  std::ostringstream ss;
  serialize_log(d, ss);
  write_file_atomic(path, ss.str());
}

LabeledDataset parse_log(std::istream& in) {
  LabeledDataset out;
  MonitoringRecord current;
  bool have_record = false;
  int record_line = -1;

  auto flush = [&] {
    if (!have_record) return;
    validate_record(current, record_line);
    out.records.push_back(std::move(current));
    current = MonitoringRecord{};
    have_record = false;
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    std::string type;
    try {
      type = j.at("type").get<std::string>();
      if (type == "record") {
        flush();
        have_record = true;
        record_line = line_no;
        current.record_id = j.at("record_id").get<std::string>();
        current.participant_id = j.at("participant_id").get<std::string>();
        current.wall_clock_start = parse_civil(j.at("wall_clock_start").get<std::string>());
        current.duration = j.at("duration").get<double>();
        current.activity = parse_activity(j.at("activity").get<std::string>());
        current.health = parse_health(j.at("health").get<std::string>());
        current.env = env_from_json(j.at("env"), line_no);
      } else if (type == "frame") {
        if (!have_record)
          throw ParseError("frame line before any record header", line_no);
        FrameMotionSummary f;
        f.timestamp = j.at("t").get<double>();
        f.dt = j.at("dt").get<double>();
        f.human_present = j.at("human_present").get<bool>();
        f.human_bbox = bbox_from_json(j.at("human_bbox"), line_no);
        f.human_pixel_count = j.at("human_pixel_count").get<std::uint32_t>();
        f.movement_pixel_count = j.at("movement_pixel_count").get<std::uint32_t>();
        f.movement_bbox = bbox_from_json(j.at("movement_bbox"), line_no);
        f.mean_flow_magnitude = j.at("mean_flow_magnitude").get<double>();
        const auto& quads = j.at("quadrants");
        if (!quads.is_array() || quads.size() != kQuadrantCount)
          throw ParseError("quadrants must have 4 entries", line_no);
        for (int q = 0; q < kQuadrantCount; ++q) {
          f.quadrants[q].movement_pixel_count =
              quads[q].at("movement_pixel_count").get<std::uint32_t>();
          f.quadrants[q].movement_bbox =
              bbox_from_json(quads[q].at("movement_bbox"), line_no);
          f.quadrants[q].mean_flow_magnitude =
              quads[q].at("mean_flow_magnitude").get<double>();
        }
        validate_frame(f, line_no);
        current.frames.push_back(f);
      } else {
        throw ParseError("unknown line type: '" + type + "'", line_no);
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("missing or mistyped field: ") + e.what(),
                       line_no);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  flush();

  // Synthesize participant metadata for whoever appears in the log.
  for (const auto& r : out.records) {
    if (!out.find_participant(r.participant_id))
      out.participants.push_back(ParticipantInfo{r.participant_id, "R", false});
  }
  validate_dataset(out);
  return out;
}

LabeledDataset parse_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open log file: " + path);
  return parse_log(in);
}

void write_manifest(const LabeledDataset& d,
                    const std::vector<std::string>& record_files,
                    const std::string& manifest_path) {
  json participants = json::array();
  for (const auto& p : d.participants) {
    participants.push_back(json{
        {"id", p.id}, {"handedness", p.handedness}, {"mirror", p.mirror}});
  }
  json j{{"version", 1},
         {"record_files", record_files},
         {"participants", participants}};
  write_file_atomic(manifest_path, j.dump(2) + "\n");
}

LabeledDataset load_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ParseError("cannot open manifest: " + manifest_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed manifest JSON: ") + e.what());
  }
  LabeledDataset out;
  std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
  for (const auto& f : j.at("record_files")) {
    auto part = parse_log_file((base / f.get<std::string>()).string());
    for (auto& r : part.records) out.records.push_back(std::move(r));
  }
  out.participants.clear();
  for (const auto& p : j.at("participants")) {
    ParticipantInfo info;
    info.id = p.at("id").get<std::string>();
    info.handedness = p.value("handedness", "R");
    info.mirror = p.value("mirror", false);
    out.participants.push_back(info);
  }
  for (const auto& r : out.records) {
    if (!out.find_participant(r.participant_id))
      out.participants.push_back(ParticipantInfo{r.participant_id, "R", false});
  }
  validate_dataset(out);
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace frailwatch
