#include "frailwatch/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace frailwatch {

namespace {

struct ClippedFrame {
  const FrameMotionSummary* f;
  double start, end;  // clipped to window
  double weight() const { return end - start; }
  bool moving() const { return f->movement_pixel_count > 0; }
};

// Builds alternating segments over already-clipped frames and tags each frame
// with its segment kind. Motionless runs shorter than the inactivity minimum
// are folded into the surrounding movement.
std::vector<Segment> segments_from_clipped(const std::vector<ClippedFrame>& cf,
                                           std::vector<bool>* frame_in_movement) {
  struct Run {
    bool moving;
    double start, end;
  };
  std::vector<Run> runs;
  std::vector<std::pair<std::size_t, std::size_t>> run_frames;  // [first, last]
  for (std::size_t i = 0; i < cf.size(); ++i) {
    if (!runs.empty() && runs.back().moving == cf[i].moving()) {
      runs.back().end = cf[i].end;
      run_frames.back().second = i;
    } else {
      runs.push_back(Run{cf[i].moving(), cf[i].start, cf[i].end});
      run_frames.emplace_back(i, i);
    }
  }

  // A motionless run qualifies as inactivity only when long enough. The
  // epsilon keeps runs that land exactly on the threshold from flipping under
  // timestamp rounding.
  std::vector<bool> is_inactivity(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    is_inactivity[i] = !runs[i].moving &&
                       runs[i].end - runs[i].start >= kMinInactivitySeconds - 1e-9;
  }

  std::vector<Segment> out;
  if (frame_in_movement) frame_in_movement->assign(cf.size(), false);
  for (std::size_t i = 0; i < runs.size();) {
    if (is_inactivity[i]) {
      out.push_back(Segment{SegmentKind::Inactivity, runs[i].start, runs[i].end});
      ++i;
    } else {
      std::size_t j = i;
      double end = runs[i].end;
      while (j + 1 < runs.size() && !is_inactivity[j + 1]) {
        ++j;
        end = runs[j].end;
      }
      out.push_back(Segment{SegmentKind::Movement, runs[i].start, end});
      if (frame_in_movement) {
        for (std::size_t r = i; r <= j; ++r)
          for (std::size_t k = run_frames[r].first; k <= run_frames[r].second; ++k)
            (*frame_in_movement)[k] = true;
      }
      i = j + 1;
    }
  }
  return out;
}

double weighted_mean(const std::vector<double>& v, const std::vector<double>& w) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    num += v[i] * w[i];
    den += w[i];
  }
  return den > 0 ? num / den : 0.0;
}

double weighted_pop_std(const std::vector<double>& v, const std::vector<double>& w) {
  double mean = weighted_mean(v, w);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    num += w[i] * (v[i] - mean) * (v[i] - mean);
    den += w[i];
  }
  return den > 0 ? std::sqrt(num / den) : 0.0;
}

// region index 0=Top 1=Right 2=Left; values are quadrant array indices
// (sub-boxes 1..4 live at indices 0..3).
constexpr int kRegionQuadrants[3][2] = {{0, 1}, {0, 2}, {1, 3}};

BBox region_half(const BBox& human, int region) {
  switch (region) {
    case 0: return BBox{human.x, human.y, human.w, human.h / 2};               // top
    case 1: return BBox{human.x + human.w / 2, human.y, human.w / 2, human.h}; // right
    default: return BBox{human.x, human.y, human.w / 2, human.h};              // left
  }
}

}  // namespace

std::vector<Segment> derive_segments(std::span<const FrameMotionSummary> frames) {
  if (frames.empty()) return {};
  std::vector<ClippedFrame> cf;
  cf.reserve(frames.size());
  for (const auto& f : frames)
    cf.push_back(ClippedFrame{&f, f.timestamp, f.timestamp + f.dt});
  return segments_from_clipped(cf, nullptr);
}

std::array<double, kDurationBuckets> duration_distribution(
    std::span<const double> durations) {
  std::array<double, kDurationBuckets> out{};
  if (durations.empty()) return out;
  const double n = static_cast<double>(durations.size());
  for (double raw : durations) {
    // Microsecond rounding so durations sitting exactly on a bucket edge do
    // not flip under timestamp rounding noise.
    double d = std::round(raw * 1e6) / 1e6;
    int b = d < 2 ? 0 : d < 5 ? 1 : d < 10 ? 2 : d < 30 ? 3 : d < 60 ? 4 : 5;
    out[b] += 1;
    if (d >= 2) out[6] += 1;
    if (d >= 5) out[7] += 1;
    if (d >= 10) out[8] += 1;
    if (d >= 30) out[9] += 1;
  }
  for (auto& v : out) v = 100.0 * v / n;
  return out;
}

std::array<double, kDurationBuckets> duration_distribution(
    std::span<const Segment> segments, SegmentKind kind) {
  std::vector<double> durations;
  for (const auto& s : segments)
    if (s.kind == kind) durations.push_back(s.duration());
  return duration_distribution(durations);
}

QuartileMeans quartile_means(std::span<const double> values,
                             std::span<const double> weights) {
  if (values.empty() || values.size() != weights.size())
    throw std::invalid_argument("quartile_means: empty or mismatched input");
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  double total = 0;
  for (double w : weights) total += w;
  if (!(total > 0)) throw std::invalid_argument("quartile_means: zero total weight");

  double band_num[4] = {0, 0, 0, 0};
  double band_den[4] = {0, 0, 0, 0};
  double cum = 0;
  for (std::size_t i : idx) {
    double lo = cum, hi = cum + weights[i];
    for (int k = 0; k < 4; ++k) {
      double blo = total * k / 4.0, bhi = total * (k + 1) / 4.0;
      double ov = std::min(hi, bhi) - std::max(lo, blo);
      if (ov > 0) {
        band_num[k] += ov * values[i];
        band_den[k] += ov;
      }
    }
    cum = hi;
  }
  QuartileMeans q;
  q.q1 = band_den[0] > 0 ? band_num[0] / band_den[0] : 0;
  q.q2 = band_den[1] > 0 ? band_num[1] / band_den[1] : 0;
  q.q3 = band_den[2] > 0 ? band_num[2] / band_den[2] : 0;
  q.q4 = band_den[3] > 0 ? band_num[3] / band_den[3] : 0;
  return q;
}

// --------------------------------------------------------------------------
// Naming tables
// --------------------------------------------------------------------------

namespace {

std::vector<std::string> build_column_names() {
  std::vector<std::string> names;
  names.reserve(kFeatureColumns);
  names.push_back("F1");
  names.push_back("F2");
  names.push_back("F3");
  for (int i = 1; i <= kObjectCount; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "F4_%02d", i);
    names.push_back(buf);
  }
  for (int f = 5; f <= 66; ++f) names.push_back("F" + std::to_string(f));
  return names;
}

std::vector<std::string> build_group_labels() {
  std::vector<std::string> g(kFeatureGroups);
  g[0] = "Light";
  g[1] = "ToD";
  g[2] = "Weather";
  g[3] = "Objects";
  g[4] = "Act.Dur";
  g[5] = "Inact.Ratio";
  g[6] = "Inact.No.";
  g[7] = "Move.Dur";
  g[8] = "Move.Ratio";
  g[9] = "Pixel";
  g[10] = "Pixel(MPO)";
  g[11] = "Density";
  g[12] = "Density(MPO)";
  g[13] = "Scale";
  g[14] = "Scale(MPO)";
  g[15] = "V";
  g[16] = "V(MPO)";
  g[17] = "Vstd(MPO)";
  g[18] = "Dist";
  g[19] = "VQ1";
  g[20] = "VQ2";
  g[21] = "VQ3";
  g[22] = "VQ4";
  g[23] = "VQ1(MPO)";
  g[24] = "VQ2(MPO)";
  g[25] = "VQ3(MPO)";
  g[26] = "VQ4(MPO)";
  g[27] = "Vstd";
  g[28] = "V(T-MPO)";
  g[29] = "V(R-MPO)";
  g[30] = "V(L-MPO)";
  g[31] = "Scale(T-MPO)";
  g[32] = "Scale(R-MPO)";
  g[33] = "Scale(L-MPO)";
  g[34] = "Density(T-MPO)";
  g[35] = "Density(R-MPO)";
  g[36] = "Density(L-MPO)";
  g[37] = "V(T)";
  g[38] = "V(R)";
  g[39] = "V(L)";
  g[40] = "Scale(T)";
  g[41] = "Scale(R)";
  g[42] = "Scale(L)";
  g[43] = "Density(T)";
  g[44] = "Density(R)";
  g[45] = "Density(L)";
  const char* ranges[6] = {"1-2s", "2-5s", "5-10s", "10-30s", "30-60s", "geq60s"};
  const char* cums[4] = {"geq2s", "geq5s", "geq10s", "geq30s"};
  for (int i = 0; i < 6; ++i) g[46 + i] = std::string("Inact.") + ranges[i];
  for (int i = 0; i < 4; ++i) g[52 + i] = std::string("Inact.") + cums[i];
  for (int i = 0; i < 6; ++i) g[56 + i] = std::string("Move.") + ranges[i];
  for (int i = 0; i < 4; ++i) g[62 + i] = std::string("Move.") + cums[i];
  return g;
}

const std::vector<std::string>& column_names() {
  static const std::vector<std::string> names = build_column_names();
  return names;
}

const std::vector<std::string>& group_labels() {
  static const std::vector<std::string> labels = build_group_labels();
  return labels;
}

}  // namespace

int column_of_feature(int feature_number) {
  if (feature_number < 1 || feature_number > 66)
    throw std::out_of_range("feature number outside 1..66");
  if (feature_number <= 3) return feature_number - 1;
  if (feature_number == 4) return 3;
  return feature_number + 18;  // F5 -> 23 ... F66 -> 84
}

const std::string& column_name(int column) { return column_names().at(column); }

int group_of_column(int column) {
  if (column < 0 || column >= kFeatureColumns)
    throw std::out_of_range("column outside feature layout");
  if (column < 3) return column;
  if (column < 23) return 3;
  return column - 19;  // col 23 (F5) -> group 4 ... col 84 -> group 65
}

int group_first_column(int group) {
  if (group < 0 || group >= kFeatureGroups)
    throw std::out_of_range("group outside 0..65");
  if (group < 3) return group;
  if (group == 3) return 3;
  return group + 19;
}

int group_column_count(int group) { return group == 3 ? kObjectCount : 1; }

const std::string& group_label(int group) { return group_labels().at(group); }

std::optional<int> group_by_label(const std::string& label) {
  const auto& labels = group_labels();
  for (int i = 0; i < kFeatureGroups; ++i)
    if (labels[i] == label) return i;
  return std::nullopt;
}

// --------------------------------------------------------------------------
// Extraction
// --------------------------------------------------------------------------

FeatureVector extract_features(const MonitoringRecord& rec, Window w, bool mirror) {
  std::vector<ClippedFrame> cf;
  for (const auto& f : rec.frames) {
    double start = std::max(f.timestamp, w.t0);
    double end = std::min(f.timestamp + f.dt, w.t1);
    if (end > start) cf.push_back(ClippedFrame{&f, start, end});
  }
  if (cf.empty())
    throw std::invalid_argument("extract_features: window contains no frames");

  std::vector<bool> in_movement;
  std::vector<Segment> segments = segments_from_clipped(cf, &in_movement);

  const double span = cf.back().end - cf.front().start;
  double inact_time = 0, move_time = 0;
  std::vector<double> inact_durs, move_durs;
  int inact_count = 0;
  for (const auto& s : segments) {
    if (s.kind == SegmentKind::Inactivity) {
      inact_time += s.duration();
      inact_durs.push_back(s.duration());
      ++inact_count;
    } else {
      move_time += s.duration();
      move_durs.push_back(s.duration());
    }
  }

  // Mirror swaps image-left and image-right quadrants: sub-box order
  // (TR, TL, BR, BL) becomes (TL, TR, BL, BR).
  const int qmap_identity[4] = {0, 1, 2, 3};
  const int qmap_mirror[4] = {1, 0, 3, 2};
  const int* qmap = mirror ? qmap_mirror : qmap_identity;

  const std::size_t n = cf.size();
  std::vector<double> wgt(n), flow(n), pxrate(n), density(n), scale(n);
  std::vector<double> reg_flow[3], reg_density[3], reg_scale[3];
  for (int r = 0; r < 3; ++r) {
    reg_flow[r].resize(n);
    reg_density[r].resize(n);
    reg_scale[r].resize(n);
  }
  std::vector<bool> has_human(n), has_hbox(n);

  for (std::size_t i = 0; i < n; ++i) {
    const FrameMotionSummary& f = *cf[i].f;
    wgt[i] = cf[i].weight();
    flow[i] = f.mean_flow_magnitude;
    pxrate[i] = f.movement_pixel_count / f.dt;
    has_human[i] = f.human_pixel_count > 0;
    has_hbox[i] = !f.human_bbox.empty();
    density[i] = has_human[i]
                     ? 100.0 * f.movement_pixel_count / f.human_pixel_count
                     : 0.0;
    scale[i] = has_hbox[i]
                   ? 100.0 * f.movement_bbox.area() / f.human_bbox.area()
                   : 0.0;
    for (int r = 0; r < 3; ++r) {
      const auto& qa = f.quadrants[qmap[kRegionQuadrants[r][0]]];
      const auto& qb = f.quadrants[qmap[kRegionQuadrants[r][1]]];
      double px = double(qa.movement_pixel_count) + double(qb.movement_pixel_count);
      reg_flow[r][i] = px > 0 ? (qa.movement_pixel_count * qa.mean_flow_magnitude +
                                 qb.movement_pixel_count * qb.mean_flow_magnitude) /
                                    px
                              : 0.0;
      reg_density[r][i] =
          has_human[i] ? 100.0 * px / (f.human_pixel_count / 2.0) : 0.0;
      if (has_hbox[i]) {
        BBox u = bbox_union(qa.movement_bbox, qb.movement_bbox);
        reg_scale[r][i] = 100.0 * u.area() / region_half(f.human_bbox, r).area();
      } else {
        reg_scale[r][i] = 0.0;
      }
    }
  }

  auto subset = [&](const std::vector<double>& v, const std::vector<bool>& keep) {
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (keep[i]) out.push_back(v[i]);
    return out;
  };
  std::vector<bool> all(n, true);
  std::vector<bool> human_mask(n), hbox_mask(n), mpo_human(n), mpo_hbox(n);
  for (std::size_t i = 0; i < n; ++i) {
    human_mask[i] = has_human[i];
    hbox_mask[i] = has_hbox[i];
    mpo_human[i] = in_movement[i] && has_human[i];
    mpo_hbox[i] = in_movement[i] && has_hbox[i];
  }
  std::vector<bool> mpo(in_movement.begin(), in_movement.end());
  bool any_mpo = std::find(mpo.begin(), mpo.end(), true) != mpo.end();
  bool any_human = std::find(human_mask.begin(), human_mask.end(), true) != human_mask.end();
  bool any_hbox = std::find(hbox_mask.begin(), hbox_mask.end(), true) != hbox_mask.end();
  bool any_mpo_human = std::find(mpo_human.begin(), mpo_human.end(), true) != mpo_human.end();
  bool any_mpo_hbox = std::find(mpo_hbox.begin(), mpo_hbox.end(), true) != mpo_hbox.end();

  FeatureVector fv;
  auto set = [&](int feature, double value) {
    int col = column_of_feature(feature);
    fv.values[col] = value;
    fv.defined[col] = true;
  };
  auto set_masked = [&](int feature) {
    int col = column_of_feature(feature);
    fv.values[col] = 0.0;
    fv.defined[col] = false;
  };

  // Environment block. Likelihoods are constant over a record, so the window
  // mean equals the stored context.
  set(1, rec.env.lighting_luma);
  set(2, static_cast<double>(static_cast<int>(rec.env.time_of_day)) + 1.0);
  set(3, rec.env.weather_suitable ? 1.0 : 0.0);
  for (int i = 0; i < kObjectCount; ++i) {
    fv.values[3 + i] = rec.env.object_likelihoods[i];
    fv.defined[3 + i] = true;
  }

  set(5, span);
  set(6, span > 0 ? 100.0 * inact_time / span : 0.0);
  set(7, span > 0 ? inact_count / (span / 60.0) : 0.0);
  set(8, move_time);
  set(9, span > 0 ? 100.0 * move_time / span : 0.0);

  auto wmean = [&](const std::vector<double>& v, const std::vector<bool>& keep) {
    return weighted_mean(subset(v, keep), subset(wgt, keep));
  };
  auto wstd = [&](const std::vector<double>& v, const std::vector<bool>& keep) {
    return weighted_pop_std(subset(v, keep), subset(wgt, keep));
  };

  set(10, wmean(pxrate, all) / 1e4);
  if (any_mpo) set(11, wmean(pxrate, mpo) / 1e4); else set_masked(11);
  if (any_human) set(12, wmean(density, human_mask)); else set_masked(12);
  if (any_mpo_human) set(13, wmean(density, mpo_human)); else set_masked(13);
  if (any_hbox) set(14, wmean(scale, hbox_mask)); else set_masked(14);
  if (any_mpo_hbox) set(15, wmean(scale, mpo_hbox)); else set_masked(15);
  set(16, wmean(flow, all));
  if (any_mpo) set(17, wmean(flow, mpo)); else set_masked(17);
  if (any_mpo) set(18, wstd(flow, mpo)); else set_masked(18);

  double distance = 0;
  for (std::size_t i = 0; i < n; ++i) distance += flow[i] * wgt[i];
  set(19, span > 0 ? distance * (300.0 / span) : 0.0);

  {
    QuartileMeans q = quartile_means(flow, wgt);
    set(20, q.q1); set(21, q.q2); set(22, q.q3); set(23, q.q4);
  }
  if (any_mpo) {
    QuartileMeans q = quartile_means(subset(flow, mpo), subset(wgt, mpo));
    set(24, q.q1); set(25, q.q2); set(26, q.q3); set(27, q.q4);
  } else {
    set_masked(24); set_masked(25); set_masked(26); set_masked(27);
  }
  set(28, wstd(flow, all));

  for (int r = 0; r < 3; ++r) {
    if (any_mpo) set(29 + r, wmean(reg_flow[r], mpo)); else set_masked(29 + r);
    if (any_mpo_hbox) set(32 + r, wmean(reg_scale[r], mpo_hbox)); else set_masked(32 + r);
    if (any_mpo_human) set(35 + r, wmean(reg_density[r], mpo_human)); else set_masked(35 + r);
    set(38 + r, wmean(reg_flow[r], all));
    if (any_hbox) set(41 + r, wmean(reg_scale[r], hbox_mask)); else set_masked(41 + r);
    if (any_human) set(44 + r, wmean(reg_density[r], human_mask)); else set_masked(44 + r);
  }

  auto idist = duration_distribution(inact_durs);
  auto mdist = duration_distribution(move_durs);
  for (int i = 0; i < kDurationBuckets; ++i) {
    if (inact_durs.empty()) set_masked(47 + i); else set(47 + i, idist[i]);
    if (move_durs.empty()) set_masked(57 + i); else set(57 + i, mdist[i]);
  }

  return fv;
}

FeatureVector extract_features(const MonitoringRecord& rec, bool mirror) {
  if (rec.frames.empty())
    throw std::invalid_argument("extract_features: record has no frames");
  double end = rec.frames.back().timestamp + rec.frames.back().dt;
  return extract_features(rec, Window{0.0, end}, mirror);
}

}  // namespace frailwatch
