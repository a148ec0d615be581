#pragma once

// Independent brute-force oracles for the test suites. These deliberately
// re-derive results from first principles (plain scans and direct formula
// evaluation) and share no helpers with the library implementation.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "frailwatch/features.hpp"
#include "frailwatch/types.hpp"

namespace oracles {

struct NaiveSegment {
  bool inactivity;
  double start, end;
};

// Direct scan over (start, end, moving) frame intervals.
inline std::vector<NaiveSegment> naive_segments(
    const std::vector<std::array<double, 2>>& intervals,
    const std::vector<bool>& moving) {
  std::vector<NaiveSegment> runs;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (!runs.empty() && runs.back().inactivity == !moving[i]) {
      runs.back().end = intervals[i][1];
    } else {
      runs.push_back(NaiveSegment{!moving[i], intervals[i][0], intervals[i][1]});
    }
  }
  // Short motionless runs become movement (threshold has rounding slack).
  for (auto& r : runs) {
    if (r.inactivity && r.end - r.start < 1.0 - 1e-9) r.inactivity = false;
  }
  // Merge adjacent movement runs.
  std::vector<NaiveSegment> out;
  for (const auto& r : runs) {
    if (!out.empty() && !out.back().inactivity && !r.inactivity) {
      out.back().end = r.end;
    } else {
      out.push_back(r);
    }
  }
  return out;
}

inline std::array<double, 10> naive_duration_buckets(
    const std::vector<double>& durations) {
  std::array<double, 10> out{};
  if (durations.empty()) return out;
  for (double raw : durations) {
    double d = std::round(raw * 1e6) / 1e6;  // same edge rounding as the library
    if (d < 2) out[0] += 1;
    else if (d < 5) out[1] += 1;
    else if (d < 10) out[2] += 1;
    else if (d < 30) out[3] += 1;
    else if (d < 60) out[4] += 1;
    else out[5] += 1;
    if (d >= 2) out[6] += 1;
    if (d >= 5) out[7] += 1;
    if (d >= 10) out[8] += 1;
    if (d >= 30) out[9] += 1;
  }
  for (auto& v : out) v *= 100.0 / durations.size();
  return out;
}

// Weighted quartile means via explicit interval splitting on the sorted
// sample list.
inline std::array<double, 4> naive_quartiles(std::vector<double> values,
                                             std::vector<double> weights) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::array<double, 4> num{}, den{};
  double cum = 0;
  for (std::size_t k : order) {
    double lo = cum, hi = cum + weights[k];
    for (int band = 0; band < 4; ++band) {
      double blo = band * total / 4, bhi = (band + 1) * total / 4;
      double ov = std::min(hi, bhi) - std::max(lo, blo);
      if (ov > 0) {
        num[band] += ov * values[k];
        den[band] += ov;
      }
    }
    cum = hi;
  }
  std::array<double, 4> q{};
  for (int band = 0; band < 4; ++band) q[band] = den[band] > 0 ? num[band] / den[band] : 0;
  return q;
}

// --------------------------------------------------------------------------
// Full naive feature extraction: direct per-feature formula evaluation over
// one window of a record. Returns (values, defined) aligned to the library's
// 85-column layout.
// --------------------------------------------------------------------------

struct NaiveFeatures {
  std::array<double, 85> values{};
  std::array<bool, 85> defined{};
};

inline NaiveFeatures naive_extract(const frailwatch::MonitoringRecord& rec,
                                   double t0, double t1, bool mirror) {
  using frailwatch::BBox;
  NaiveFeatures out;

  // Clip frames.
  std::vector<const frailwatch::FrameMotionSummary*> frames;
  std::vector<double> fstart, fend;
  for (const auto& f : rec.frames) {
    double s = std::max(f.timestamp, t0);
    double e = std::min(f.timestamp + f.dt, t1);
    if (e > s) {
      frames.push_back(&f);
      fstart.push_back(s);
      fend.push_back(e);
    }
  }
  const std::size_t n = frames.size();
  if (n == 0) return out;

  std::vector<bool> moving(n);
  for (std::size_t i = 0; i < n; ++i) moving[i] = frames[i]->movement_pixel_count > 0;

  std::vector<std::array<double, 2>> intervals(n);
  for (std::size_t i = 0; i < n; ++i) intervals[i] = {fstart[i], fend[i]};
  auto segments = naive_segments(intervals, moving);

  // Frame membership: inside a movement segment?
  std::vector<bool> mpo(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    double mid = (fstart[i] + fend[i]) / 2;
    for (const auto& s : segments) {
      if (mid >= s.start && mid < s.end) {
        mpo[i] = !s.inactivity;
        break;
      }
    }
  }

  const double span = fend.back() - fstart.front();
  double inact_time = 0, move_time = 0;
  std::vector<double> inact_durs, move_durs;
  for (const auto& s : segments) {
    if (s.inactivity) {
      inact_time += s.end - s.start;
      inact_durs.push_back(s.end - s.start);
    } else {
      move_time += s.end - s.start;
      move_durs.push_back(s.end - s.start);
    }
  }

  auto set = [&](int col, double v) {
    out.values[col] = v;
    out.defined[col] = true;
  };
  auto col_of = [](int feature) {
    if (feature <= 3) return feature - 1;
    if (feature == 4) return 3;
    return feature + 18;
  };

  set(col_of(1), rec.env.lighting_luma);
  set(col_of(2), double(int(rec.env.time_of_day)) + 1);
  set(col_of(3), rec.env.weather_suitable ? 1 : 0);
  for (int i = 0; i < 20; ++i) set(3 + i, rec.env.object_likelihoods[i]);

  set(col_of(5), span);
  set(col_of(6), 100.0 * inact_time / span);
  set(col_of(7), double(inact_durs.size()) / (span / 60.0));
  set(col_of(8), move_time);
  set(col_of(9), 100.0 * move_time / span);

  auto w = [&](std::size_t i) { return fend[i] - fstart[i]; };

  // Generic dt-weighted mean over a predicate.
  auto mean_over = [&](auto value, auto pred) -> std::pair<double, bool> {
    double num = 0, den = 0;
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!pred(i)) continue;
      any = true;
      num += value(i) * w(i);
      den += w(i);
    }
    return {den > 0 ? num / den : 0.0, any};
  };
  auto std_over = [&](auto value, auto pred) -> std::pair<double, bool> {
    auto [m, any] = mean_over(value, pred);
    if (!any) return {0.0, false};
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!pred(i)) continue;
      num += w(i) * (value(i) - m) * (value(i) - m);
      den += w(i);
    }
    return {std::sqrt(num / den), true};
  };

  auto all = [](std::size_t) { return true; };
  auto in_mpo = [&](std::size_t i) { return mpo[i]; };

  auto maybe_set = [&](int feature, std::pair<double, bool> r) {
    if (r.second) set(col_of(feature), r.first);
  };

  maybe_set(10, mean_over([&](std::size_t i) {
    return frames[i]->movement_pixel_count / frames[i]->dt / 1e4;
  }, all));
  maybe_set(11, mean_over([&](std::size_t i) {
    return frames[i]->movement_pixel_count / frames[i]->dt / 1e4;
  }, in_mpo));

  auto has_human = [&](std::size_t i) { return frames[i]->human_pixel_count > 0; };
  auto density = [&](std::size_t i) {
    return 100.0 * frames[i]->movement_pixel_count / frames[i]->human_pixel_count;
  };
  maybe_set(12, mean_over(density, has_human));
  maybe_set(13, mean_over(density, [&](std::size_t i) { return mpo[i] && has_human(i); }));

  auto has_hbox = [&](std::size_t i) { return !frames[i]->human_bbox.empty(); };
  auto scale = [&](std::size_t i) {
    return 100.0 * frames[i]->movement_bbox.area() / frames[i]->human_bbox.area();
  };
  maybe_set(14, mean_over(scale, has_hbox));
  maybe_set(15, mean_over(scale, [&](std::size_t i) { return mpo[i] && has_hbox(i); }));

  auto flow = [&](std::size_t i) { return frames[i]->mean_flow_magnitude; };
  maybe_set(16, mean_over(flow, all));
  maybe_set(17, mean_over(flow, in_mpo));
  maybe_set(18, std_over(flow, in_mpo));

  double dist = 0;
  for (std::size_t i = 0; i < n; ++i) dist += flow(i) * w(i);
  set(col_of(19), dist * 300.0 / span);

  {
    std::vector<double> v, wgts;
    for (std::size_t i = 0; i < n; ++i) {
      v.push_back(flow(i));
      wgts.push_back(w(i));
    }
    auto q = naive_quartiles(v, wgts);
    for (int k = 0; k < 4; ++k) set(col_of(20 + k), q[k]);
  }
  {
    std::vector<double> v, wgts;
    for (std::size_t i = 0; i < n; ++i) {
      if (!mpo[i]) continue;
      v.push_back(flow(i));
      wgts.push_back(w(i));
    }
    if (!v.empty()) {
      auto q = naive_quartiles(v, wgts);
      for (int k = 0; k < 4; ++k) set(col_of(24 + k), q[k]);
    }
  }
  maybe_set(28, std_over(flow, all));

  // Regions: Top = sub-boxes {1,2}, Right = {1,3}, Left = {2,4}; array
  // indices are sub-box minus one, mirrored by swapping left/right columns.
  int qa[3], qb[3];
  if (!mirror) {
    qa[0] = 0; qb[0] = 1;  // top: TR, TL
    qa[1] = 0; qb[1] = 2;  // right: TR, BR
    qa[2] = 1; qb[2] = 3;  // left: TL, BL
  } else {
    qa[0] = 1; qb[0] = 0;
    qa[1] = 1; qb[1] = 3;
    qa[2] = 0; qb[2] = 2;
  }

  for (int r = 0; r < 3; ++r) {
    auto reg_flow = [&](std::size_t i) {
      const auto& A = frames[i]->quadrants[qa[r]];
      const auto& B = frames[i]->quadrants[qb[r]];
      double px = double(A.movement_pixel_count) + double(B.movement_pixel_count);
      if (px <= 0) return 0.0;
      return (A.movement_pixel_count * A.mean_flow_magnitude +
              B.movement_pixel_count * B.mean_flow_magnitude) / px;
    };
    auto reg_density = [&](std::size_t i) {
      const auto& A = frames[i]->quadrants[qa[r]];
      const auto& B = frames[i]->quadrants[qb[r]];
      double px = double(A.movement_pixel_count) + double(B.movement_pixel_count);
      return 100.0 * px / (frames[i]->human_pixel_count / 2.0);
    };
    auto reg_scale = [&](std::size_t i) {
      const auto& hb = frames[i]->human_bbox;
      BBox half;
      if (r == 0) half = BBox{hb.x, hb.y, hb.w, hb.h / 2};
      else if (r == 1) half = BBox{hb.x + hb.w / 2, hb.y, hb.w / 2, hb.h};
      else half = BBox{hb.x, hb.y, hb.w / 2, hb.h};
      BBox u = frailwatch::bbox_union(frames[i]->quadrants[qa[r]].movement_bbox,
                                      frames[i]->quadrants[qb[r]].movement_bbox);
      return 100.0 * u.area() / half.area();
    };
    maybe_set(29 + r, mean_over(reg_flow, in_mpo));
    maybe_set(32 + r, mean_over(reg_scale, [&](std::size_t i) { return mpo[i] && has_hbox(i); }));
    maybe_set(35 + r, mean_over(reg_density, [&](std::size_t i) { return mpo[i] && has_human(i); }));
    maybe_set(38 + r, mean_over(reg_flow, all));
    maybe_set(41 + r, mean_over(reg_scale, has_hbox));
    maybe_set(44 + r, mean_over(reg_density, has_human));
  }

  if (!inact_durs.empty()) {
    auto b = naive_duration_buckets(inact_durs);
    for (int i = 0; i < 10; ++i) set(col_of(47 + i), b[i]);
  }
  if (!move_durs.empty()) {
    auto b = naive_duration_buckets(move_durs);
    for (int i = 0; i < 10; ++i) set(col_of(57 + i), b[i]);
  }
  return out;
}

}  // namespace oracles
