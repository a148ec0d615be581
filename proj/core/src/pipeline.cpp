#include "frailwatch/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "frailwatch/parallel.hpp"
#include "frailwatch/rng.hpp"

namespace frailwatch {

std::vector<Window> segment_windows(double record_duration, double window_seconds) {
  if (window_seconds <= 0)
    throw std::invalid_argument("segment_windows: window must be positive");
  std::vector<Window> out;
  double t = 0;
  while (t + window_seconds <= record_duration + 1e-9) {
    out.push_back(Window{t, t + window_seconds});
    t += window_seconds;
  }
  double tail = record_duration - t;
  if (tail >= window_seconds / 2 - 1e-9 && tail > 1e-9) {
    out.push_back(Window{t, record_duration});
  } else if (out.empty()) {
    out.push_back(Window{0, record_duration});  // short-record rule
  }
  return out;
}

int majority_vote(std::span<const int> labels) {
  if (labels.empty()) throw std::invalid_argument("majority_vote: empty input");
  std::map<int, int> counts;
  for (int l : labels) counts[l] += 1;
  int best_label = labels[0];
  int best_count = -1;
  bool tie = false;
  for (const auto& [label, count] : counts) {
    if (count > best_count) {
      best_count = count;
      best_label = label;
      tie = false;
    } else if (count == best_count) {
      tie = true;
    }
  }
  if (tie) return 1;  // weak
  return best_label;
}

SpanLabels aggregate_spans(
    const std::vector<std::pair<CivilTime, int>>& record_labels) {
  std::map<std::int64_t, std::vector<int>> per_day;
  std::map<SpanKey, std::vector<int>> per_bin;
  for (const auto& [when, label] : record_labels) {
    std::int64_t day = span_day_index(when);
    per_day[day].push_back(label);
    per_bin[SpanKey{day, span_eight_hour_bin(when)}].push_back(label);
  }
  SpanLabels out;
  for (const auto& [day, labels] : per_day) out.daily[day] = majority_vote(labels);
  for (const auto& [key, labels] : per_bin) out.eight_hour[key] = majority_vote(labels);
  return out;
}

// --------------------------------------------------------------------------
// Forward selection / activity subset search
// --------------------------------------------------------------------------

SelectionResult forward_select(const ClassifierSpec& spec, const FeatureTable& t,
                               const std::vector<std::size_t>& rows,
                               int max_features, int k, std::uint64_t seed) {
  SelectionResult result;
  std::vector<int> current;
  std::vector<int> remaining(kFeatureColumns);
  std::iota(remaining.begin(), remaining.end(), 0);

  int steps = std::min<int>(max_features, kFeatureColumns);
  for (int step = 0; step < steps && !remaining.empty(); ++step) {
    std::vector<double> f1(remaining.size());
    parallel_for(remaining.size(), [&](std::size_t c) {
      std::vector<int> trial = current;
      trial.push_back(remaining[c]);
      std::sort(trial.begin(), trial.end());
      f1[c] = cross_validate(spec, t, rows, trial, k, seed).f1_macro;
    });
    std::size_t best = 0;
    for (std::size_t c = 1; c < remaining.size(); ++c)
      if (f1[c] > f1[best]) best = c;  // ties keep the lower column id
    current.push_back(remaining[best]);
    result.features.push_back(remaining[best]);
    result.trace.push_back(f1[best]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }

  // Keep the first best prefix.
  std::size_t best_prefix = 0;
  for (std::size_t i = 1; i < result.trace.size(); ++i)
    if (result.trace[i] > result.trace[best_prefix]) best_prefix = i;
  if (!result.trace.empty()) {
    result.best_f1 = result.trace[best_prefix];
    result.features.resize(best_prefix + 1);
  }
  return result;
}

SelectionResult search_activity_subsets(const ClassifierSpec& spec,
                                        const FeatureTable& t,
                                        const std::vector<std::size_t>& rows,
                                        double coverage_min, int max_features,
                                        int k, std::uint64_t seed) {
  // Activities present, with sample counts.
  std::map<int, std::size_t> counts;
  for (std::size_t r : rows)
    if (t.activity[r] >= 0) counts[t.activity[r]] += 1;
  if (counts.empty())
    throw std::invalid_argument("search_activity_subsets: no labeled activities");
  std::vector<int> present;
  for (const auto& [a, c] : counts) present.push_back(a);
  const int m = static_cast<int>(present.size());
  if (m > kActivityCount)
    throw std::invalid_argument("more activity types than the schema allows");

  int top1 = present[0];
  for (int a : present)
    if (counts[a] > counts[top1]) top1 = a;

  const double n_total = static_cast<double>(rows.size());

  struct Candidate {
    std::vector<int> activities;
    std::vector<std::size_t> subset_rows;
    double coverage;
    unsigned mask;
  };
  std::vector<Candidate> candidates;
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> acts;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) acts.push_back(present[i]);
    // The most frequent activity alone is not a candidate subset.
    if (acts.size() == 1 && acts[0] == top1) continue;
    std::vector<std::size_t> subset_rows;
    for (std::size_t r : rows) {
      if (t.activity[r] < 0) continue;
      if (std::find(acts.begin(), acts.end(), t.activity[r]) != acts.end())
        subset_rows.push_back(r);
    }
    double coverage = subset_rows.size() / n_total;
    if (coverage <= coverage_min) continue;
    // Two samples per class guarantee every stratified training fold keeps
    // both classes.
    int class_count[2] = {0, 0};
    for (std::size_t r : subset_rows) {
      if (t.health[r] == 0) ++class_count[0];
      if (t.health[r] == 1) ++class_count[1];
    }
    if (class_count[0] < 2 || class_count[1] < 2 ||
        subset_rows.size() < static_cast<std::size_t>(k))
      continue;
    candidates.push_back(Candidate{std::move(acts), std::move(subset_rows),
                                   coverage, mask});
  }

  bool fallback = false;
  if (candidates.empty()) {
    fallback = true;
    std::vector<std::size_t> all_rows;
    for (std::size_t r : rows)
      if (t.activity[r] >= 0) all_rows.push_back(r);
    candidates.push_back(Candidate{present, std::move(all_rows), 1.0, 0});
  }

  SelectionResult best;
  bool first = true;
  for (const auto& cand : candidates) {
    SelectionResult sel =
        forward_select(spec, t, cand.subset_rows, max_features, k, seed);
    sel.activities = cand.activities;
    sel.coverage = cand.coverage;
    bool better = first || sel.best_f1 > best.best_f1 + 1e-12 ||
                  (std::abs(sel.best_f1 - best.best_f1) <= 1e-12 &&
                   sel.coverage > best.coverage + 1e-12);
    if (better) {
      best = std::move(sel);
      first = false;
    }
  }
  best.coverage_fallback = fallback;
  if (fallback)
    best.warnings.push_back(
        "no activity subset exceeded the coverage floor; using all activities");
  return best;
}

std::string SelectionResult::to_json() const {
  nlohmann::json acts = nlohmann::json::array();
  for (int a : activities) acts.push_back(activity_name(static_cast<Activity>(a)));
  nlohmann::json feats = nlohmann::json::array();
  for (int c : features) feats.push_back(column_name(c));
  nlohmann::json j{{"activities", acts},
                   {"features", feats},
                   {"feature_columns", features},
                   {"trace", trace},
                   {"best_f1_macro", best_f1},
                   {"coverage", coverage},
                   {"coverage_fallback", coverage_fallback},
                   {"warnings", warnings}};
  return j.dump(2);
}

// --------------------------------------------------------------------------
// Level evaluation and window sweep
// --------------------------------------------------------------------------

namespace {

double micro_from_pairs(const std::vector<int>& y_true,
                        const std::vector<int>& y_pred, bool macro) {
  auto [ma, mi] = f1_scores(y_true, y_pred);
  return macro ? ma : mi;
}

}  // namespace

LevelScores evaluate_levels(const ClassifierSpec& spec, const FeatureTable& t,
                            const std::vector<std::size_t>& rows,
                            const std::vector<int>& columns, int k,
                            std::uint64_t seed) {
  EvalReport report = cross_validate(spec, t, rows, columns, k, seed);

  // Window predictions -> record labels by majority vote.
  std::map<std::string, std::vector<int>> rec_pred, rec_true;
  std::map<std::string, CivilTime> rec_when;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::size_t r = rows[i];
    const auto& m = t.meta[r];
    rec_pred[m.record_id].push_back(report.y_pred[i]);
    rec_true[m.record_id].push_back(report.y_true[i]);
    auto it = rec_when.find(m.record_id);
    if (it == rec_when.end() ||
        to_linear_seconds(m.window_start) < to_linear_seconds(it->second))
      rec_when[m.record_id] = m.window_start;
  }

  std::vector<std::pair<CivilTime, int>> pred_records, true_records;
  std::vector<int> rec_y_true, rec_y_pred;
  for (const auto& [rid, preds] : rec_pred) {
    int pred = majority_vote(preds);
    int truth = majority_vote(rec_true[rid]);
    rec_y_pred.push_back(pred);
    rec_y_true.push_back(truth);
    pred_records.emplace_back(rec_when[rid], pred);
    true_records.emplace_back(rec_when[rid], truth);
  }

  LevelScores out;
  out.record_macro = micro_from_pairs(rec_y_true, rec_y_pred, true);
  out.record_micro = micro_from_pairs(rec_y_true, rec_y_pred, false);

  SpanLabels pred_spans = aggregate_spans(pred_records);
  SpanLabels true_spans = aggregate_spans(true_records);

  std::vector<int> bin_true, bin_pred;
  for (const auto& [key, label] : true_spans.eight_hour) {
    bin_true.push_back(label);
    bin_pred.push_back(pred_spans.eight_hour.at(key));
  }
  out.eight_hour_macro = micro_from_pairs(bin_true, bin_pred, true);
  out.eight_hour_micro = micro_from_pairs(bin_true, bin_pred, false);

  std::vector<int> day_true, day_pred;
  for (const auto& [day, label] : true_spans.daily) {
    day_true.push_back(label);
    day_pred.push_back(pred_spans.daily.at(day));
  }
  out.daily_macro = micro_from_pairs(day_true, day_pred, true);
  out.daily_micro = micro_from_pairs(day_true, day_pred, false);
  return out;
}

std::vector<SweepRow> sweep_windows(const ClassifierSpec& spec,
                                    const LabeledDataset& dataset,
                                    std::span<const double> window_set,
                                    int k, std::uint64_t seed) {
  std::vector<double> windows(window_set.begin(), window_set.end());
  if (windows.empty()) windows = kDefaultWindowSweep;
  std::set<std::string> participants;
  for (const auto& r : dataset.records) participants.insert(r.participant_id);

  std::vector<int> all_columns(kFeatureColumns);
  std::iota(all_columns.begin(), all_columns.end(), 0);

  std::vector<SweepRow> out;
  for (double w : windows) {
    FeatureTable table = featurize_dataset(dataset, w);
    double max_duration = 0;
    for (const auto& r : dataset.records)
      max_duration = std::max(max_duration, r.duration);
    for (const auto& pid : participants) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < table.size(); ++i)
        if (table.meta[i].participant_id == pid &&
            (table.health[i] == 0 || table.health[i] == 1))
          rows.push_back(i);
      SweepRow row;
      row.participant = pid;
      row.window_seconds = w;
      row.whole_record = w > max_duration;
      row.scores = evaluate_levels(spec, table, rows, all_columns, k,
                                   derive_seed(seed, static_cast<std::uint64_t>(w)));
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "participant,window_seconds,level,f1_micro,f1_macro,whole_record\n";
  for (const auto& r : rows) {
    auto emit = [&](const char* level, double micro, double macro) {
      out << r.participant << ',' << r.window_seconds << ',' << level << ','
          << micro << ',' << macro << ',' << (r.whole_record ? 1 : 0) << '\n';
    };
    emit("record", r.scores.record_micro, r.scores.record_macro);
    emit("8hour", r.scores.eight_hour_micro, r.scores.eight_hour_macro);
    emit("daily", r.scores.daily_micro, r.scores.daily_macro);
  }
  return out.str();
}

}  // namespace frailwatch
