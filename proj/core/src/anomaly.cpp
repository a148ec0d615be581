#include "frailwatch/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "frailwatch/pipeline.hpp"

namespace frailwatch {

std::vector<DayGroup> group_days(const FeatureTable& t,
                                 const std::vector<std::size_t>& rows) {
  std::map<std::int64_t, std::map<std::string, std::vector<int>>> days;
  for (std::size_t r : rows)
    days[t.meta[r].day][t.meta[r].record_id].push_back(t.health[r]);

  std::vector<DayGroup> out;
  for (const auto& [day, records] : days) {
    DayGroup g;
    g.day = day;
    std::vector<int> record_labels;
    for (const auto& [rid, window_labels] : records) {
      g.record_ids.push_back(rid);
      record_labels.push_back(majority_vote(window_labels));
    }
    g.health = majority_vote(record_labels);
    g.qualifying = g.health == 0 && g.record_ids.size() >= 2;
    for (std::size_t r : rows) {
      if (t.meta[r].day == day) {
        g.participant_id = t.meta[r].participant_id;
        break;
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

// Rows of the given days, keyed by record for per-record scoring.
std::vector<std::size_t> rows_of_days(const FeatureTable& t,
                                      const std::vector<std::size_t>& rows,
                                      const std::set<std::int64_t>& days) {
  std::vector<std::size_t> out;
  for (std::size_t r : rows)
    if (days.count(t.meta[r].day)) out.push_back(r);
  return out;
}

BayesNetModel fit_on_rows(const FeatureTable& t,
                          const std::vector<std::size_t>& rows,
                          const std::vector<int>& columns,
                          const FitOptions& options) {
  ColumnImputer imputer;
  imputer.fit(t, rows, columns);
  Problem p = make_problem(t, rows, columns, imputer);
  BnTrainingData data;
  data.x = &p.x;
  data.health = &p.y;
  data.activity = &p.activity;
  data.env = &p.env;
  return fit_ml(data, columns, options);
}

// Mean over the day's records of the record mean window log-likelihood.
double score_day(const BayesNetModel& model, const FeatureTable& t,
                 const std::vector<std::size_t>& rows,
                 const std::vector<int>& columns, std::int64_t day) {
  ColumnImputer imputer;
  imputer.columns = columns;
  imputer.means.assign(columns.size(), 0.0);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    // Impute with the model's training mean (de-standardized is just the mean).
    auto it = std::find(model.selected_columns.begin(),
                        model.selected_columns.end(), columns[c]);
    if (it != model.selected_columns.end()) {
      std::size_t f = static_cast<std::size_t>(it - model.selected_columns.begin());
      imputer.means[c] = model.standardize_mean[f];
    }
  }

  std::map<std::string, std::vector<std::size_t>> per_record;
  for (std::size_t r : rows)
    if (t.meta[r].day == day) per_record[t.meta[r].record_id].push_back(r);
  if (per_record.empty())
    throw std::invalid_argument("score_day: day has no rows");

  double total = 0;
  for (const auto& [rid, rrows] : per_record) {
    std::vector<std::vector<double>> x;
    std::vector<int> activity;
    std::vector<EnvObservation> env;
    for (std::size_t r : rrows) {
      // Project to the model's selected columns.
      std::vector<double> full = imputer.row(t, r);
      std::vector<double> proj(model.selected_columns.size());
      for (std::size_t f = 0; f < model.selected_columns.size(); ++f) {
        auto ct = std::find(columns.begin(), columns.end(), model.selected_columns[f]);
        proj[f] = full[static_cast<std::size_t>(ct - columns.begin())];
      }
      x.push_back(std::move(proj));
      activity.push_back(t.activity[r]);
      env.push_back(env_from_row(t.values[r]));
    }
    total += record_log_likelihood(model, x, activity, env);
  }
  return total / static_cast<double>(per_record.size());
}

}  // namespace

BayesNetModel train_normal_model(const FeatureTable& t,
                                 const std::vector<std::size_t>& rows,
                                 const std::vector<int>& columns,
                                 const FitOptions& options) {
  auto days = group_days(t, rows);
  std::set<std::int64_t> qualifying;
  for (const auto& d : days)
    if (d.qualifying) qualifying.insert(d.day);
  if (qualifying.size() < 2)
    throw std::invalid_argument("train_normal_model: only " +
                                std::to_string(qualifying.size()) +
                                " qualifying normal days (need >= 2)");
  return fit_on_rows(t, rows_of_days(t, rows, qualifying), columns, options);
}

std::vector<DayScore> loo_scores(const FeatureTable& t,
                                 const std::vector<std::size_t>& rows,
                                 const std::vector<int>& columns,
                                 const FitOptions& options) {
  auto days = group_days(t, rows);
  std::set<std::int64_t> qualifying;
  for (const auto& d : days)
    if (d.qualifying) qualifying.insert(d.day);
  if (qualifying.size() < 2)
    throw std::invalid_argument("loo_scores: need >= 2 qualifying normal days");

  BayesNetModel full_model =
      fit_on_rows(t, rows_of_days(t, rows, qualifying), columns, options);

  std::vector<DayScore> out;
  for (const auto& d : days) {
    DayScore s;
    s.day = d.day;
    s.health = d.health;
    s.n_records = static_cast<int>(d.record_ids.size());
    if (d.qualifying) {
      std::set<std::int64_t> train_days = qualifying;
      train_days.erase(d.day);
      BayesNetModel loo_model =
          fit_on_rows(t, rows_of_days(t, rows, train_days), columns, options);
      s.log_likelihood = score_day(loo_model, t, rows, columns, d.day);
      s.loo = true;
      s.group = "normal";
    } else {
      s.log_likelihood = score_day(full_model, t, rows, columns, d.day);
      s.loo = false;
      s.group = d.health == 0 ? "normal_single" : "weak";
    }
    out.push_back(std::move(s));
  }
  return out;
}

double cohens_d(std::span<const double> group_a, std::span<const double> group_b) {
  const std::size_t na = group_a.size(), nb = group_b.size();
  if (na < 2 || nb < 2)
    throw std::invalid_argument("cohens_d: each group needs >= 2 samples");
  auto mean = [](std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto sample_var = [&](std::span<const double> v, double m) {
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
  };
  double ma = mean(group_a), mb = mean(group_b);
  double va = sample_var(group_a, ma), vb = sample_var(group_b, mb);
  double pooled = ((na - 1) * va + (nb - 1) * vb) / static_cast<double>(na + nb - 2);
  if (!(pooled > 0)) throw std::invalid_argument("cohens_d: degenerate groups");
  return (ma - mb) / std::sqrt(pooled);
}

std::vector<bool> flag_days(std::span<const double> scores,
                            std::span<const double> normal_scores,
                            double k_sigma) {
  if (normal_scores.size() < 2)
    throw std::invalid_argument("flag_days: need >= 2 normal-day scores");
  double mean = 0;
  for (double s : normal_scores) mean += s;
  mean /= static_cast<double>(normal_scores.size());
  double var = 0;
  for (double s : normal_scores) var += (s - mean) * (s - mean);
  var /= static_cast<double>(normal_scores.size() - 1);
  double threshold = mean - k_sigma * std::sqrt(var);
  std::vector<bool> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] < threshold;
  return out;
}

AnomalyReport anomaly_report(const FeatureTable& t,
                             const std::vector<std::size_t>& rows,
                             const std::vector<int>& columns, double k_sigma,
                             const FitOptions& options) {
  AnomalyReport report;
  report.days = loo_scores(t, rows, columns, options);

  std::vector<double> normal_ll, weak_ll, all_ll;
  for (const auto& d : report.days) {
    all_ll.push_back(d.log_likelihood);
    if (d.group == "normal") normal_ll.push_back(d.log_likelihood);
    if (d.group == "weak") weak_ll.push_back(d.log_likelihood);
  }
  if (normal_ll.size() >= 2 && weak_ll.size() >= 2)
    report.cohen_d = cohens_d(normal_ll, weak_ll);

  if (normal_ll.size() >= 2) {
    auto flags = flag_days(all_ll, normal_ll, k_sigma);
    for (std::size_t i = 0; i < report.days.size(); ++i)
      report.days[i].flagged = flags[i];
  }
  return report;
}

std::string AnomalyReport::to_json() const {
  nlohmann::json day_rows = nlohmann::json::array();
  for (const auto& d : days) {
    day_rows.push_back(nlohmann::json{{"day", d.day},
                                      {"health", d.health},
                                      {"n_records", d.n_records},
                                      {"log_likelihood", d.log_likelihood},
                                      {"loo", d.loo},
                                      {"group", d.group},
                                      {"flagged", d.flagged}});
  }
  nlohmann::json j{{"days", day_rows}, {"cohen_d", cohen_d}};
  return j.dump(2);
}

std::string AnomalyReport::to_csv() const {
  std::ostringstream out;
  out << "day,n_records,log_likelihood,flagged,group\n";
  for (const auto& d : days) {
    out << d.day << ',' << d.n_records << ',' << d.log_likelihood << ','
        << (d.flagged ? 1 : 0) << ',' << d.group << '\n';
  }
  return out.str();
}

}  // namespace frailwatch
