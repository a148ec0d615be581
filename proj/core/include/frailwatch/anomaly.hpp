#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "frailwatch/bayes_net.hpp"

namespace frailwatch {

struct DayGroup {
  std::string participant_id;
  std::int64_t day = 0;
  std::vector<std::string> record_ids;
  int health = -1;        // majority of the day's record labels
  bool qualifying = false;  // normal day with >= 2 records
};

// Groups a window-level feature table into days (06:00-anchored). A day's
// health is the majority of its records' labels.
std::vector<DayGroup> group_days(const FeatureTable& t,
                                 const std::vector<std::size_t>& rows);

// Fits the normal model on windows from qualifying normal days only.
// Throws when fewer than two days qualify.
BayesNetModel train_normal_model(const FeatureTable& t,
                                 const std::vector<std::size_t>& rows,
                                 const std::vector<int>& columns,
                                 const FitOptions& options = FitOptions{});

struct DayScore {
  std::int64_t day = 0;
  int health = -1;
  int n_records = 0;
  double log_likelihood = 0;
  bool loo = false;      // scored by a leave-this-day-out model
  std::string group;     // "normal", "weak", "normal_single"
  bool flagged = false;  // filled by flag_days
};

// Leave-one-day-out scoring: each qualifying normal day is scored by a model
// trained on the other qualifying normal days; weak days (and normal days
// with a single record) are scored by the model trained on all qualifying
// normal days. A day's score is the mean over its records of the record mean
// window log-likelihood.
std::vector<DayScore> loo_scores(const FeatureTable& t,
                                 const std::vector<std::size_t>& rows,
                                 const std::vector<int>& columns,
                                 const FitOptions& options = FitOptions{});

// Pooled-variance Cohen's d between two groups (sample variances).
// Throws on groups smaller than two or zero pooled variance.
double cohens_d(std::span<const double> group_a, std::span<const double> group_b);

// A day is flagged when its score drops below mean(normal) - k_sigma *
// std(normal) (sample std over the normal scores).
std::vector<bool> flag_days(std::span<const double> scores,
                            std::span<const double> normal_scores,
                            double k_sigma = 2.0);

struct AnomalyReport {
  std::vector<DayScore> days;
  double cohen_d = 0;  // normal (LOO) vs weak day scores
  std::string to_json() const;
  std::string to_csv() const;
};

AnomalyReport anomaly_report(const FeatureTable& t,
                             const std::vector<std::size_t>& rows,
                             const std::vector<int>& columns, double k_sigma = 2.0,
                             const FitOptions& options = FitOptions{});

}  // namespace frailwatch
