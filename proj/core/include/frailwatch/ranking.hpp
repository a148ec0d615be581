#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frailwatch/classifiers.hpp"

namespace frailwatch {

// One method's scores over a common item set. Ranks are 1 = best with
// mean-rank ties; +inf sentinel scores (separable FDR) rank first.
struct ScoreTable {
  std::string method;
  std::vector<std::string> items;
  std::vector<double> scores;
  std::vector<double> ranks;
};

void compute_ranks(ScoreTable& table);

// Fisher discriminant ratio (mu1-mu2)^2 / (sigma1+sigma2), population sigmas.
// Degenerate spread with distinct means returns +inf; identical means 0.
double score_fdr(std::span<const double> class_a, std::span<const double> class_b);

// Discrete mutual information between an equal-frequency binned feature and
// the binary label, natural log. Bins collapse to the distinct-value count.
double score_mi(std::span<const double> values, std::span<const int> labels,
                int bins = 10);

// |pearson(F_i, H)| / mean_{j != i} |pearson(F_i, F_j)|, denominator floored.
double score_cfs(const std::vector<std::vector<double>>& feature_columns,
                 std::size_t i, std::span<const int> labels);

enum class SelectionDirection { Forward, Backward };

// Greedy selection over feature groups; a group's score is the cross-validated
// F1-macro of the model at the step it entered (forward) or just before its
// removal (backward). Groups the forward pass never reached score 0.
ScoreTable score_by_selection(const ClassifierSpec& spec, const FeatureTable& t,
                              const std::vector<std::size_t>& rows,
                              const std::vector<int>& groups,
                              SelectionDirection direction, int k,
                              std::uint64_t seed, int max_steps = 30);

// Aggregators. All tables must cover the same item set in the same order.
std::vector<double> aggregate_borda(const std::vector<ScoreTable>& tables);
std::vector<double> aggregate_nwa(const std::vector<ScoreTable>& tables,
                                  std::span<const double> weights = {});
std::vector<double> aggregate_consensus(const std::vector<ScoreTable>& tables,
                                        int top_m);

struct RankingReport {
  std::vector<std::string> items;
  std::vector<ScoreTable> methods;
  std::vector<double> borda;
  std::vector<double> nwa;
  std::vector<double> consensus;
  std::vector<double> final_score;  // sum of min-max normalized aggregates
  std::vector<std::size_t> order;   // item indices, best first
  std::vector<std::string> warnings;

  std::string to_json() const;
  std::string to_csv() const;
};

// Normalizes each aggregator to [0,1] over items and sums them; the final
// ordering breaks ties by item id.
RankingReport final_ranking(const std::vector<ScoreTable>& tables, int top_m);

struct FeatureRankingOptions {
  bool info_methods = true;        // FDR, MI, CFS
  bool classifier_methods = true;  // BN/RF/SVM selection
  SelectionDirection direction = SelectionDirection::Forward;
  int mi_bins = 10;
  int k_folds = 5;
  int top_m = 10;  // consensus cutoff
  std::uint64_t seed = 0;
};

// Ranks the 66 feature groups; the object group is scored by its best column.
RankingReport rank_features(const FeatureTable& t,
                            const std::vector<std::size_t>& rows,
                            const FeatureRankingOptions& options);

struct ActivityRankingOptions {
  std::vector<int> info_top_ms = {5, 10};
  int k_folds = 5;
  int top_m = 2;  // consensus cutoff over activities
  int min_samples_per_class = 4;
  int max_forward_steps = 30;
  std::uint64_t seed = 0;
  RfParams rf;    // hyperparameters for the classifier-based tables
  SvmParams svm;
};

// Ranks activities from 12 base tables: {FDR,MI,CFS} x {top-5,top-10} feature
// score means within each activity, and {BN,RF,SVM} x {forward,backward}
// best cross-validated F1 on each activity's rows. Activities lacking
// min_samples_per_class in either class are dropped with a warning.
RankingReport rank_activities(const FeatureTable& t,
                              const std::vector<std::size_t>& rows,
                              const ActivityRankingOptions& options);

}  // namespace frailwatch
