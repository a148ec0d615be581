#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "frailwatch/feature_table.hpp"

namespace frailwatch {

enum class ClassifierKind { BayesNet, RandomForest, LinearSvm };

struct RfParams {
  int n_trees = 100;
  int max_depth = 0;          // 0 = unlimited
  int features_per_split = 0; // 0 = ceil(sqrt(d))
  bool bootstrap = true;
};

struct SvmParams {
  double C = 1.0;
  int epochs = 200;
};

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::BayesNet;
  RfParams rf;
  SvmParams svm;
  std::uint64_t seed = 0;
};

ClassifierKind parse_classifier_kind(const std::string& s);  // "bn" "rf" "svm"
const char* classifier_kind_name(ClassifierKind k);

// Dense, imputed training problem. activity/env are carried for the Bayesian
// network and ignored by the discriminative models.
struct Problem {
  std::vector<std::vector<double>> x;  // n rows, d columns
  std::vector<int> y;                  // 0 = normal, 1 = weak
  std::vector<int> activity;           // enum ints, -1 unknown; may be empty
  std::vector<EnvObservation> env;     // may be empty
  std::vector<int> column_ids;         // source feature columns (bookkeeping)

  std::size_t rows() const { return x.size(); }
  std::size_t cols() const { return x.empty() ? 0 : x.front().size(); }
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  // activity < 0 means unknown; env may be null when the model does not use it.
  virtual int predict(std::span<const double> x, int activity,
                      const EnvObservation* env) const = 0;
};

// Per-fold mean imputation of undefined cells; fitted on the training fold so
// validation rows never leak statistics.
struct ColumnImputer {
  std::vector<int> columns;
  std::vector<double> means;

  void fit(const FeatureTable& t, const std::vector<std::size_t>& rows,
           const std::vector<int>& cols);
  std::vector<double> row(const FeatureTable& t, std::size_t r) const;
};

Problem make_problem(const FeatureTable& t, const std::vector<std::size_t>& rows,
                     const std::vector<int>& columns, const ColumnImputer& imputer);

// Trains one classifier. Throws std::invalid_argument on single-class labels
// or an empty feature set. Deterministic for a fixed spec/seed.
std::unique_ptr<Classifier> train_classifier(const ClassifierSpec& spec,
                                             const Problem& problem);

// (macro, micro). Micro equals global accuracy for single-label binary
// classification. A class absent from both truth and prediction contributes
// F1 = 1 to the macro mean.
std::pair<double, double> f1_scores(std::span<const int> y_true,
                                    std::span<const int> y_pred);

struct EvalReport {
  int k = 0;
  std::vector<std::size_t> rows;  // evaluated rows, in input order
  std::vector<int> fold_of;       // per evaluated row
  std::vector<int> y_true;
  std::vector<int> y_pred;
  double f1_macro = 0;
  double f1_micro = 0;
  std::array<std::array<int, 2>, 2> confusion{};  // [truth][pred]

  std::string to_json() const;
};

// Stratified shuffled k-fold: per-class shuffle, then round-robin dealing with
// a shared fold cursor so both the fold sizes and class ratios stay within one
// sample. Predictions are pooled out-of-fold.
std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);

EvalReport cross_validate(const ClassifierSpec& spec, const FeatureTable& t,
                          const std::vector<std::size_t>& rows,
                          const std::vector<int>& columns, int k, std::uint64_t seed);

// Random forest internals exposed for tests (out-of-bag estimate).
class RandomForest : public Classifier {
 public:
  RandomForest(const RfParams& params, std::uint64_t seed, const Problem& problem);
  int predict(std::span<const double> x, int activity,
              const EnvObservation* env) const override;
  double oob_accuracy() const { return oob_accuracy_; }

  struct Node {
    int feature = -1;       // -1 for leaves
    double threshold = 0;   // go left when x[feature] <= threshold
    int left = -1, right = -1;
    int label = 0;
  };
  struct Tree {
    std::vector<Node> nodes;
    int predict(std::span<const double> x) const;
  };
  const std::vector<Tree>& trees() const { return trees_; }

 private:
  std::vector<Tree> trees_;
  double oob_accuracy_ = 0;
};

class LinearSvm : public Classifier {
 public:
  LinearSvm(const SvmParams& params, std::uint64_t seed, const Problem& problem);
  int predict(std::span<const double> x, int activity,
              const EnvObservation* env) const override;
  double decision(std::span<const double> x) const;

 private:
  std::vector<double> w_;
  double b_ = 0;
  std::vector<double> mean_, scale_;
};

}  // namespace frailwatch
