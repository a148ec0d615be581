#include "frailwatch/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "frailwatch/bayes_net.hpp"
#include "frailwatch/rng.hpp"

namespace frailwatch {

ClassifierKind parse_classifier_kind(const std::string& s) {
  if (s == "bn") return ClassifierKind::BayesNet;
  if (s == "rf") return ClassifierKind::RandomForest;
  if (s == "svm") return ClassifierKind::LinearSvm;
  throw std::invalid_argument("unknown classifier: '" + s + "' (want bn|rf|svm)");
}

const char* classifier_kind_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::BayesNet: return "bn";
    case ClassifierKind::RandomForest: return "rf";
    default: return "svm";
  }
}

void ColumnImputer::fit(const FeatureTable& t, const std::vector<std::size_t>& rows,
                        const std::vector<int>& cols) {
  columns = cols;
  means.assign(cols.size(), 0.0);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    double sum = 0;
    std::size_t n = 0;
    for (std::size_t r : rows) {
      if (t.defined[r][cols[c]]) {
        sum += t.values[r][cols[c]];
        ++n;
      }
    }
    means[c] = n > 0 ? sum / n : 0.0;
  }
}

std::vector<double> ColumnImputer::row(const FeatureTable& t, std::size_t r) const {
  std::vector<double> out(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out[c] = t.defined[r][columns[c]] ? t.values[r][columns[c]] : means[c];
  }
  return out;
}

Problem make_problem(const FeatureTable& t, const std::vector<std::size_t>& rows,
                     const std::vector<int>& columns, const ColumnImputer& imputer) {
  Problem p;
  p.column_ids = columns;
  p.x.reserve(rows.size());
  for (std::size_t r : rows) {
    p.x.push_back(imputer.row(t, r));
    p.y.push_back(t.health[r]);
    p.activity.push_back(t.activity[r]);
    p.env.push_back(env_from_row(t.values[r]));
  }
  return p;
}

// --------------------------------------------------------------------------
// Linear SVM: subgradient descent on hinge loss + L2, Pegasos-style schedule
// eta_t = 1/(lambda t) with lambda = 1/(C n). Features are standardized
// internally; the bias stays unregularized.
// --------------------------------------------------------------------------

LinearSvm::LinearSvm(const SvmParams& params, std::uint64_t seed,
                     const Problem& problem) {
  const std::size_t n = problem.rows();
  const std::size_t d = problem.cols();
  if (n == 0 || d == 0) throw std::invalid_argument("svm: empty problem");

  mean_.assign(d, 0.0);
  scale_.assign(d, 1.0);
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0;
    for (const auto& row : problem.x) s += row[j];
    mean_[j] = s / n;
    double v = 0;
    for (const auto& row : problem.x) v += (row[j] - mean_[j]) * (row[j] - mean_[j]);
    double sd = std::sqrt(v / n);
    scale_[j] = sd > 1e-12 ? sd : 1.0;
  }

  std::vector<std::vector<double>> xs(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      xs[i][j] = (problem.x[i][j] - mean_[j]) / scale_[j];

  w_.assign(d, 0.0);
  b_ = 0;
  const double lambda = 1.0 / (params.C * static_cast<double>(n));
  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::uint64_t t = 0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double y = problem.y[i] == 1 ? 1.0 : -1.0;
      double margin = b_;
      for (std::size_t j = 0; j < d; ++j) margin += w_[j] * xs[i][j];
      margin *= y;
      const double shrink = 1.0 - eta * lambda;
      for (std::size_t j = 0; j < d; ++j) w_[j] *= shrink;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < d; ++j) w_[j] += eta * y * xs[i][j];
        b_ += eta * y;
      }
    }
  }
}

double LinearSvm::decision(std::span<const double> x) const {
  double s = b_;
  for (std::size_t j = 0; j < w_.size(); ++j)
    s += w_[j] * (x[j] - mean_[j]) / scale_[j];
  return s;
}

int LinearSvm::predict(std::span<const double> x, int, const EnvObservation*) const {
  return decision(x) >= 0 ? 1 : 0;
}

// --------------------------------------------------------------------------
// Bayesian network adapter
// --------------------------------------------------------------------------

namespace {

class BnClassifier : public Classifier {
 public:
  BnClassifier(const Problem& problem) {
    BnTrainingData data;
    data.x = &problem.x;
    data.health = &problem.y;
    data.activity = &problem.activity;
    data.env = &problem.env;
    model_ = fit_ml(data, problem.column_ids, FitOptions{});
    // The fit may drop constant columns; keep the projection from the
    // problem's column order onto the model's selected features.
    for (int col : model_.selected_columns) {
      auto it = std::find(problem.column_ids.begin(), problem.column_ids.end(), col);
      kept_.push_back(static_cast<std::size_t>(it - problem.column_ids.begin()));
    }
  }

  int predict(std::span<const double> x, int activity,
              const EnvObservation* env) const override {
    std::vector<double> projected(kept_.size());
    for (std::size_t i = 0; i < kept_.size(); ++i) projected[i] = x[kept_[i]];
    EnvObservation fallback;
    const EnvObservation& e = env ? *env : fallback;
    std::array<double, 2> post{};
    if (activity >= 0) {
      post = posterior_health(model_, activity, e, projected);
    } else {
      auto joint = posterior_joint(model_, e, projected);
      post = {0, 0};
      for (int a = 0; a < kActivityCount; ++a)
        for (int h = 0; h < 2; ++h) post[h] += joint[a * 2 + h];
    }
    return post[1] >= post[0] ? 1 : 0;
  }

 private:
  BayesNetModel model_;
  std::vector<std::size_t> kept_;
};

}  // namespace

std::unique_ptr<Classifier> train_classifier(const ClassifierSpec& spec,
                                             const Problem& problem) {
  if (problem.rows() == 0) throw std::invalid_argument("train: empty problem");
  if (problem.cols() == 0) throw std::invalid_argument("train: no features");
  bool has0 = false, has1 = false;
  for (int y : problem.y) {
    if (y == 1) has1 = true;
    else if (y == 0) has0 = true;
  }
  if (!has0 || !has1)
    throw std::invalid_argument("train: labels contain a single class");

  switch (spec.kind) {
    case ClassifierKind::RandomForest:
      return std::make_unique<RandomForest>(spec.rf, spec.seed, problem);
    case ClassifierKind::LinearSvm:
      return std::make_unique<LinearSvm>(spec.svm, spec.seed, problem);
    default:
      return std::make_unique<BnClassifier>(problem);
  }
}

// --------------------------------------------------------------------------
// Metrics and cross-validation
// --------------------------------------------------------------------------

std::pair<double, double> f1_scores(std::span<const int> y_true,
                                    std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("f1_scores: length mismatch");
  if (y_true.empty()) throw std::invalid_argument("f1_scores: empty input");

  double correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i)
    if (y_true[i] == y_pred[i]) ++correct;
  double micro = correct / static_cast<double>(y_true.size());

  double macro = 0;
  for (int cls = 0; cls < 2; ++cls) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      bool t = y_true[i] == cls, p = y_pred[i] == cls;
      if (t && p) ++tp;
      else if (!t && p) ++fp;
      else if (t && !p) ++fn;
    }
    // Class absent from truth and prediction counts as perfect.
    double f1 = (2 * tp + fp + fn) == 0
                    ? 1.0
                    : 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
    macro += f1;
  }
  return {macro / 2.0, micro};
}

std::vector<int> stratified_folds(std::span<const int> labels, int k,
                                  std::uint64_t seed) {
  std::vector<int> fold(labels.size(), -1);
  Rng rng(seed);
  int cursor = 0;
  for (int cls : {0, 1, -1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    if (idx.empty()) continue;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i : idx) {
      fold[i] = cursor;
      cursor = (cursor + 1) % k;
    }
  }
  return fold;
}

EvalReport cross_validate(const ClassifierSpec& spec, const FeatureTable& t,
                          const std::vector<std::size_t>& rows,
                          const std::vector<int>& columns, int k,
                          std::uint64_t seed) {
  if (static_cast<int>(rows.size()) < k)
    throw std::invalid_argument("cross_validate: fewer samples than folds");
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (std::size_t r : rows) labels.push_back(t.health[r]);
  bool has0 = false, has1 = false;
  for (int y : labels) {
    if (y == 1) has1 = true;
    else if (y == 0) has0 = true;
  }
  if (!has0 || !has1)
    throw std::invalid_argument("cross_validate: single-class labels");

  std::vector<int> fold = stratified_folds(labels, k, seed);

  EvalReport report;
  report.k = k;
  report.rows = rows;
  report.fold_of = fold;
  report.y_true = labels;
  report.y_pred.assign(rows.size(), 0);

  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train_rows, val_local;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (fold[i] == f)
        val_local.push_back(i);
      else
        train_rows.push_back(rows[i]);
    }
    if (val_local.empty()) continue;

    ColumnImputer imputer;
    imputer.fit(t, train_rows, columns);
    Problem problem = make_problem(t, train_rows, columns, imputer);
    ClassifierSpec fold_spec = spec;
    fold_spec.seed = derive_seed(seed, static_cast<std::uint64_t>(f));
    auto model = train_classifier(fold_spec, problem);

    for (std::size_t i : val_local) {
      std::size_t r = rows[i];
      std::vector<double> x = imputer.row(t, r);
      EnvObservation env = env_from_row(t.values[r]);
      report.y_pred[i] = model->predict(x, t.activity[r], &env);
    }
  }

  auto [macro, micro] = f1_scores(report.y_true, report.y_pred);
  report.f1_macro = macro;
  report.f1_micro = micro;
  for (std::size_t i = 0; i < report.y_true.size(); ++i)
    report.confusion[report.y_true[i]][report.y_pred[i]] += 1;
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::json folds = nlohmann::json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    folds.push_back(nlohmann::json{{"row", rows[i]},
                                   {"fold", fold_of[i]},
                                   {"y_true", y_true[i]},
                                   {"y_pred", y_pred[i]}});
  }
  nlohmann::json j{{"k", k},
                   {"f1_macro", f1_macro},
                   {"f1_micro", f1_micro},
                   {"confusion", {{confusion[0][0], confusion[0][1]},
                                  {confusion[1][0], confusion[1][1]}}},
                   {"predictions", folds}};
  return j.dump(2);
}

}  // namespace frailwatch
