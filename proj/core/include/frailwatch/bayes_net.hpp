#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "frailwatch/feature_table.hpp"

namespace frailwatch {

// Bayesian network over health H, environment E, activity A and continuous
// features F with the factorization
//   P(H,E,A,F) = P(H) P(E) P(A|H,E) P(F|A,H),
// where the env components are independent discretized nodes (time-of-day,
// weather, lighting tercile, dominant object) and each feature is a
// conditional Gaussian given (A,H) on standardized values.

inline constexpr int kLightingTerciles = 3;
inline constexpr int kDominantStates = kObjectCount + 1;  // 20 = "none"
inline constexpr int kEnvStates = 3 * 2 * kLightingTerciles * kDominantStates;
inline constexpr int kAhCells = kActivityCount * kHealthStates;

struct Gaussian {
  double mean = 0.0;
  double var = 1.0;
  double log_pdf(double x) const;
};

struct EnvCell {
  int tod = 0;
  int weather = 0;
  int tercile = 0;
  int dominant = kObjectCount;
};

struct FitOptions {
  double var_floor = 1e-6;
  int max_iter = 200;
  double tol = 1e-6;
};

struct BayesNetModel {
  std::array<double, kHealthStates> prior_h{};
  std::array<double, 3> prior_tod{};
  std::array<double, 2> prior_weather{};
  std::array<double, kLightingTerciles> prior_tercile{};
  std::array<double, kDominantStates> prior_dominant{};
  std::array<double, 2> lighting_cuts{};  // tercile boundaries from training data
  // P(A | H, E): [h * kEnvStates + env][a]
  std::vector<std::array<double, kActivityCount>> cpt_activity;
  // Conditional Gaussians per selected feature: cell index a*2+h.
  std::vector<int> selected_columns;
  std::vector<std::array<Gaussian, kAhCells>> gaussians;
  std::vector<double> standardize_mean;
  std::vector<double> standardize_std;
  std::vector<std::string> warnings;

  int lighting_tercile(double luma) const;
  EnvCell discretize(const EnvObservation& e) const;
  static int env_index(const EnvCell& e);

  // Throws ValidationError if a probability row fails to normalize, a
  // variance is below floor, or a standardization std is not positive.
  void validate() const;

  std::string to_json() const;
  static BayesNetModel from_json(const std::string& text);
};

// Training rows, dense and already imputed. health must be observed (0/1);
// activity may be -1 (unknown) for EM.
struct BnTrainingData {
  const std::vector<std::vector<double>>* x = nullptr;
  const std::vector<int>* health = nullptr;
  const std::vector<int>* activity = nullptr;
  const std::vector<EnvObservation>* env = nullptr;

  std::size_t rows() const { return x ? x->size() : 0; }
};

// Maximum-likelihood fit with add-one smoothing on every CPT. Gaussian cells
// without data fall back to the health-marginal Gaussian; variances are
// floored. Constant features are dropped with a warning. Requires observed
// activity on every row.
BayesNetModel fit_ml(const BnTrainingData& data, const std::vector<int>& column_ids,
                     const FitOptions& options);

struct EmResult {
  BayesNetModel model;
  // EM training objective per iteration: data log-likelihood plus the CPT
  // smoothing prior. Non-decreasing within numerical slack.
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
};

// Batch EM over rows whose activity is unknown. With zero unknown labels the
// result is identical to fit_ml.
EmResult fit_em(const BnTrainingData& data, const std::vector<int>& column_ids,
                const FitOptions& options);

// log P(H=h, E=e, A=a, F=f). Features are standardized internally; the
// returned value is a proper log density over the raw feature space.
double joint_log_prob(const BayesNetModel& m, int h, const EnvObservation& e,
                      int a, std::span<const double> f);

// P(H | A,E,F), normalized in log space. Throws std::runtime_error
// ("evidence impossible") when every candidate underflows to -inf.
std::array<double, kHealthStates> posterior_health(const BayesNetModel& m, int a,
                                                   const EnvObservation& e,
                                                   std::span<const double> f);

// P(A,H | E,F) over the 10 cells, index a*2+h.
std::array<double, kAhCells> posterior_joint(const BayesNetModel& m,
                                             const EnvObservation& e,
                                             std::span<const double> f);

// Mean over windows of log sum_H P(H,E,A,F) with observed activity: the
// record-level score used by anomaly detection.
double record_log_likelihood(const BayesNetModel& m,
                             const std::vector<std::vector<double>>& window_x,
                             const std::vector<int>& window_activity,
                             const std::vector<EnvObservation>& window_env);

}  // namespace frailwatch
