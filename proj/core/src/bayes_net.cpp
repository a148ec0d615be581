#include "frailwatch/bayes_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace frailwatch {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kMinCellWeight = 1e-12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct GaussStat {
  double w = 0, sum = 0, sumsq = 0;
};

struct SuffStats {
  double n = 0;
  std::array<double, kHealthStates> h_count{};
  std::array<double, 3> tod_count{};
  std::array<double, 2> weather_count{};
  std::array<double, kLightingTerciles> tercile_count{};
  std::array<double, kDominantStates> dominant_count{};
  std::vector<std::array<double, kActivityCount>> a_count;  // [h*env][a]
  std::vector<std::array<GaussStat, kAhCells>> gauss;       // per kept feature
  std::vector<std::array<GaussStat, kHealthStates>> gauss_h;

  explicit SuffStats(std::size_t n_features)
      : a_count(kHealthStates * kEnvStates),
        gauss(n_features),
        gauss_h(n_features) {}
};

double logsumexp(std::span<const double> v) {
  double mx = kNegInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  double s = 0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

double Gaussian::log_pdf(double x) const {
  double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

int BayesNetModel::lighting_tercile(double luma) const {
  if (luma < lighting_cuts[0]) return 0;
  if (luma < lighting_cuts[1]) return 1;
  return 2;
}

EnvCell BayesNetModel::discretize(const EnvObservation& e) const {
  EnvCell c;
  c.tod = std::clamp(e.time_of_day, 0, 2);
  c.weather = e.weather ? 1 : 0;
  c.tercile = lighting_tercile(e.lighting);
  c.dominant = std::clamp(e.dominant_object, 0, kDominantStates - 1);
  return c;
}

int BayesNetModel::env_index(const EnvCell& e) {
  return ((e.tod * 2 + e.weather) * kLightingTerciles + e.tercile) *
             kDominantStates +
         e.dominant;
}

namespace {

void check_normalized(std::span<const double> row, const char* what) {
  double s = 0;
  for (double v : row) {
    if (!(v >= 0.0 && v <= 1.0))
      throw ValidationError(std::string(what) + ": probability outside [0,1]");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9)
    throw ValidationError(std::string(what) + ": row does not sum to 1");
}

}  // namespace

void BayesNetModel::validate() const {
  check_normalized(prior_h, "prior_h");
  check_normalized(prior_tod, "prior_tod");
  check_normalized(prior_weather, "prior_weather");
  check_normalized(prior_tercile, "prior_tercile");
  check_normalized(prior_dominant, "prior_dominant");
  if (cpt_activity.size() != kHealthStates * kEnvStates)
    throw ValidationError("cpt_activity has wrong shape");
  for (const auto& row : cpt_activity) check_normalized(row, "cpt_activity");
  if (gaussians.size() != selected_columns.size() ||
      standardize_mean.size() != selected_columns.size() ||
      standardize_std.size() != selected_columns.size())
    throw ValidationError("per-feature tables misaligned with selected columns");
  for (std::size_t f = 0; f < gaussians.size(); ++f) {
    if (!(standardize_std[f] > 0))
      throw ValidationError("standardization std must be positive");
    for (const auto& g : gaussians[f]) {
      if (!(g.var >= 1e-6 - 1e-12))
        throw ValidationError("gaussian variance below floor");
    }
  }
}

// --------------------------------------------------------------------------
// Fitting
// --------------------------------------------------------------------------

namespace {

struct FitContext {
  std::vector<int> column_ids;       // kept columns
  std::vector<std::size_t> kept;     // indices into input x columns
  std::vector<double> std_mean, std_std;
  std::array<double, 2> cuts{};
  std::vector<std::string> warnings;
};

FitContext prepare(const BnTrainingData& data, const std::vector<int>& column_ids) {
  if (!data.x || !data.health || !data.activity || !data.env)
    throw std::invalid_argument("bayes net fit: missing training arrays");
  const std::size_t n = data.rows();
  if (n == 0) throw std::invalid_argument("bayes net fit: empty dataset");
  if (data.health->size() != n || data.activity->size() != n ||
      data.env->size() != n)
    throw std::invalid_argument("bayes net fit: misaligned training arrays");
  const std::size_t d = (*data.x)[0].size();
  if (column_ids.size() != d)
    throw std::invalid_argument("bayes net fit: column_ids do not match data width");
  for (int h : *data.health)
    if (h != 0 && h != 1)
      throw std::invalid_argument("bayes net fit: health must be observed");

  FitContext ctx;
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0;
    for (const auto& row : *data.x) sum += row[j];
    double mean = sum / n;
    double var = 0;
    for (const auto& row : *data.x) var += (row[j] - mean) * (row[j] - mean);
    double sd = std::sqrt(var / n);
    if (sd <= 0) {
      ctx.warnings.push_back("feature " + column_name(column_ids[j]) +
                             " constant across training data; excluded");
      continue;
    }
    ctx.kept.push_back(j);
    ctx.column_ids.push_back(column_ids[j]);
    ctx.std_mean.push_back(mean);
    ctx.std_std.push_back(sd);
  }

  std::vector<double> lighting;
  lighting.reserve(n);
  for (const auto& e : *data.env) lighting.push_back(e.lighting);
  std::sort(lighting.begin(), lighting.end());
  ctx.cuts[0] = lighting[lighting.size() / 3];
  ctx.cuts[1] = lighting[(2 * lighting.size()) / 3];
  return ctx;
}

// Adds one row with the given activity responsibilities (index a, weight w).
void accumulate(SuffStats& stats, const FitContext& ctx, const BayesNetModel& proto,
                const BnTrainingData& data, std::size_t r,
                std::span<const double> resp) {
  int h = (*data.health)[r];
  EnvCell cell = proto.discretize((*data.env)[r]);
  int env = BayesNetModel::env_index(cell);
  stats.n += 1;
  stats.h_count[h] += 1;
  stats.tod_count[cell.tod] += 1;
  stats.weather_count[cell.weather] += 1;
  stats.tercile_count[cell.tercile] += 1;
  stats.dominant_count[cell.dominant] += 1;

  const auto& row = (*data.x)[r];
  for (std::size_t f = 0; f < ctx.kept.size(); ++f) {
    double z = (row[ctx.kept[f]] - ctx.std_mean[f]) / ctx.std_std[f];
    auto& gh = stats.gauss_h[f][h];
    gh.w += 1;
    gh.sum += z;
    gh.sumsq += z * z;
    for (int a = 0; a < kActivityCount; ++a) {
      double w = resp[a];
      if (w <= 0) continue;
      auto& g = stats.gauss[f][a * 2 + h];
      g.w += w;
      g.sum += w * z;
      g.sumsq += w * z * z;
    }
  }
  auto& arow = stats.a_count[h * kEnvStates + env];
  for (int a = 0; a < kActivityCount; ++a)
    if (resp[a] > 0) arow[a] += resp[a];
}

BayesNetModel m_step(const SuffStats& stats, const FitContext& ctx,
                     const BayesNetModel* prev, const FitOptions& options) {
  BayesNetModel m;
  m.selected_columns = ctx.column_ids;
  m.standardize_mean = ctx.std_mean;
  m.standardize_std = ctx.std_std;
  m.lighting_cuts = ctx.cuts;
  m.warnings = ctx.warnings;

  auto smooth = [](std::span<const double> counts, std::span<double> out) {
    double total = 0;
    for (double c : counts) total += c;
    double denom = total + static_cast<double>(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
      out[i] = (counts[i] + 1.0) / denom;
  };
  smooth(stats.h_count, m.prior_h);
  smooth(stats.tod_count, m.prior_tod);
  smooth(stats.weather_count, m.prior_weather);
  smooth(stats.tercile_count, m.prior_tercile);
  smooth(stats.dominant_count, m.prior_dominant);

  m.cpt_activity.resize(kHealthStates * kEnvStates);
  for (std::size_t i = 0; i < m.cpt_activity.size(); ++i)
    smooth(stats.a_count[i], m.cpt_activity[i]);

  const double floor = std::max(options.var_floor, 1e-6);
  m.gaussians.resize(ctx.kept.size());
  for (std::size_t f = 0; f < ctx.kept.size(); ++f) {
    // Health-marginal fallback for cells with no data.
    std::array<Gaussian, kHealthStates> marginal;
    for (int h = 0; h < kHealthStates; ++h) {
      const auto& gh = stats.gauss_h[f][h];
      if (gh.w >= kMinCellWeight) {
        double mean = gh.sum / gh.w;
        double var = std::max(gh.sumsq / gh.w - mean * mean, floor);
        marginal[h] = Gaussian{mean, var};
      } else {
        marginal[h] = Gaussian{0.0, 1.0};
      }
    }
    for (int a = 0; a < kActivityCount; ++a) {
      for (int h = 0; h < kHealthStates; ++h) {
        const auto& g = stats.gauss[f][a * 2 + h];
        if (g.w >= kMinCellWeight) {
          double mean = g.sum / g.w;
          double var = std::max(g.sumsq / g.w - mean * mean, floor);
          m.gaussians[f][a * 2 + h] = Gaussian{mean, var};
        } else if (prev) {
          m.gaussians[f][a * 2 + h] = prev->gaussians[f][a * 2 + h];
        } else {
          m.gaussians[f][a * 2 + h] = marginal[h];
        }
      }
    }
  }
  return m;
}

// Joint log density for a row already projected to the model's kept columns
// and standardized.
double joint_log_z(const BayesNetModel& m, int h, int env_idx, int a,
                   std::span<const double> z) {
  double lp = std::log(m.prior_h[h]) + std::log(m.cpt_activity[h * kEnvStates + env_idx][a]);
  for (std::size_t f = 0; f < z.size(); ++f) {
    lp += m.gaussians[f][a * 2 + h].log_pdf(z[f]);
    lp -= std::log(m.standardize_std[f]);  // density over raw feature space
  }
  return lp;
}

double log_prior_env(const BayesNetModel& m, const EnvCell& c) {
  return std::log(m.prior_tod[c.tod]) + std::log(m.prior_weather[c.weather]) +
         std::log(m.prior_tercile[c.tercile]) +
         std::log(m.prior_dominant[c.dominant]);
}

// Data log-likelihood plus the add-one (Dirichlet) smoothing prior over all
// CPT cells: the quantity batch EM maximizes, so its trace is monotone.
double em_objective(const BayesNetModel& m, const FitContext& ctx,
                    const BnTrainingData& data) {
  double ll = 0;
  std::vector<double> z(ctx.kept.size());
  std::array<double, kActivityCount> cand;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const auto& row = (*data.x)[r];
    for (std::size_t f = 0; f < ctx.kept.size(); ++f)
      z[f] = (row[ctx.kept[f]] - ctx.std_mean[f]) / ctx.std_std[f];
    int h = (*data.health)[r];
    EnvCell cell = m.discretize((*data.env)[r]);
    int env = BayesNetModel::env_index(cell);
    double env_lp = log_prior_env(m, cell);
    int a = (*data.activity)[r];
    if (a >= 0) {
      ll += env_lp + joint_log_z(m, h, env, a, z);
    } else {
      for (int ai = 0; ai < kActivityCount; ++ai)
        cand[ai] = joint_log_z(m, h, env, ai, z);
      ll += env_lp + logsumexp(cand);
    }
  }
  double prior = 0;
  for (double p : m.prior_h) prior += std::log(p);
  for (double p : m.prior_tod) prior += std::log(p);
  for (double p : m.prior_weather) prior += std::log(p);
  for (double p : m.prior_tercile) prior += std::log(p);
  for (double p : m.prior_dominant) prior += std::log(p);
  for (const auto& row : m.cpt_activity)
    for (double p : row) prior += std::log(p);
  return ll + prior;
}

}  // namespace

BayesNetModel fit_ml(const BnTrainingData& data, const std::vector<int>& column_ids,
                     const FitOptions& options) {
  FitContext ctx = prepare(data, column_ids);
  for (int a : *data.activity)
    if (a < 0)
      throw std::invalid_argument(
          "fit_ml requires observed activity labels; use fit_em");

  BayesNetModel proto;
  proto.lighting_cuts = ctx.cuts;
  SuffStats stats(ctx.kept.size());
  std::array<double, kActivityCount> resp{};
  for (std::size_t r = 0; r < data.rows(); ++r) {
    resp.fill(0.0);
    resp[(*data.activity)[r]] = 1.0;
    accumulate(stats, ctx, proto, data, r, resp);
  }
  BayesNetModel m = m_step(stats, ctx, nullptr, options);
  m.validate();
  return m;
}

EmResult fit_em(const BnTrainingData& data, const std::vector<int>& column_ids,
                const FitOptions& options) {
  FitContext ctx = prepare(data, column_ids);
  BayesNetModel proto;
  proto.lighting_cuts = ctx.cuts;

  const std::size_t n = data.rows();
  std::vector<std::size_t> unknown_rows;
  for (std::size_t r = 0; r < n; ++r)
    if ((*data.activity)[r] < 0) unknown_rows.push_back(r);

  // Init: unknown rows spread uniformly over activities.
  SuffStats stats0(ctx.kept.size());
  std::array<double, kActivityCount> resp{};
  for (std::size_t r = 0; r < n; ++r) {
    int a = (*data.activity)[r];
    if (a >= 0) {
      resp.fill(0.0);
      resp[a] = 1.0;
    } else {
      resp.fill(1.0 / kActivityCount);
    }
    accumulate(stats0, ctx, proto, data, r, resp);
  }

  EmResult result;
  result.model = m_step(stats0, ctx, nullptr, options);
  result.objective_trace.push_back(em_objective(result.model, ctx, data));

  std::vector<double> z(ctx.kept.size());
  std::array<double, kActivityCount> cand;
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    SuffStats stats(ctx.kept.size());
    for (std::size_t r = 0; r < n; ++r) {
      int a = (*data.activity)[r];
      if (a >= 0) {
        resp.fill(0.0);
        resp[a] = 1.0;
      } else {
        const auto& row = (*data.x)[r];
        for (std::size_t f = 0; f < ctx.kept.size(); ++f)
          z[f] = (row[ctx.kept[f]] - ctx.std_mean[f]) / ctx.std_std[f];
        int h = (*data.health)[r];
        EnvCell cell = result.model.discretize((*data.env)[r]);
        int env = BayesNetModel::env_index(cell);
        for (int ai = 0; ai < kActivityCount; ++ai)
          cand[ai] = joint_log_z(result.model, h, env, ai, z);
        double lse = logsumexp(cand);
        for (int ai = 0; ai < kActivityCount; ++ai)
          resp[ai] = std::exp(cand[ai] - lse);
      }
      accumulate(stats, ctx, proto, data, r, resp);
    }
    BayesNetModel next = m_step(stats, ctx, &result.model, options);
    double objective = em_objective(next, ctx, data);
    double improvement = objective - result.objective_trace.back();
    result.model = std::move(next);
    result.objective_trace.push_back(objective);
    result.iterations = iter;
    if (improvement < options.tol) {
      result.converged = true;
      break;
    }
  }
  result.model.validate();
  return result;
}

// --------------------------------------------------------------------------
// Inference
// --------------------------------------------------------------------------

namespace {

void standardize_into(const BayesNetModel& m, std::span<const double> f,
                      std::vector<double>& z) {
  if (f.size() != m.selected_columns.size())
    throw std::invalid_argument(
        "feature vector does not match the model's selected features");
  z.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    z[i] = (f[i] - m.standardize_mean[i]) / m.standardize_std[i];
}

}  // namespace

double joint_log_prob(const BayesNetModel& m, int h, const EnvObservation& e,
                      int a, std::span<const double> f) {
  if (h < 0 || h >= kHealthStates) throw std::invalid_argument("invalid health state");
  if (a < 0 || a >= kActivityCount) throw std::invalid_argument("invalid activity");
  std::vector<double> z;
  standardize_into(m, f, z);
  EnvCell cell = m.discretize(e);
  return log_prior_env(m, cell) +
         joint_log_z(m, h, BayesNetModel::env_index(cell), a, z);
}

std::array<double, kHealthStates> posterior_health(const BayesNetModel& m, int a,
                                                   const EnvObservation& e,
                                                   std::span<const double> f) {
  if (a < 0 || a >= kActivityCount) throw std::invalid_argument("invalid activity");
  std::vector<double> z;
  standardize_into(m, f, z);
  EnvCell cell = m.discretize(e);
  int env = BayesNetModel::env_index(cell);
  std::array<double, kHealthStates> lp;
  for (int h = 0; h < kHealthStates; ++h) lp[h] = joint_log_z(m, h, env, a, z);
  double lse = logsumexp(lp);
  if (lse == kNegInf) throw std::runtime_error("evidence impossible");
  std::array<double, kHealthStates> out;
  for (int h = 0; h < kHealthStates; ++h) out[h] = std::exp(lp[h] - lse);
  return out;
}

std::array<double, kAhCells> posterior_joint(const BayesNetModel& m,
                                             const EnvObservation& e,
                                             std::span<const double> f) {
  std::vector<double> z;
  standardize_into(m, f, z);
  EnvCell cell = m.discretize(e);
  int env = BayesNetModel::env_index(cell);
  std::array<double, kAhCells> lp;
  for (int a = 0; a < kActivityCount; ++a)
    for (int h = 0; h < kHealthStates; ++h)
      lp[a * 2 + h] = joint_log_z(m, h, env, a, z);
  double lse = logsumexp(lp);
  if (lse == kNegInf) throw std::runtime_error("evidence impossible");
  std::array<double, kAhCells> out;
  for (std::size_t i = 0; i < lp.size(); ++i) out[i] = std::exp(lp[i] - lse);
  return out;
}

double record_log_likelihood(const BayesNetModel& m,
                             const std::vector<std::vector<double>>& window_x,
                             const std::vector<int>& window_activity,
                             const std::vector<EnvObservation>& window_env) {
  if (window_x.empty())
    throw std::invalid_argument("record_log_likelihood: no windows");
  if (window_activity.size() != window_x.size() ||
      window_env.size() != window_x.size())
    throw std::invalid_argument("record_log_likelihood: misaligned inputs");
  double total = 0;
  std::vector<double> z;
  for (std::size_t i = 0; i < window_x.size(); ++i) {
    standardize_into(m, window_x[i], z);
    EnvCell cell = m.discretize(window_env[i]);
    int env = BayesNetModel::env_index(cell);
    int a = window_activity[i];
    if (a < 0 || a >= kActivityCount)
      throw std::invalid_argument("record_log_likelihood: activity must be observed");
    std::array<double, kHealthStates> lp;
    for (int h = 0; h < kHealthStates; ++h)
      lp[h] = log_prior_env(m, cell) + joint_log_z(m, h, env, a, z);
    total += logsumexp(lp);
  }
  return total / static_cast<double>(window_x.size());
}

// --------------------------------------------------------------------------
// Serialization
// --------------------------------------------------------------------------

std::string BayesNetModel::to_json() const {
  nlohmann::json gauss = nlohmann::json::array();
  for (const auto& cells : gaussians) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& g : cells) row.push_back({g.mean, g.var});
    gauss.push_back(row);
  }
  nlohmann::json cpt = nlohmann::json::array();
  for (const auto& row : cpt_activity) cpt.push_back(row);
  nlohmann::json j{{"format", "frailwatch-bn"},
                   {"version", 1},
                   {"prior_h", prior_h},
                   {"prior_tod", prior_tod},
                   {"prior_weather", prior_weather},
                   {"prior_tercile", prior_tercile},
                   {"prior_dominant", prior_dominant},
                   {"lighting_cuts", lighting_cuts},
                   {"cpt_activity", cpt},
                   {"selected_columns", selected_columns},
                   {"gaussians", gauss},
                   {"standardize_mean", standardize_mean},
                   {"standardize_std", standardize_std},
                   {"warnings", warnings}};
  return j.dump();
}

BayesNetModel BayesNetModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what());
  }
  if (j.value("format", "") != "frailwatch-bn")
    throw ParseError("not a frailwatch-bn model document");
  if (j.value("version", 0) != 1)
    throw ParseError("unsupported model version");

  BayesNetModel m;
  try {
    j.at("prior_h").get_to(m.prior_h);
    j.at("prior_tod").get_to(m.prior_tod);
    j.at("prior_weather").get_to(m.prior_weather);
    j.at("prior_tercile").get_to(m.prior_tercile);
    j.at("prior_dominant").get_to(m.prior_dominant);
    j.at("lighting_cuts").get_to(m.lighting_cuts);
    for (const auto& row : j.at("cpt_activity")) {
      std::array<double, kActivityCount> r{};
      for (int a = 0; a < kActivityCount; ++a) r[a] = row.at(a).get<double>();
      m.cpt_activity.push_back(r);
    }
    j.at("selected_columns").get_to(m.selected_columns);
    for (const auto& row : j.at("gaussians")) {
      std::array<Gaussian, kAhCells> cells;
      for (int c = 0; c < kAhCells; ++c) {
        cells[c].mean = row.at(c).at(0).get<double>();
        cells[c].var = row.at(c).at(1).get<double>();
      }
      m.gaussians.push_back(cells);
    }
    j.at("standardize_mean").get_to(m.standardize_mean);
    j.at("standardize_std").get_to(m.standardize_std);
    if (j.contains("warnings")) j.at("warnings").get_to(m.warnings);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model JSON missing field: ") + e.what());
  }
  m.validate();
  return m;
}

}  // namespace frailwatch
