#include "frailwatch/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "frailwatch/parallel.hpp"
#include "frailwatch/rng.hpp"

namespace frailwatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double population_mean(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double population_std(std::span<const double> v, double mean) {
  double s = 0;
  for (double x : v) s += (x - mean) * (x - mean);
  return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n == 0 || n != b.size()) return 0.0;
  double ma = population_mean(a), mb = population_mean(b);
  double num = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va <= 0 || vb <= 0) return 0.0;
  return num / std::sqrt(va * vb);
}

}  // namespace

void compute_ranks(ScoreTable& table) {
  const std::size_t n = table.scores.size();
  table.ranks.assign(n, 0.0);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return table.scores[a] > table.scores[b];
  });
  // Mean rank over ties.
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && table.scores[idx[j + 1]] == table.scores[idx[i]]) ++j;
    double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) table.ranks[idx[k]] = mean_rank;
    i = j + 1;
  }
}

double score_fdr(std::span<const double> class_a, std::span<const double> class_b) {
  if (class_a.empty() || class_b.empty())
    throw std::invalid_argument("score_fdr: empty class sample");
  double ma = population_mean(class_a), mb = population_mean(class_b);
  double sa = population_std(class_a, ma), sb = population_std(class_b, mb);
  double spread = sa + sb;
  if (spread < 1e-12) return ma != mb ? kInf : 0.0;
  return (ma - mb) * (ma - mb) / spread;
}

double score_mi(std::span<const double> values, std::span<const int> labels,
                int bins) {
  const std::size_t n = values.size();
  if (n == 0 || n != labels.size())
    throw std::invalid_argument("score_mi: empty or mismatched input");
  if (bins < 2) bins = 2;

  // Equal-frequency bin edges; duplicates collapse so the bin count never
  // exceeds the number of distinct values.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (int b = 1; b < bins; ++b) {
    edges.push_back(sorted[(n * static_cast<std::size_t>(b)) / bins]);
  }
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  auto bin_of = [&](double x) {
    return static_cast<std::size_t>(
        std::upper_bound(edges.begin(), edges.end(), x) - edges.begin());
  };
  const std::size_t nbins = edges.size() + 1;
  std::vector<std::array<double, 2>> joint(nbins, {0.0, 0.0});
  double class_total[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    int h = labels[i] == 1 ? 1 : 0;
    joint[bin_of(values[i])][h] += 1.0;
    class_total[h] += 1.0;
  }
  double mi = 0;
  for (std::size_t b = 0; b < nbins; ++b) {
    double pb = (joint[b][0] + joint[b][1]) / n;
    if (pb <= 0) continue;
    for (int h = 0; h < 2; ++h) {
      double pbh = joint[b][h] / n;
      if (pbh <= 0) continue;
      double ph = class_total[h] / n;
      mi += pbh * std::log(pbh / (pb * ph));
    }
  }
  return std::max(mi, 0.0);
}

double score_cfs(const std::vector<std::vector<double>>& feature_columns,
                 std::size_t i, std::span<const int> labels) {
  if (i >= feature_columns.size())
    throw std::out_of_range("score_cfs: feature index");
  std::vector<double> h(labels.size());
  for (std::size_t r = 0; r < labels.size(); ++r) h[r] = labels[r] == 1 ? 1.0 : 0.0;
  double numerator = std::abs(pearson(feature_columns[i], h));
  double denom = 0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < feature_columns.size(); ++j) {
    if (j == i) continue;
    denom += std::abs(pearson(feature_columns[i], feature_columns[j]));
    ++count;
  }
  denom = count > 0 ? denom / static_cast<double>(count) : 0.0;
  return numerator / std::max(denom, 1e-6);
}

// --------------------------------------------------------------------------
// Selection-based scoring
// --------------------------------------------------------------------------

namespace {

std::vector<int> columns_of_groups(const std::vector<int>& groups) {
  std::vector<int> cols;
  for (int g : groups) {
    int first = group_first_column(g);
    for (int c = 0; c < group_column_count(g); ++c) cols.push_back(first + c);
  }
  std::sort(cols.begin(), cols.end());
  return cols;
}

double cv_f1_macro(const ClassifierSpec& spec, const FeatureTable& t,
                   const std::vector<std::size_t>& rows,
                   const std::vector<int>& groups, int k, std::uint64_t seed) {
  return cross_validate(spec, t, rows, columns_of_groups(groups), k, seed).f1_macro;
}

}  // namespace

ScoreTable score_by_selection(const ClassifierSpec& spec, const FeatureTable& t,
                              const std::vector<std::size_t>& rows,
                              const std::vector<int>& groups,
                              SelectionDirection direction, int k,
                              std::uint64_t seed, int max_steps) {
  ScoreTable table;
  table.method = std::string(classifier_kind_name(spec.kind)) +
                 (direction == SelectionDirection::Forward ? "-forward" : "-backward");
  for (int g : groups) table.items.push_back(group_label(g));
  table.scores.assign(groups.size(), 0.0);

  std::map<int, std::size_t> slot;
  for (std::size_t i = 0; i < groups.size(); ++i) slot[groups[i]] = i;

  if (direction == SelectionDirection::Forward) {
    std::vector<int> current;
    std::vector<int> remaining = groups;
    int steps = std::min<int>(max_steps, static_cast<int>(groups.size()));
    for (int step = 0; step < steps && !remaining.empty(); ++step) {
      std::vector<double> f1(remaining.size());
      parallel_for(remaining.size(), [&](std::size_t c) {
        std::vector<int> trial = current;
        trial.push_back(remaining[c]);
        f1[c] = cv_f1_macro(spec, t, rows, trial, k, seed);
      });
      std::size_t best = 0;
      for (std::size_t c = 1; c < remaining.size(); ++c)
        if (f1[c] > f1[best]) best = c;
      table.scores[slot[remaining[best]]] = f1[best];
      current.push_back(remaining[best]);
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    // Groups never reached rank behind every entered group.
  } else {
    std::vector<int> current = groups;
    while (current.size() > 1) {
      double f1_current = cv_f1_macro(spec, t, rows, current, k, seed);
      std::vector<double> f1_without(current.size());
      parallel_for(current.size(), [&](std::size_t c) {
        std::vector<int> trial;
        trial.reserve(current.size() - 1);
        for (std::size_t j = 0; j < current.size(); ++j)
          if (j != c) trial.push_back(current[j]);
        f1_without[c] = cv_f1_macro(spec, t, rows, trial, k, seed);
      });
      std::size_t least_harmful = 0;
      for (std::size_t c = 1; c < current.size(); ++c)
        if (f1_without[c] > f1_without[least_harmful]) least_harmful = c;
      table.scores[slot[current[least_harmful]]] = f1_current;
      current.erase(current.begin() + static_cast<std::ptrdiff_t>(least_harmful));
    }
    if (current.size() == 1)
      table.scores[slot[current[0]]] = cv_f1_macro(spec, t, rows, current, k, seed);
  }

  compute_ranks(table);
  return table;
}

// --------------------------------------------------------------------------
// Aggregation
// --------------------------------------------------------------------------

namespace {

void check_aligned(const std::vector<ScoreTable>& tables) {
  if (tables.empty()) throw std::invalid_argument("no score tables to aggregate");
  for (const auto& t : tables) {
    if (t.items != tables.front().items)
      throw std::invalid_argument("score tables cover different item sets");
    if (t.ranks.size() != t.items.size() || t.scores.size() != t.items.size())
      throw std::invalid_argument("score table missing ranks or scores");
  }
}

std::vector<double> minmax_normalize(std::span<const double> scores) {
  // +-inf sentinels are clamped to the finite extremes first.
  double lo = kInf, hi = -kInf;
  for (double s : scores) {
    if (std::isfinite(s)) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  std::vector<double> out(scores.size());
  if (!(lo <= hi)) {  // no finite values
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double s = std::isfinite(scores[i]) ? scores[i] : (scores[i] > 0 ? hi : lo);
    out[i] = hi > lo ? (s - lo) / (hi - lo) : 0.5;
  }
  return out;
}

}  // namespace

std::vector<double> aggregate_borda(const std::vector<ScoreTable>& tables) {
  check_aligned(tables);
  const std::size_t n = tables.front().items.size();
  std::vector<double> out(n, 0.0);
  for (const auto& t : tables)
    for (std::size_t i = 0; i < n; ++i)
      out[i] += static_cast<double>(n) - t.ranks[i] + 1.0;
  return out;
}

std::vector<double> aggregate_nwa(const std::vector<ScoreTable>& tables,
                                  std::span<const double> weights) {
  check_aligned(tables);
  const std::size_t n = tables.front().items.size();
  std::vector<double> w(tables.size(), 1.0);
  if (!weights.empty()) {
    if (weights.size() != tables.size())
      throw std::invalid_argument("aggregate_nwa: weight count mismatch");
    w.assign(weights.begin(), weights.end());
  }
  double total_w = std::accumulate(w.begin(), w.end(), 0.0);
  if (total_w <= 0) throw std::invalid_argument("aggregate_nwa: zero total weight");

  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < tables.size(); ++k) {
    auto norm = minmax_normalize(tables[k].scores);
    for (std::size_t i = 0; i < n; ++i) out[i] += w[k] * norm[i];
  }
  for (double& v : out) v /= total_w;
  return out;
}

std::vector<double> aggregate_consensus(const std::vector<ScoreTable>& tables,
                                        int top_m) {
  check_aligned(tables);
  if (top_m <= 0) throw std::invalid_argument("aggregate_consensus: top_m <= 0");
  const std::size_t n = tables.front().items.size();
  std::vector<double> out(n, 0.0);
  for (const auto& t : tables)
    for (std::size_t i = 0; i < n; ++i)
      if (t.ranks[i] <= static_cast<double>(top_m)) out[i] += 1.0;
  return out;
}

RankingReport final_ranking(const std::vector<ScoreTable>& tables, int top_m) {
  std::vector<ScoreTable> ranked = tables;
  for (auto& t : ranked)
    if (t.ranks.size() != t.items.size()) compute_ranks(t);
  check_aligned(ranked);

  RankingReport report;
  report.items = ranked.front().items;
  report.methods = ranked;
  report.borda = aggregate_borda(ranked);
  report.nwa = aggregate_nwa(ranked);
  report.consensus = aggregate_consensus(ranked, top_m);

  auto nb = minmax_normalize(report.borda);
  auto nn = minmax_normalize(report.nwa);
  auto nc = minmax_normalize(report.consensus);
  report.final_score.resize(report.items.size());
  for (std::size_t i = 0; i < report.items.size(); ++i)
    report.final_score[i] = nb[i] + nn[i] + nc[i];

  report.order.resize(report.items.size());
  std::iota(report.order.begin(), report.order.end(), 0);
  std::sort(report.order.begin(), report.order.end(),
            [&](std::size_t a, std::size_t b) {
              if (report.final_score[a] != report.final_score[b])
                return report.final_score[a] > report.final_score[b];
              return report.items[a] < report.items[b];
            });
  return report;
}

// --------------------------------------------------------------------------
// Feature ranking
// --------------------------------------------------------------------------

namespace {

struct ClassValues {
  std::vector<double> per_class[2];
};

// Defined cells of one column split by health label.
ClassValues column_class_values(const FeatureTable& t,
                                const std::vector<std::size_t>& rows, int col) {
  ClassValues cv;
  for (std::size_t r : rows) {
    int h = t.health[r];
    if (h != 0 && h != 1) continue;
    if (t.defined[r][col]) cv.per_class[h].push_back(t.values[r][col]);
  }
  return cv;
}

}  // namespace

RankingReport rank_features(const FeatureTable& t,
                            const std::vector<std::size_t>& rows,
                            const FeatureRankingOptions& options) {
  std::vector<std::string> warnings;

  // Valid groups need at least one column with defined data in both classes.
  std::vector<int> groups;
  for (int g = 0; g < kFeatureGroups; ++g) {
    bool ok = false;
    for (int c = 0; c < group_column_count(g) && !ok; ++c) {
      ClassValues cv = column_class_values(t, rows, group_first_column(g) + c);
      ok = !cv.per_class[0].empty() && !cv.per_class[1].empty();
    }
    if (ok)
      groups.push_back(g);
    else
      warnings.push_back("feature group " + group_label(g) +
                         " lacks defined samples in a class; excluded");
  }
  if (groups.empty()) throw std::invalid_argument("rank_features: no usable groups");

  std::vector<ScoreTable> tables;

  if (options.info_methods) {
    // Dense imputed columns for CFS.
    ColumnImputer imputer;
    std::vector<int> all_cols(kFeatureColumns);
    std::iota(all_cols.begin(), all_cols.end(), 0);
    imputer.fit(t, rows, all_cols);
    std::vector<std::vector<double>> dense(kFeatureColumns);
    std::vector<int> labels;
    for (std::size_t r : rows) labels.push_back(t.health[r]);
    for (int c = 0; c < kFeatureColumns; ++c) {
      dense[c].reserve(rows.size());
      for (std::size_t r : rows)
        dense[c].push_back(t.defined[r][c] ? t.values[r][c] : imputer.means[c]);
    }

    ScoreTable fdr{"FDR", {}, {}, {}};
    ScoreTable mi{"MI", {}, {}, {}};
    ScoreTable cfs{"CFS", {}, {}, {}};
    for (int g : groups) {
      double best_fdr = 0, best_mi = 0, best_cfs = 0;
      for (int c = 0; c < group_column_count(g); ++c) {
        int col = group_first_column(g) + c;
        ClassValues cv = column_class_values(t, rows, col);
        if (!cv.per_class[0].empty() && !cv.per_class[1].empty())
          best_fdr = std::max(best_fdr, score_fdr(cv.per_class[0], cv.per_class[1]));
        std::vector<double> vals;
        std::vector<int> lbls;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          std::size_t r = rows[i];
          if (t.defined[r][col] && (t.health[r] == 0 || t.health[r] == 1)) {
            vals.push_back(t.values[r][col]);
            lbls.push_back(t.health[r]);
          }
        }
        if (!vals.empty())
          best_mi = std::max(best_mi, score_mi(vals, lbls, options.mi_bins));
        best_cfs = std::max(best_cfs,
                            score_cfs(dense, static_cast<std::size_t>(col), labels));
      }
      fdr.items.push_back(group_label(g));
      fdr.scores.push_back(best_fdr);
      mi.items.push_back(group_label(g));
      mi.scores.push_back(best_mi);
      cfs.items.push_back(group_label(g));
      cfs.scores.push_back(best_cfs);
    }
    compute_ranks(fdr);
    compute_ranks(mi);
    compute_ranks(cfs);
    tables.push_back(std::move(fdr));
    tables.push_back(std::move(mi));
    tables.push_back(std::move(cfs));
  }

  if (options.classifier_methods) {
    for (ClassifierKind kind : {ClassifierKind::BayesNet, ClassifierKind::RandomForest,
                                ClassifierKind::LinearSvm}) {
      ClassifierSpec spec;
      spec.kind = kind;
      spec.seed = options.seed;
      tables.push_back(score_by_selection(spec, t, rows, groups, options.direction,
                                          options.k_folds, options.seed));
    }
  }

  RankingReport report = final_ranking(tables, options.top_m);
  report.warnings = std::move(warnings);
  return report;
}

// --------------------------------------------------------------------------
// Activity ranking
// --------------------------------------------------------------------------

RankingReport rank_activities(const FeatureTable& t,
                              const std::vector<std::size_t>& rows,
                              const ActivityRankingOptions& options) {
  std::vector<std::string> warnings;

  std::map<int, std::array<int, 2>> counts;
  for (std::size_t r : rows) {
    int a = t.activity[r];
    int h = t.health[r];
    if (a < 0 || (h != 0 && h != 1)) continue;
    counts[a][h] += 1;
  }
  std::vector<int> activities;
  std::vector<std::vector<std::size_t>> activity_rows;
  for (int a = 0; a < kActivityCount; ++a) {
    auto it = counts.find(a);
    bool enough = it != counts.end() &&
                  it->second[0] >= options.min_samples_per_class &&
                  it->second[1] >= options.min_samples_per_class;
    if (!enough) {
      if (it != counts.end())
        warnings.push_back(std::string("activity ") +
                           activity_name(static_cast<Activity>(a)) +
                           " under-sampled; excluded from ranking");
      continue;
    }
    activities.push_back(a);
    std::vector<std::size_t> arows;
    for (std::size_t r : rows)
      if (t.activity[r] == a && (t.health[r] == 0 || t.health[r] == 1))
        arows.push_back(r);
    activity_rows.push_back(std::move(arows));
  }
  if (activities.size() < 2)
    throw std::invalid_argument("rank_activities: fewer than two usable activities");

  std::vector<std::string> items;
  for (int a : activities) items.push_back(activity_name(static_cast<Activity>(a)));

  std::vector<int> all_groups(kFeatureGroups);
  std::iota(all_groups.begin(), all_groups.end(), 0);

  std::vector<ScoreTable> tables;

  // Information methods: mean of the top-m within-activity feature scores.
  enum InfoMethod { kFdr, kMi, kCfs };
  for (InfoMethod method : {kFdr, kMi, kCfs}) {
    for (int m : options.info_top_ms) {
      ScoreTable table;
      table.method = std::string(method == kFdr ? "FDR" : method == kMi ? "MI" : "CFS") +
                     "-top" + std::to_string(m);
      table.items = items;
      table.scores.assign(items.size(), 0.0);
      for (std::size_t ai = 0; ai < activities.size(); ++ai) {
        const auto& arows = activity_rows[ai];
        std::vector<int> labels;
        for (std::size_t r : arows) labels.push_back(t.health[r]);

        std::vector<std::vector<double>> dense;
        if (method == kCfs) {
          ColumnImputer imputer;
          std::vector<int> all_cols(kFeatureColumns);
          std::iota(all_cols.begin(), all_cols.end(), 0);
          imputer.fit(t, arows, all_cols);
          dense.resize(kFeatureColumns);
          for (int c = 0; c < kFeatureColumns; ++c) {
            dense[c].reserve(arows.size());
            for (std::size_t r : arows)
              dense[c].push_back(t.defined[r][c] ? t.values[r][c] : imputer.means[c]);
          }
        }

        std::vector<double> group_scores;
        for (int g = 0; g < kFeatureGroups; ++g) {
          double best = 0;
          bool any = false;
          for (int c = 0; c < group_column_count(g); ++c) {
            int col = group_first_column(g) + c;
            if (method == kCfs) {
              best = std::max(best, score_cfs(dense, static_cast<std::size_t>(col),
                                              labels));
              any = true;
              continue;
            }
            ClassValues cv = column_class_values(t, arows, col);
            if (cv.per_class[0].empty() || cv.per_class[1].empty()) continue;
            any = true;
            if (method == kFdr) {
              best = std::max(best, score_fdr(cv.per_class[0], cv.per_class[1]));
            } else {
              std::vector<double> vals;
              std::vector<int> lbls;
              for (std::size_t r : arows) {
                if (t.defined[r][col]) {
                  vals.push_back(t.values[r][col]);
                  lbls.push_back(t.health[r]);
                }
              }
              best = std::max(best, score_mi(vals, lbls));
            }
          }
          if (any) group_scores.push_back(best);
        }
        std::sort(group_scores.begin(), group_scores.end(), std::greater<>());
        double sum = 0;
        int take = std::min<int>(m, static_cast<int>(group_scores.size()));
        for (int i = 0; i < take; ++i) sum += group_scores[i];
        table.scores[ai] = take > 0 ? sum / take : 0.0;
      }
      compute_ranks(table);
      tables.push_back(std::move(table));
    }
  }

  // Classifier methods: best cross-validated F1-macro reached along the
  // forward / backward selection path on each activity's samples.
  for (ClassifierKind kind : {ClassifierKind::BayesNet, ClassifierKind::RandomForest,
                              ClassifierKind::LinearSvm}) {
    for (SelectionDirection dir :
         {SelectionDirection::Forward, SelectionDirection::Backward}) {
      ScoreTable table;
      table.method = std::string(classifier_kind_name(kind)) +
                     (dir == SelectionDirection::Forward ? "-forward" : "-backward");
      table.items = items;
      table.scores.assign(items.size(), 0.0);
      for (std::size_t ai = 0; ai < activities.size(); ++ai) {
        ClassifierSpec spec;
        spec.kind = kind;
        spec.rf = options.rf;
        spec.svm = options.svm;
        spec.seed = derive_seed(options.seed, static_cast<std::uint64_t>(activities[ai]));
        ScoreTable sel =
            score_by_selection(spec, t, activity_rows[ai], all_groups, dir,
                               options.k_folds, spec.seed, options.max_forward_steps);
        double best = 0;
        for (double s : sel.scores) best = std::max(best, s);
        table.scores[ai] = best;
      }
      compute_ranks(table);
      tables.push_back(std::move(table));
    }
  }

  RankingReport report = final_ranking(tables, options.top_m);
  report.warnings = std::move(warnings);
  return report;
}

// --------------------------------------------------------------------------
// Export
// --------------------------------------------------------------------------

std::string RankingReport::to_json() const {
  nlohmann::json methods_json = nlohmann::json::array();
  for (const auto& m : methods) {
    methods_json.push_back(nlohmann::json{
        {"method", m.method}, {"scores", m.scores}, {"ranks", m.ranks}});
  }
  nlohmann::json ordered = nlohmann::json::array();
  for (std::size_t i : order) ordered.push_back(items[i]);
  nlohmann::json j{{"items", items},
                   {"methods", methods_json},
                   {"borda", borda},
                   {"nwa", nwa},
                   {"consensus", consensus},
                   {"final_score", final_score},
                   {"order", ordered},
                   {"warnings", warnings}};
  return j.dump(2);
}

std::string RankingReport::to_csv() const {
  std::ostringstream out;
  out << "item,final_score,borda,nwa,consensus\n";
  for (std::size_t i : order) {
    out << items[i] << ',' << final_score[i] << ',' << borda[i] << ',' << nwa[i]
        << ',' << consensus[i] << '\n';
  }
  return out.str();
}

}  // namespace frailwatch
