// frailwatch: behavioral weakness-monitoring analytics over motion-summary
// logs. Subcommands cover the full pipeline: synthesize calibrated logs,
// extract windowed features, train/apply the Bayesian network, rank features
// and activities, sweep temporal windows, select activity subsets, score
// anomalous days and merge reports.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "frailwatch/anomaly.hpp"
#include "frailwatch/bayes_net.hpp"
#include "frailwatch/classifiers.hpp"
#include "frailwatch/feature_table.hpp"
#include "frailwatch/log_io.hpp"
#include "frailwatch/pipeline.hpp"
#include "frailwatch/ranking.hpp"
#include "frailwatch/sha256.hpp"
#include "frailwatch/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace frailwatch;

namespace {

// Collects artifacts written under one output directory, then seals the run
// with a provenance document and a hash manifest. All writes are atomic.
class RunOutput {
 public:
  explicit RunOutput(std::string dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    write_file_atomic((fs::path(dir_) / name).string(), content);
    names_.push_back(name);
  }

  void finalize(const json& provenance) {
    write("provenance.json", provenance.dump(2) + "\n");
    json artifacts = json::array();
    for (const auto& name : names_) {
      artifacts.push_back(
          json{{"path", name},
               {"sha256", Sha256::of_file((fs::path(dir_) / name).string())}});
    }
    json manifest{{"artifacts", artifacts}};
    write_file_atomic((fs::path(dir_) / "manifest.json").string(),
                      manifest.dump(2) + "\n");
  }

  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::vector<std::string> names_;
};

LabeledDataset load_input_dataset(const std::string& in) {
  fs::path p(in);
  if (fs::is_directory(p)) p /= "dataset.json";
  return load_manifest(p.string());
}

std::vector<std::size_t> labeled_rows(const FeatureTable& t) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.health[i] == 0 || t.health[i] == 1) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> participant_rows(const FeatureTable& t,
                                          const std::vector<std::size_t>& rows,
                                          const std::string& pid) {
  std::vector<std::size_t> out;
  for (std::size_t r : rows)
    if (t.meta[r].participant_id == pid) out.push_back(r);
  return out;
}

std::vector<std::string> participants_of(const FeatureTable& t) {
  std::set<std::string> ids;
  for (const auto& m : t.meta) ids.insert(m.participant_id);
  return {ids.begin(), ids.end()};
}

// Accepts group labels ("V(L-MPO)"), column names ("F31", "F4_07") or plain
// feature numbers, and expands groups to their columns.
std::vector<int> parse_feature_columns(const std::vector<std::string>& names) {
  std::vector<int> cols;
  for (const auto& name : names) {
    if (auto group = group_by_label(name)) {
      for (int c = 0; c < group_column_count(*group); ++c)
        cols.push_back(group_first_column(*group) + c);
      continue;
    }
    bool found = false;
    for (int c = 0; c < kFeatureColumns; ++c) {
      if (column_name(c) == name) {
        cols.push_back(c);
        found = true;
        break;
      }
    }
    if (!found)
      throw std::invalid_argument("unknown feature name: '" + name + "'");
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  return cols;
}

std::vector<int> all_columns() {
  std::vector<int> cols(kFeatureColumns);
  std::iota(cols.begin(), cols.end(), 0);
  return cols;
}

ClassifierSpec spec_of(const std::string& kind, std::uint64_t seed, int rf_trees) {
  ClassifierSpec spec;
  spec.kind = parse_classifier_kind(kind);
  spec.seed = seed;
  if (rf_trees > 0) spec.rf.n_trees = rf_trees;
  return spec;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::uint64_t seed = 0;
  std::string out;
  int participants = 5;
  int days = 0;
  double duration_scale = 1.0;
  std::string start_date = "2024-03-04";
};

int cmd_synth(const SynthArgs& args) {
  StudyConfig config;
  config.seed = args.seed;
  config.participants = args.participants;
  config.days_override = args.days;
  config.duration_scale = args.duration_scale;
  CivilTime start = parse_civil(args.start_date + "T00:00:00");
  config.start_year = start.year;
  config.start_month = start.month;
  config.start_day = start.day;

  RunOutput out(args.out);

  // One JSONL file per participant, streamed to keep memory flat.
  std::vector<ParticipantInfo> participants;
  std::map<std::string, std::ostringstream> buffers;
  generate_study_stream(config, [&](MonitoringRecord&& rec) {
    serialize_record(rec, buffers[rec.participant_id]);
  });

  LabeledDataset meta_only;
  std::vector<std::string> files;
  for (auto& [pid, buffer] : buffers) {
    std::string file = "records_" + pid + ".jsonl";
    out.write(file, buffer.str());
    files.push_back(file);
  }
  for (int i = 0; i < config.participants; ++i) {
    ParticipantProfile prof = default_profile(i);
    meta_only.participants.push_back(
        ParticipantInfo{prof.id, prof.handedness, prof.mirror});
  }
  write_manifest(meta_only, files, (fs::path(args.out) / "dataset.json").string());

  out.finalize(json{{"command", "synth"},
                    {"seed", args.seed},
                    {"participants", args.participants},
                    {"days", args.days},
                    {"duration_scale", args.duration_scale},
                    {"start_date", args.start_date},
                    {"record_files", files}});
  return 0;
}

struct ExtractArgs {
  std::string in;
  std::string out;
  double window = 300;
  bool whole_record = false;
  int mirror = -1;  // -1 -> per-participant flags
};

int cmd_extract(const ExtractArgs& args) {
  LabeledDataset dataset = load_input_dataset(args.in);
  double w = args.whole_record ? 0.0 : args.window;
  FeatureTable table = featurize_dataset(dataset, w, args.mirror);

  RunOutput out(args.out.empty() ? args.in : args.out);
  std::ostringstream csv;
  write_feature_csv(table, csv);
  std::string name = args.whole_record
                         ? "features_record.csv"
                         : "features_w" + std::to_string(static_cast<int>(args.window)) +
                               ".csv";
  out.write(name, csv.str());
  out.finalize(json{{"command", "extract"},
                    {"in", args.in},
                    {"window_seconds", w},
                    {"whole_record", args.whole_record},
                    {"mirror_override", args.mirror},
                    {"rows", table.size()},
                    {"feature_columns", kFeatureColumns}});
  return 0;
}

struct TrainArgs {
  std::string features;
  std::string out;
  bool em = false;
  std::vector<std::string> columns;
};

int cmd_train(const TrainArgs& args) {
  FeatureTable t = read_feature_csv_file(args.features);
  auto rows = labeled_rows(t);
  if (rows.empty()) throw ValidationError("no labeled rows in " + args.features);
  std::vector<int> columns =
      args.columns.empty() ? all_columns() : parse_feature_columns(args.columns);

  ColumnImputer imputer;
  imputer.fit(t, rows, columns);
  Problem problem = make_problem(t, rows, columns, imputer);
  BnTrainingData data;
  data.x = &problem.x;
  data.health = &problem.y;
  data.activity = &problem.activity;
  data.env = &problem.env;

  bool any_unknown_activity = false;
  for (int a : problem.activity)
    if (a < 0) any_unknown_activity = true;

  RunOutput out(args.out);
  json provenance{{"command", "train"},
                  {"features", args.features},
                  {"rows", rows.size()},
                  {"columns", columns.size()}};
  if (args.em || any_unknown_activity) {
    EmResult result = fit_em(data, columns, FitOptions{});
    out.write("model.json", result.model.to_json() + "\n");
    provenance["method"] = "em";
    provenance["iterations"] = result.iterations;
    provenance["converged"] = result.converged;
    provenance["objective_trace"] = result.objective_trace;
    for (const auto& w : result.model.warnings) std::cerr << "WARNING: " << w << "\n";
  } else {
    BayesNetModel model = fit_ml(data, columns, FitOptions{});
    out.write("model.json", model.to_json() + "\n");
    provenance["method"] = "ml";
    for (const auto& w : model.warnings) std::cerr << "WARNING: " << w << "\n";
  }
  out.finalize(provenance);
  return 0;
}

struct ClassifyArgs {
  std::string features;
  std::string model;
  std::string out;
  bool unknown_activity = false;
};

int cmd_classify(const ClassifyArgs& args) {
  FeatureTable t = read_feature_csv_file(args.features);
  std::ifstream in(args.model);
  if (!in) throw ParseError("cannot open model: " + args.model);
  std::stringstream ss;
  ss << in.rdbuf();
  BayesNetModel model = BayesNetModel::from_json(ss.str());

  // Model columns, imputed with the model's training means.
  ColumnImputer imputer;
  imputer.columns = model.selected_columns;
  imputer.means.assign(model.selected_columns.size(), 0.0);
  for (std::size_t c = 0; c < model.selected_columns.size(); ++c)
    imputer.means[c] = model.standardize_mean[c];

  std::ostringstream csv;
  csv << "record_id,window_index,activity,health,p_normal,p_weak,predicted\n";
  std::vector<std::pair<CivilTime, int>> predicted_records;
  std::map<std::string, std::vector<int>> per_record;
  std::map<std::string, CivilTime> record_start;
  for (std::size_t r = 0; r < t.size(); ++r) {
    std::vector<double> x = imputer.row(t, r);
    EnvObservation env = env_from_row(t.values[r]);
    std::array<double, 2> post{};
    if (!args.unknown_activity && t.activity[r] >= 0) {
      post = posterior_health(model, t.activity[r], env, x);
    } else {
      auto joint = posterior_joint(model, env, x);
      for (int a = 0; a < kActivityCount; ++a)
        for (int h = 0; h < 2; ++h) post[h] += joint[a * 2 + h];
    }
    int predicted = post[1] >= post[0] ? 1 : 0;
    csv << t.meta[r].record_id << ',' << t.meta[r].window_index << ','
        << activity_name(static_cast<Activity>(t.activity[r])) << ','
        << health_name(static_cast<Health>(t.health[r])) << ',' << post[0] << ','
        << post[1] << ',' << health_name(static_cast<Health>(predicted)) << '\n';
    per_record[t.meta[r].record_id].push_back(predicted);
    auto it = record_start.find(t.meta[r].record_id);
    if (it == record_start.end() ||
        to_linear_seconds(t.meta[r].window_start) < to_linear_seconds(it->second))
      record_start[t.meta[r].record_id] = t.meta[r].window_start;
  }

  std::ostringstream agg;
  agg << "record_id,predicted\n";
  for (const auto& [rid, votes] : per_record) {
    int label = majority_vote(votes);
    agg << rid << ',' << health_name(static_cast<Health>(label)) << '\n';
    predicted_records.emplace_back(record_start[rid], label);
  }
  SpanLabels spans = aggregate_spans(predicted_records);
  std::ostringstream span_csv;
  span_csv << "span,day,bin,predicted\n";
  for (const auto& [day, label] : spans.daily)
    span_csv << "daily," << day << ",-1,"
             << health_name(static_cast<Health>(label)) << '\n';
  for (const auto& [key, label] : spans.eight_hour)
    span_csv << "8hour," << key.day << ',' << key.bin << ','
             << health_name(static_cast<Health>(label)) << '\n';

  RunOutput out(args.out);
  out.write("predictions.csv", csv.str());
  out.write("predictions_records.csv", agg.str());
  out.write("predictions_spans.csv", span_csv.str());
  out.finalize(json{{"command", "classify"},
                    {"features", args.features},
                    {"model", args.model},
                    {"unknown_activity", args.unknown_activity},
                    {"rows", t.size()}});
  return 0;
}

struct RankFeaturesArgs {
  std::string features;
  std::string out;
  std::uint64_t seed = 0;
  int top_m = 10;
  bool no_classifiers = false;
  std::string direction = "forward";
  int mi_bins = 10;
  int rf_trees = 0;
};

int cmd_rank_features(const RankFeaturesArgs& args) {
  FeatureTable t = read_feature_csv_file(args.features);
  auto rows = labeled_rows(t);
  if (rows.empty()) throw ValidationError("no labeled rows in " + args.features);

  FeatureRankingOptions options;
  options.classifier_methods = !args.no_classifiers;
  options.direction = args.direction == "backward" ? SelectionDirection::Backward
                                                   : SelectionDirection::Forward;
  options.mi_bins = args.mi_bins;
  options.top_m = args.top_m;
  options.seed = args.seed;

  RunOutput out(args.out);
  json per_participant = json::object();
  // Personalized rankings, plus the cross-participant average of final scores.
  std::map<std::string, double> averaged;
  std::map<std::string, int> appearances;
  for (const auto& pid : participants_of(t)) {
    auto prows = participant_rows(t, rows, pid);
    if (prows.size() < 10) continue;
    RankingReport rep = rank_features(t, prows, options);
    out.write("ranking_features_" + pid + ".json", rep.to_json() + "\n");
    out.write("ranking_features_" + pid + ".csv", rep.to_csv());
    per_participant[pid] = json::parse(rep.to_json());
    for (std::size_t i = 0; i < rep.items.size(); ++i) {
      averaged[rep.items[i]] += rep.final_score[i];
      appearances[rep.items[i]] += 1;
    }
  }
  if (averaged.empty())
    throw ValidationError("no participant had enough labeled rows to rank");

  std::vector<std::pair<std::string, double>> overall;
  for (const auto& [item, total] : averaged)
    overall.emplace_back(item, total / appearances[item]);
  std::sort(overall.begin(), overall.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::ostringstream csv;
  csv << "item,mean_final_score\n";
  json overall_json = json::array();
  for (const auto& [item, score] : overall) {
    csv << item << ',' << score << '\n';
    overall_json.push_back(json{{"item", item}, {"score", score}});
  }
  out.write("ranking_features_overall.csv", csv.str());
  out.write("ranking_features_overall.json", overall_json.dump(2) + "\n");

  out.finalize(json{{"command", "rank-features"},
                    {"features", args.features},
                    {"seed", args.seed},
                    {"top_m", args.top_m},
                    {"classifier_methods", !args.no_classifiers},
                    {"direction", args.direction},
                    {"mi_bins", args.mi_bins}});
  return 0;
}

struct RankActivitiesArgs {
  std::string features;
  std::string out;
  std::uint64_t seed = 0;
  int top_m = 2;
  int max_forward = 30;
  int rf_trees = 0;
};

int cmd_rank_activities(const RankActivitiesArgs& args) {
  FeatureTable t = read_feature_csv_file(args.features);
  auto rows = labeled_rows(t);
  if (rows.empty()) throw ValidationError("no labeled rows in " + args.features);

  ActivityRankingOptions options;
  options.top_m = args.top_m;
  options.max_forward_steps = args.max_forward;
  options.seed = args.seed;
  if (args.rf_trees > 0) options.rf.n_trees = args.rf_trees;

  RunOutput out(args.out);
  for (const auto& pid : participants_of(t)) {
    auto prows = participant_rows(t, rows, pid);
    if (prows.size() < 16) continue;
    try {
      RankingReport rep = rank_activities(t, prows, options);
      out.write("ranking_activities_" + pid + ".json", rep.to_json() + "\n");
      out.write("ranking_activities_" + pid + ".csv", rep.to_csv());
    } catch (const std::invalid_argument& e) {
      std::cerr << "WARNING: " << pid << ": " << e.what() << "\n";
    }
  }
  out.finalize(json{{"command", "rank-activities"},
                    {"features", args.features},
                    {"seed", args.seed},
                    {"top_m", args.top_m},
                    {"max_forward", args.max_forward},
                    {"rf_trees", args.rf_trees}});
  return 0;
}

struct SweepArgs {
  std::string in;
  std::string out;
  std::uint64_t seed = 0;
  std::vector<double> windows = kDefaultWindowSweep;
  std::string classifier = "bn";
  int k = 5;
  int rf_trees = 0;
};

int cmd_sweep(const SweepArgs& args) {
  LabeledDataset dataset = load_input_dataset(args.in);
  ClassifierSpec spec = spec_of(args.classifier, args.seed, args.rf_trees);
  auto rows = sweep_windows(spec, dataset, args.windows, args.k, args.seed);

  RunOutput out(args.out);
  out.write("sweep.csv", sweep_to_csv(rows));
  json rows_json = json::array();
  for (const auto& r : rows) {
    rows_json.push_back(json{{"participant", r.participant},
                             {"window_seconds", r.window_seconds},
                             {"whole_record", r.whole_record},
                             {"record_micro", r.scores.record_micro},
                             {"record_macro", r.scores.record_macro},
                             {"eight_hour_micro", r.scores.eight_hour_micro},
                             {"eight_hour_macro", r.scores.eight_hour_macro},
                             {"daily_micro", r.scores.daily_micro},
                             {"daily_macro", r.scores.daily_macro}});
  }
  out.write("sweep.json", rows_json.dump(2) + "\n");
  out.finalize(json{{"command", "sweep-windows"},
                    {"in", args.in},
                    {"seed", args.seed},
                    {"windows", args.windows},
                    {"classifier", args.classifier},
                    {"k", args.k}});
  return 0;
}

struct SelectArgs {
  std::string features;
  std::string out;
  std::uint64_t seed = 0;
  std::string classifier = "bn";
  double coverage_min = 0.4;
  int max_features = 30;
  int k = 5;
  int rf_trees = 0;
};

int cmd_select(const SelectArgs& args) {
  FeatureTable t = read_feature_csv_file(args.features);
  auto rows = labeled_rows(t);
  if (rows.empty()) throw ValidationError("no labeled rows in " + args.features);
  ClassifierSpec spec = spec_of(args.classifier, args.seed, args.rf_trees);

  RunOutput out(args.out);
  for (const auto& pid : participants_of(t)) {
    auto prows = participant_rows(t, rows, pid);
    if (prows.size() < 10) continue;
    try {
      SelectionResult result = search_activity_subsets(
          spec, t, prows, args.coverage_min, args.max_features, args.k, args.seed);
      out.write("selection_" + pid + ".json", result.to_json() + "\n");
      for (const auto& w : result.warnings)
        std::cerr << "WARNING: " << pid << ": " << w << "\n";
    } catch (const std::invalid_argument& e) {
      std::cerr << "WARNING: " << pid << ": " << e.what() << "\n";
    }
  }
  out.finalize(json{{"command", "select"},
                    {"features", args.features},
                    {"seed", args.seed},
                    {"classifier", args.classifier},
                    {"coverage_min", args.coverage_min},
                    {"max_features", args.max_features},
                    {"k", args.k}});
  return 0;
}

struct AnomalyArgs {
  std::string features;
  std::string out;
  std::uint64_t seed = 0;
  int top_k = 5;
  double k_sigma = 2.0;
  std::vector<std::string> feature_list;
};

int cmd_anomaly(const AnomalyArgs& args) {
  FeatureTable t = read_feature_csv_file(args.features);
  auto rows = labeled_rows(t);
  if (rows.empty()) throw ValidationError("no labeled rows in " + args.features);

  RunOutput out(args.out);
  json summary = json::object();
  for (const auto& pid : participants_of(t)) {
    auto prows = participant_rows(t, rows, pid);
    if (prows.empty()) continue;

    std::vector<int> columns;
    json feature_source;
    if (!args.feature_list.empty()) {
      columns = parse_feature_columns(args.feature_list);
      feature_source = "explicit";
    } else {
      // Personalized top-k from the information-based ranking.
      FeatureRankingOptions options;
      options.classifier_methods = false;
      options.seed = args.seed;
      RankingReport rep = rank_features(t, prows, options);
      std::vector<std::string> picked;
      for (int i = 0; i < args.top_k &&
                      i < static_cast<int>(rep.order.size());
           ++i)
        picked.push_back(rep.items[rep.order[i]]);
      columns = parse_feature_columns(picked);
      feature_source = picked;
    }

    try {
      AnomalyReport report = anomaly_report(t, prows, columns, args.k_sigma);
      out.write("anomaly_" + pid + ".json", report.to_json() + "\n");
      out.write("anomaly_" + pid + ".csv", report.to_csv());
      summary[pid] = json{{"cohen_d", report.cohen_d},
                          {"days", report.days.size()},
                          {"features", feature_source}};
    } catch (const std::invalid_argument& e) {
      std::cerr << "WARNING: " << pid << ": " << e.what() << "\n";
      summary[pid] = json{{"error", e.what()}};
    }
  }
  out.write("anomaly_summary.json", summary.dump(2) + "\n");
  out.finalize(json{{"command", "anomaly"},
                    {"features", args.features},
                    {"seed", args.seed},
                    {"top_k", args.top_k},
                    {"k_sigma", args.k_sigma},
                    {"feature_list", args.feature_list}});
  return 0;
}

struct ReportArgs {
  std::string in;
  std::string out;
};

int cmd_report(const ReportArgs& args) {
  // Merge the JSON artifacts of prior runs into one summary document.
  json summary{{"selections", json::object()},
               {"sweeps", json::array()},
               {"feature_rankings", json::object()},
               {"activity_rankings", json::object()},
               {"anomaly", json::object()},
               {"provenance", json::array()}};
  for (const auto& entry : fs::recursive_directory_iterator(args.in)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    json j;
    try {
      in >> j;
    } catch (const json::exception&) {
      continue;  // non-JSON or partial artifact
    }
    auto stem = [&](const std::string& prefix) {
      return name.substr(prefix.size(), name.size() - prefix.size() - 5);
    };
    if (name.rfind("selection_", 0) == 0)
      summary["selections"][stem("selection_")] = j;
    else if (name == "sweep.json")
      summary["sweeps"].push_back(j);
    else if (name.rfind("ranking_features_", 0) == 0 && name.find("overall") == std::string::npos)
      summary["feature_rankings"][stem("ranking_features_")] = j;
    else if (name == "ranking_features_overall.json")
      summary["feature_rankings"]["overall"] = j;
    else if (name.rfind("ranking_activities_", 0) == 0)
      summary["activity_rankings"][stem("ranking_activities_")] = j;
    else if (name.rfind("anomaly_", 0) == 0 && name != "anomaly_summary.json")
      summary["anomaly"][stem("anomaly_")] = j;
    else if (name == "provenance.json")
      summary["provenance"].push_back(j);
  }
  fs::path target(args.out);
  if (target.extension() != ".json") {
    fs::create_directories(target);
    target /= "summary.json";
  }
  write_file_atomic(target.string(), summary.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frailwatch: weakness-monitoring analytics over motion logs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from a config file");
  app.allow_config_extras(false);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a calibrated synthetic study");
  synth->add_option("--seed", synth_args.seed, "RNG seed")->required();
  synth->add_option("--out", synth_args.out, "Output directory")->required();
  synth->add_option("--participants", synth_args.participants,
                    "Number of profiles (1-5)")
      ->check(CLI::Range(1, 5));
  synth->add_option("--days", synth_args.days, "Days per participant (0 = profile default)");
  synth->add_option("--duration-scale", synth_args.duration_scale,
                    "Scales record durations");
  synth->add_option("--start-date", synth_args.start_date, "Study start (YYYY-MM-DD)");

  ExtractArgs extract_args;
  auto* extract = app.add_subcommand("extract", "Extract windowed feature vectors");
  extract->add_option("--in", extract_args.in, "Dataset directory or manifest")
      ->required();
  extract->add_option("--out", extract_args.out, "Output directory (default --in)");
  extract->add_option("--window", extract_args.window, "Window seconds");
  extract->add_flag("--whole-record", extract_args.whole_record,
                    "One window per record");
  extract->add_option("--mirror", extract_args.mirror,
                      "Force mirror flag (0/1; default per participant)");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Fit the Bayesian network");
  train->add_option("--features", train_args.features, "Feature CSV")->required();
  train->add_option("--out", train_args.out, "Output directory")->required();
  train->add_flag("--em", train_args.em, "Force batch EM");
  train->add_option("--columns", train_args.columns,
                    "Feature names to include (default all)")
      ->delimiter(',');

  ClassifyArgs classify_args;
  auto* classify = app.add_subcommand("classify", "Score feature rows with a model");
  classify->add_option("--features", classify_args.features, "Feature CSV")->required();
  classify->add_option("--model", classify_args.model, "Model JSON")->required();
  classify->add_option("--out", classify_args.out, "Output directory")->required();
  classify->add_flag("--unknown-activity", classify_args.unknown_activity,
                     "Marginalize over activities");

  RankFeaturesArgs rankf_args;
  auto* rankf = app.add_subcommand("rank-features", "Rank feature groups");
  rankf->add_option("--features", rankf_args.features, "Feature CSV")->required();
  rankf->add_option("--out", rankf_args.out, "Output directory")->required();
  rankf->add_option("--seed", rankf_args.seed, "RNG seed")->required();
  rankf->add_option("--top-m", rankf_args.top_m, "Consensus cutoff");
  rankf->add_flag("--no-classifier-methods", rankf_args.no_classifiers,
                  "Information methods only");
  rankf->add_option("--direction", rankf_args.direction, "forward|backward")
      ->check(CLI::IsMember({"forward", "backward"}));
  rankf->add_option("--mi-bins", rankf_args.mi_bins, "MI bins");
  rankf->add_option("--rf-trees", rankf_args.rf_trees, "Override RF tree count");

  RankActivitiesArgs ranka_args;
  auto* ranka = app.add_subcommand("rank-activities", "Rank activities");
  ranka->add_option("--features", ranka_args.features, "Feature CSV")->required();
  ranka->add_option("--out", ranka_args.out, "Output directory")->required();
  ranka->add_option("--seed", ranka_args.seed, "RNG seed")->required();
  ranka->add_option("--top-m", ranka_args.top_m, "Consensus cutoff");
  ranka->add_option("--max-forward", ranka_args.max_forward, "Forward step cap");
  ranka->add_option("--rf-trees", ranka_args.rf_trees, "Override RF tree count");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep-windows", "Sweep temporal window sizes");
  sweep->add_option("--in", sweep_args.in, "Dataset directory or manifest")->required();
  sweep->add_option("--out", sweep_args.out, "Output directory")->required();
  sweep->add_option("--seed", sweep_args.seed, "RNG seed")->required();
  sweep->add_option("--windows", sweep_args.windows, "Window sizes in seconds")
      ->delimiter(',');
  sweep->add_option("--classifier", sweep_args.classifier, "bn|rf|svm")
      ->check(CLI::IsMember({"bn", "rf", "svm"}));
  sweep->add_option("--k", sweep_args.k, "Cross-validation folds");
  sweep->add_option("--rf-trees", sweep_args.rf_trees, "Override RF tree count");

  SelectArgs select_args;
  auto* select = app.add_subcommand("select",
                                    "Search activity subsets + forward-select features");
  select->add_option("--features", select_args.features, "Feature CSV")->required();
  select->add_option("--out", select_args.out, "Output directory")->required();
  select->add_option("--seed", select_args.seed, "RNG seed")->required();
  select->add_option("--classifier", select_args.classifier, "bn|rf|svm")
      ->check(CLI::IsMember({"bn", "rf", "svm"}));
  select->add_option("--coverage-min", select_args.coverage_min, "Coverage floor");
  select->add_option("--max-features", select_args.max_features, "Forward cap");
  select->add_option("--k", select_args.k, "Cross-validation folds");
  select->add_option("--rf-trees", select_args.rf_trees, "Override RF tree count");

  AnomalyArgs anomaly_args;
  auto* anomaly = app.add_subcommand("anomaly", "Normal-model day scoring");
  anomaly->add_option("--features", anomaly_args.features, "Feature CSV (windowed)")
      ->required();
  anomaly->add_option("--out", anomaly_args.out, "Output directory")->required();
  anomaly->add_option("--seed", anomaly_args.seed, "RNG seed")->required();
  anomaly->add_option("--top-k", anomaly_args.top_k, "Personalized feature count");
  anomaly->add_option("--k-sigma", anomaly_args.k_sigma, "Flagging threshold");
  anomaly->add_option("--features-list", anomaly_args.feature_list,
                      "Explicit feature names (skip ranking)")
      ->delimiter(',');

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Merge prior outputs into a summary");
  report->add_option("--in", report_args.in, "Directory of prior runs")->required();
  report->add_option("--out", report_args.out, "Summary path or directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "ERROR: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*synth) return cmd_synth(synth_args);
    if (*extract) return cmd_extract(extract_args);
    if (*train) return cmd_train(train_args);
    if (*classify) return cmd_classify(classify_args);
    if (*rankf) return cmd_rank_features(rankf_args);
    if (*ranka) return cmd_rank_activities(ranka_args);
    if (*sweep) return cmd_sweep(sweep_args);
    if (*select) return cmd_select(select_args);
    if (*anomaly) return cmd_anomaly(anomaly_args);
    if (*report) return cmd_report(report_args);
  } catch (const std::exception& e) {
    std::cerr << "ERROR: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "ERROR: no subcommand\n";
  return 1;
}
