#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pdvoice/dataset.hpp"
#include "pdvoice/learners.hpp"
#include "pdvoice/metrics.hpp"
#include "pdvoice/split.hpp"
#include "pdvoice/stats.hpp"

namespace pdvoice {

inline constexpr int kFormatVersion = 1;

struct DatasetSpec {
  enum class Type { Csv, Audio };
  Type type = Type::Csv;
  /// CSV file, or root of the audio tree.
  std::filesystem::path path;
  /// Audio only; defaults to <path>/manifest.csv.
  std::filesystem::path manifest;
  std::string label_column = "label";
  std::vector<std::string> drop_columns;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<ClassifierSpec> models;
  std::size_t runs = 1000;
  std::uint64_t base_seed = 0;
  std::size_t workers = 1;
  double alpha = 0.05;
  std::filesystem::path output_dir;
  bool dump_splits = false;

  /// All five kinds with default hyperparameters, reporting order.
  static std::vector<ClassifierSpec> default_models();
  /// Throws Error(InvalidArgument).
  void validate() const;
  /// Hash of everything that influences runs.csv (not workers, output_dir
  /// or dump_splits).
  std::uint64_t fingerprint() const;
};

/// JSON config: {"dataset": {...}, "models": [...], "runs": ..,
/// "base_seed": .., "workers": .., "alpha": .., "output_dir": ..,
/// "dump_splits": ..}. Models are ids ("dnn") or objects with "kind" plus
/// hyperparameter overrides. Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON with every hyperparameter spelled out.
std::string config_to_json(const ExperimentConfig& config);

LabeledDataset load_dataset(const DatasetSpec& spec);

struct RunRecord {
  std::size_t run_index = 0;
  ModelKind model = ModelKind::Dnn;
  std::uint64_t seed = 0;
  MetricSet metrics;
  bool early_stopped = false;
  std::uint64_t split_fingerprint = 0;
  /// Wall time; kept out of runs.csv so that file stays reproducible.
  double train_ms = 0.0;
};

struct RunTable {
  std::uint64_t config_fingerprint = 0;
  std::vector<RunRecord> records;

  /// Models in order of first appearance.
  std::vector<ModelKind> models() const;
  std::size_t run_count() const;
};

/// seed_r = mix64(base_seed ^ mix64(run_index)). Within a run the split,
/// the two oversampling draws and each model's trainer use child streams
/// 1, 2, 3 and 100 + model position in kAllModelKinds.
std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run_index);

/// Split -> scale -> oversample for run seed_r; identical for every model
/// in the run.
struct PreparedRun {
  SplitTriple split;
  Matrix train_x;
  LabelVector train_y;
  Matrix val_x;
  LabelVector val_y;
};
PreparedRun prepare_run(const LabeledDataset& ds, std::uint64_t seed_r);

/// One (run, model) task. Metrics are rounded to 10 significant digits so
/// the record is exactly what runs.csv stores.
RunRecord execute_task(const LabeledDataset& ds, const ClassifierSpec& spec, std::size_t run_index,
                       std::uint64_t base_seed);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every (run, model) pair missing from `resume` on a pool of
/// config.workers threads, then orders records by (run, model position in
/// config). Output is independent of the worker count. A failing task
/// aborts with Error(TrainingFailed) naming run, model and seed.
RunTable run_experiment(const ExperimentConfig& config, const LabeledDataset& ds,
                        const RunTable* resume = nullptr, const ProgressFn& progress = {});

void write_runs_csv(const RunTable& table, std::ostream& out);
RunTable read_runs_csv(std::istream& in);
void write_timings_csv(const RunTable& table, std::ostream& out);
/// run_index,partition,row_index for each run (audit trail).
void write_splits_csv(const LabeledDataset& ds, const ExperimentConfig& config, std::ostream& out);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

struct ModelSummary {
  ModelKind model = ModelKind::Dnn;
  std::size_t runs = 0;
  MetricSummary accuracy, precision, recall, f1;
  std::optional<TestResult> shapiro_wilk;
  std::string shapiro_wilk_error;
};

struct StatReport {
  double alpha = 0.05;
  std::uint64_t config_fingerprint = 0;
  std::vector<ModelSummary> models;
  std::optional<TestResult> levene;
  std::string levene_error;
  std::optional<TestResult> kruskal_wallis;
  std::string kruskal_wallis_error;
  bool omnibus_significant = false;
  PairwiseMatrix pairwise;
  LetterDisplay letters;
};

/// Descriptives for all four metrics; the test chain runs on accuracy.
/// Throws Error(TooFewModels) or Error(TooFewRuns).
StatReport analyze(const RunTable& table, double alpha);

std::string report_to_json(const StatReport& report);
void write_boxplot_csv(const RunTable& table, std::ostream& out);

/// runs.csv, timings.csv, report.json and boxplot_accuracy.csv under dir.
/// Throws Error(IoError) naming the path that could not be written.
void emit_outputs(const RunTable& table, const StatReport& report, const std::filesystem::path& dir);

/// printf("%.10g").
std::string format_float(double v);
double round_significant(double v);

}  // namespace pdvoice
