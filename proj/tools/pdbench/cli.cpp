#include "pdbench/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "pdvoice/error.hpp"
#include "pdvoice/experiment.hpp"

namespace pdbench {

namespace fs = std::filesystem;
using namespace pdvoice;

namespace {

constexpr const char* kDefaultOutputDir = "pdbench-out";
constexpr const char* kOutputDirEnv = "PDBENCH_OUTPUT_DIR";

struct Options {
  std::string config_path;
  std::string data_path;
  std::string manifest;
  std::string label_column = "label";
  std::vector<std::string> drop_columns;
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string models;
  std::optional<double> alpha;
  std::string out_dir;
  bool resume = false;
  bool dump_splits = false;
  bool quiet = false;
  // extract / analyze
  std::string input;
  std::string output;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

fs::path resolve_out(const Options& o, const ExperimentConfig* c) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (c && !c->output_dir.empty()) return c->output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return kDefaultOutputDir;
}

ExperimentConfig build_config(const Options& o) {
  ExperimentConfig c;
  c.models = ExperimentConfig::default_models();
  if (!o.config_path.empty()) c = load_config(o.config_path);
  if (!o.data_path.empty()) {
    c.dataset = DatasetSpec{};
    c.dataset.path = o.data_path;
    if (fs::is_directory(c.dataset.path)) {
      c.dataset.type = DatasetSpec::Type::Audio;
      c.dataset.manifest = o.manifest.empty() ? c.dataset.path / "manifest.csv" : fs::path(o.manifest);
    } else {
      c.dataset.label_column = o.label_column;
      if (!o.drop_columns.empty()) c.dataset.drop_columns = o.drop_columns;
    }
  }
  if (c.dataset.path.empty()) throw UsageError("no dataset: pass --config or --data");
  if (o.runs) c.runs = *o.runs;
  if (o.seed) c.base_seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.dump_splits) c.dump_splits = true;
  if (!o.models.empty()) {
    std::vector<ClassifierSpec> chosen;
    for (const auto& id : split_list(o.models)) {
      auto kind = parse_model_kind(id);
      if (!kind) throw UsageError("unknown model '" + id + "'; valid models: " + valid_model_ids());
      // Keep hyperparameter overrides from the config file when present.
      ClassifierSpec spec = ClassifierSpec::defaults(*kind);
      for (const auto& m : c.models) {
        if (m.kind == *kind) spec = m;
      }
      chosen.push_back(spec);
    }
    c.models = std::move(chosen);
  }
  c.output_dir = resolve_out(o, &c);
  c.validate();
  return c;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  // Write-then-rename keeps a readable runs.csv if the process dies mid-write.
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    f << text;
    if (!f.flush()) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string runs_text(const RunTable& t) {
  std::ostringstream ss;
  write_runs_csv(t, ss);
  return ss.str();
}

RunTable read_runs_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  return read_runs_csv(in);
}

// Runs in chunks so an interrupted job leaves a valid partial runs.csv that
// --resume can complete.
RunTable do_run(const ExperimentConfig& c, const Options& o, std::ostream& err) {
  const fs::path dir = c.output_dir;
  const fs::path runs_path = dir / "runs.csv";
  LabeledDataset ds = load_dataset(c.dataset);

  RunTable table;
  table.config_fingerprint = c.fingerprint();
  if (o.resume && fs::exists(runs_path)) {
    RunTable prev = read_runs_file(runs_path);
    if (prev.config_fingerprint != table.config_fingerprint) {
      throw UsageError("cannot resume: " + runs_path.string() + " was produced by a different configuration");
    }
    table.records = std::move(prev.records);
  }

  if (c.dump_splits) {
    std::ostringstream ss;
    write_splits_csv(ds, c, ss);
    write_file(dir / "splits.csv", ss.str());
  }

  const std::size_t chunk = std::max<std::size_t>(10, 4 * c.workers);
  for (std::size_t end = std::min(chunk, c.runs);; end = std::min(end + chunk, c.runs)) {
    ExperimentConfig part = c;
    part.runs = end;
    RunTable t = run_experiment(part, ds, &table);
    t.config_fingerprint = table.config_fingerprint;
    table = std::move(t);
    write_file(runs_path, runs_text(table));
    if (!o.quiet) err << "pdbench: " << end << "/" << c.runs << " runs\n";
    if (end == c.runs) break;
  }
  std::ostringstream timings;
  write_timings_csv(table, timings);
  write_file(dir / "timings.csv", timings.str());
  return table;
}

void do_analyze(const RunTable& table, double alpha, const fs::path& dir, std::ostream& out) {
  StatReport rep = analyze(table, alpha);
  write_file(dir / "report.json", report_to_json(rep));
  std::ostringstream box;
  write_boxplot_csv(table, box);
  write_file(dir / "boxplot_accuracy.csv", box.str());

  char line[160];
  out << "model  accuracy            precision           recall              f1                  letters\n";
  for (std::size_t i = 0; i < rep.models.size(); ++i) {
    const auto& m = rep.models[i];
    std::snprintf(line, sizeof line, "%-5s  %.4f +/- %.4f   %.4f +/- %.4f   %.4f +/- %.4f   %.4f +/- %.4f   %s\n",
                  std::string(model_id(m.model)).c_str(), m.accuracy.mean, m.accuracy.std, m.precision.mean,
                  m.precision.std, m.recall.mean, m.recall.std, m.f1.mean, m.f1.std,
                  i < rep.letters.letters.size() ? rep.letters.letters[i].c_str() : "");
    out << line;
  }
  if (rep.kruskal_wallis) {
    std::snprintf(line, sizeof line, "Kruskal-Wallis H = %.6g, p = %.6g\n", rep.kruskal_wallis->statistic,
                  rep.kruskal_wallis->p_value);
    out << line;
  } else {
    out << "Kruskal-Wallis: " << rep.kruskal_wallis_error << "\n";
  }
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"pdbench: repeated-subsampling benchmark of voice-based Parkinson's classifiers"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--data", o.data_path, "features CSV, or audio root containing manifest.csv");
    sub->add_option("--manifest", o.manifest, "group,label CSV for an audio root");
    sub->add_option("--label-column", o.label_column, "label column of a CSV dataset");
    sub->add_option("--drop-columns", o.drop_columns, "non-feature CSV columns")->delimiter(',');
    sub->add_option("--runs", o.runs, "number of runs")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "base seed");
    sub->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--models", o.models, "comma-separated subset of dnn,rf,lr,svm,gb");
    sub->add_option("--alpha", o.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_flag("--resume", o.resume, "complete an interrupted runs.csv");
    sub->add_flag("--dump-splits", o.dump_splits, "write splits.csv");
    sub->add_flag("-q,--quiet", o.quiet, "no progress output");
  };

  auto* extract = app.add_subcommand("extract", "WAV tree -> features CSV");
  extract->add_option("--input", o.input, "audio root")->required()->check(CLI::ExistingDirectory);
  extract->add_option("--manifest", o.manifest, "group,label CSV (default <input>/manifest.csv)");
  extract->add_option("--output", o.output, "features CSV (default <out>/features.csv)");
  extract->add_option("--out", o.out_dir, "output directory");

  auto* run = app.add_subcommand("run", "config -> runs.csv");
  add_common(run);

  auto* an = app.add_subcommand("analyze", "runs.csv -> report.json + boxplot_accuracy.csv");
  an->add_option("--input", o.input, "runs.csv (default <out>/runs.csv)");
  an->add_option("--alpha", o.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
  an->add_option("--out", o.out_dir, "output directory (default: next to runs.csv)");
  an->add_flag("-q,--quiet", o.quiet, "no summary table");

  auto* all = app.add_subcommand("all", "run, then analyze");
  add_common(all);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "pdbench: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (extract->parsed()) {
      const fs::path root = o.input;
      const fs::path manifest = o.manifest.empty() ? root / "manifest.csv" : fs::path(o.manifest);
      LabeledDataset ds = load_audio_dataset(root, read_group_manifest(manifest));
      const fs::path dest = o.output.empty() ? resolve_out(o, nullptr) / "features.csv" : fs::path(o.output);
      std::ostringstream ss;
      write_features_csv(ds, ss);
      write_file(dest, ss.str());
      if (!o.quiet) {
        err << "pdbench: " << ds.size() << " recordings (" << ds.count(0) << " healthy, " << ds.count(1)
            << " PD) -> " << dest.string() << "\n";
      }
    } else if (run->parsed() || all->parsed()) {
      ExperimentConfig c = build_config(o);
      RunTable table = do_run(c, o, err);
      if (all->parsed()) {
        std::ostringstream sink;
        do_analyze(table, c.alpha, c.output_dir, o.quiet ? sink : out);
      }
    } else if (an->parsed()) {
      const fs::path dir = resolve_out(o, nullptr);
      const fs::path input = o.input.empty() ? dir / "runs.csv" : fs::path(o.input);
      const fs::path dest = !o.out_dir.empty() ? dir : (o.input.empty() ? dir : input.parent_path());
      RunTable table = read_runs_file(input);
      std::ostringstream sink;
      do_analyze(table, o.alpha.value_or(0.05), dest.empty() ? fs::path(".") : dest, o.quiet ? sink : out);
    }
  } catch (const UsageError& e) {
    err << "pdbench: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "pdbench: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "pdbench: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace pdbench
