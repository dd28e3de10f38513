#include "pdvoice/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "pdvoice/error.hpp"
#include "pdvoice/random.hpp"

namespace pdvoice {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kTrainOversampleStream = 2;
constexpr std::uint64_t kValOversampleStream = 3;
constexpr std::uint64_t kModelStreamBase = 100;

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::InvalidArgument, "config: " + what); }

std::size_t model_position(ModelKind kind) {
  auto it = std::find(kAllModelKinds.begin(), kAllModelKinds.end(), kind);
  return static_cast<std::size_t>(it - kAllModelKinds.begin());
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) bad_config(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) bad_config("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    bad_config(std::string("bad value for '") + key + "' in " + where);
  }
}

ClassifierSpec parse_model(const json& j) {
  if (j.is_string()) {
    auto kind = parse_model_kind(j.get<std::string>());
    if (!kind) bad_config("unknown model '" + j.get<std::string>() + "' (valid: " + valid_model_ids() + ")");
    return ClassifierSpec::defaults(*kind);
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    bad_config("model entries must be an id or an object with \"kind\"");
  }
  auto kind = parse_model_kind(j["kind"].get<std::string>());
  if (!kind) bad_config("unknown model '" + j["kind"].get<std::string>() + "' (valid: " + valid_model_ids() + ")");
  ClassifierSpec spec = ClassifierSpec::defaults(*kind);
  const std::string where = "model " + std::string(model_id(*kind));
  std::visit(
      [&](auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LogRegParams>) {
          check_keys(j, {"kind", "C", "max_iter", "tolerance", "history"}, where);
          read_field(j, "C", p.C, where);
          read_field(j, "max_iter", p.max_iter, where);
          read_field(j, "tolerance", p.tolerance, where);
          read_field(j, "history", p.history, where);
        } else if constexpr (std::is_same_v<P, SvmParams>) {
          check_keys(j, {"kind", "C", "gamma", "tolerance", "max_passes"}, where);
          read_field(j, "C", p.C, where);
          if (j.contains("gamma") && !j["gamma"].is_null()) {
            double g = 0.0;
            read_field(j, "gamma", g, where);
            p.gamma = g;
          }
          read_field(j, "tolerance", p.tolerance, where);
          read_field(j, "max_passes", p.max_passes, where);
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          check_keys(j, {"kind", "n_trees", "max_depth", "min_samples_split", "max_features"}, where);
          read_field(j, "n_trees", p.n_trees, where);
          read_field(j, "max_depth", p.max_depth, where);
          read_field(j, "min_samples_split", p.min_samples_split, where);
          read_field(j, "max_features", p.max_features, where);
        } else if constexpr (std::is_same_v<P, BoostingParams>) {
          check_keys(j, {"kind", "n_estimators", "learning_rate", "max_depth"}, where);
          read_field(j, "n_estimators", p.n_estimators, where);
          read_field(j, "learning_rate", p.learning_rate, where);
          read_field(j, "max_depth", p.max_depth, where);
        } else {
          check_keys(j,
                     {"kind", "input_dim", "hidden", "dropout", "learning_rate", "weight_decay", "epochs",
                      "batch_size", "patience", "beta1", "beta2", "epsilon"},
                     where);
          read_field(j, "input_dim", p.input_dim, where);
          read_field(j, "hidden", p.hidden, where);
          read_field(j, "dropout", p.dropout, where);
          read_field(j, "learning_rate", p.learning_rate, where);
          read_field(j, "weight_decay", p.weight_decay, where);
          read_field(j, "epochs", p.epochs, where);
          read_field(j, "batch_size", p.batch_size, where);
          read_field(j, "patience", p.patience, where);
          read_field(j, "beta1", p.beta1, where);
          read_field(j, "beta2", p.beta2, where);
          read_field(j, "epsilon", p.epsilon, where);
        }
      },
      spec.params);
  return spec;
}

json model_to_json(const ClassifierSpec& spec) {
  json j;
  j["kind"] = std::string(model_id(spec.kind));
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LogRegParams>) {
          j["C"] = p.C;
          j["max_iter"] = p.max_iter;
          j["tolerance"] = p.tolerance;
          j["history"] = p.history;
        } else if constexpr (std::is_same_v<P, SvmParams>) {
          j["C"] = p.C;
          j["gamma"] = p.gamma ? json(*p.gamma) : json(nullptr);
          j["tolerance"] = p.tolerance;
          j["max_passes"] = p.max_passes;
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          j["n_trees"] = p.n_trees;
          j["max_depth"] = p.max_depth;
          j["min_samples_split"] = p.min_samples_split;
          j["max_features"] = p.max_features;
        } else if constexpr (std::is_same_v<P, BoostingParams>) {
          j["n_estimators"] = p.n_estimators;
          j["learning_rate"] = p.learning_rate;
          j["max_depth"] = p.max_depth;
        } else {
          j["input_dim"] = p.input_dim;
          j["hidden"] = p.hidden;
          j["dropout"] = p.dropout;
          j["learning_rate"] = p.learning_rate;
          j["weight_decay"] = p.weight_decay;
          j["epochs"] = p.epochs;
          j["batch_size"] = p.batch_size;
          j["patience"] = p.patience;
          j["beta1"] = p.beta1;
          j["beta2"] = p.beta2;
          j["epsilon"] = p.epsilon;
        }
      },
      spec.params);
  return j;
}

json dataset_to_json(const DatasetSpec& d) {
  json j;
  if (d.type == DatasetSpec::Type::Audio) {
    j["type"] = "audio";
    j["path"] = d.path.generic_string();
    j["manifest"] = d.manifest.generic_string();
  } else {
    j["type"] = "csv";
    j["path"] = d.path.generic_string();
    j["label_column"] = d.label_column;
    j["drop_columns"] = d.drop_columns;
  }
  return j;
}

json config_json(const ExperimentConfig& c, bool for_fingerprint) {
  json j;
  j["format_version"] = kFormatVersion;
  j["dataset"] = dataset_to_json(c.dataset);
  json models = json::array();
  for (const auto& m : c.models) models.push_back(model_to_json(m));
  j["models"] = models;
  j["runs"] = c.runs;
  j["base_seed"] = c.base_seed;
  j["alpha"] = c.alpha;
  if (!for_fingerprint) {
    j["workers"] = c.workers;
    j["output_dir"] = c.output_dir.generic_string();
    j["dump_splits"] = c.dump_splits;
  }
  return j;
}

}  // namespace

std::vector<ClassifierSpec> ExperimentConfig::default_models() {
  std::vector<ClassifierSpec> out;
  for (ModelKind k : kAllModelKinds) out.push_back(ClassifierSpec::defaults(k));
  return out;
}

void ExperimentConfig::validate() const {
  if (runs < 1) bad_config("runs must be >= 1");
  if (models.empty()) bad_config("at least one model is required");
  if (workers < 1) bad_config("workers must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) bad_config("alpha must lie in (0, 1)");
  if (dataset.path.empty()) bad_config("dataset.path is required");
  std::set<ModelKind> seen;
  for (const auto& m : models) {
    if (!seen.insert(m.kind).second) bad_config("model '" + std::string(model_id(m.kind)) + "' listed twice");
    m.validate();
  }
}

std::uint64_t ExperimentConfig::fingerprint() const {
  const std::string text = config_json(*this, true).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    bad_config(std::string("invalid JSON: ") + e.what());
  }
  check_keys(j,
             {"format_version", "dataset", "models", "runs", "base_seed", "workers", "alpha", "output_dir",
              "dump_splits"},
             "top level");
  ExperimentConfig c;
  c.models = ExperimentConfig::default_models();
  if (j.contains("format_version") && j["format_version"] != kFormatVersion) {
    bad_config("unsupported format_version");
  }
  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    check_keys(d, {"type", "path", "manifest", "label_column", "drop_columns"}, "dataset");
    std::string type = "csv";
    read_field(d, "type", type, "dataset");
    if (type == "audio") {
      c.dataset.type = DatasetSpec::Type::Audio;
    } else if (type != "csv") {
      bad_config("dataset.type must be \"csv\" or \"audio\"");
    }
    std::string path, manifest;
    read_field(d, "path", path, "dataset");
    read_field(d, "manifest", manifest, "dataset");
    c.dataset.path = path;
    c.dataset.manifest = manifest;
    read_field(d, "label_column", c.dataset.label_column, "dataset");
    read_field(d, "drop_columns", c.dataset.drop_columns, "dataset");
    if (c.dataset.type == DatasetSpec::Type::Audio && c.dataset.manifest.empty() && !path.empty()) {
      c.dataset.manifest = c.dataset.path / "manifest.csv";
    }
  }
  if (j.contains("models")) {
    if (!j["models"].is_array()) bad_config("models must be an array");
    c.models.clear();
    for (const auto& m : j["models"]) c.models.push_back(parse_model(m));
  }
  read_field(j, "runs", c.runs, "top level");
  read_field(j, "base_seed", c.base_seed, "top level");
  read_field(j, "workers", c.workers, "top level");
  read_field(j, "alpha", c.alpha, "top level");
  read_field(j, "dump_splits", c.dump_splits, "top level");
  std::string out;
  read_field(j, "output_dir", out, "top level");
  c.output_dir = out;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig c = parse_config(ss.str());
  // Relative dataset paths resolve against the config file's directory.
  const auto base = path.parent_path();
  if (!c.dataset.path.empty() && c.dataset.path.is_relative()) c.dataset.path = base / c.dataset.path;
  if (!c.dataset.manifest.empty() && c.dataset.manifest.is_relative()) {
    c.dataset.manifest = base / c.dataset.manifest;
  }
  return c;
}

std::string config_to_json(const ExperimentConfig& config) { return config_json(config, false).dump(2); }

LabeledDataset load_dataset(const DatasetSpec& spec) {
  if (spec.type == DatasetSpec::Type::Audio) {
    auto manifest = spec.manifest.empty() ? spec.path / "manifest.csv" : spec.manifest;
    return load_audio_dataset(spec.path, read_group_manifest(manifest));
  }
  return load_tabular_dataset(spec.path, spec.label_column, spec.drop_columns);
}

std::vector<ModelKind> RunTable::models() const {
  std::vector<ModelKind> out;
  for (const auto& r : records) {
    if (std::find(out.begin(), out.end(), r.model) == out.end()) out.push_back(r.model);
  }
  return out;
}

std::size_t RunTable::run_count() const {
  std::set<std::size_t> runs;
  for (const auto& r : records) runs.insert(r.run_index);
  return runs.size();
}

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run_index) {
  return derive_seed(base_seed, static_cast<std::uint64_t>(run_index));
}

PreparedRun prepare_run(const LabeledDataset& ds, std::uint64_t seed_r) {
  PreparedRun p;
  p.split = stratified_split(ds, derive_seed(seed_r, kSplitStream));
  std::tie(p.train_x, p.train_y) =
      oversample(p.split.train.features, p.split.train.labels, derive_seed(seed_r, kTrainOversampleStream));
  std::tie(p.val_x, p.val_y) = oversample(p.split.validation.features, p.split.validation.labels,
                                          derive_seed(seed_r, kValOversampleStream));
  return p;
}

namespace {

RunRecord run_prepared(const PreparedRun& p, const ClassifierSpec& spec, std::size_t run_index,
                       std::uint64_t seed_r) {
  RunRecord rec;
  rec.run_index = run_index;
  rec.model = spec.kind;
  rec.seed = seed_r;
  rec.split_fingerprint = p.split.indices.fingerprint();
  auto model = fit(spec, LabeledView{p.train_x, p.train_y}, LabeledView{p.val_x, p.val_y},
                   derive_seed(seed_r, kModelStreamBase + model_position(spec.kind)));
  auto predicted = model->predict(p.split.test.features);
  MetricSet m = metrics(confusion(p.split.test.labels, predicted));
  rec.metrics = {round_significant(m.accuracy), round_significant(m.precision), round_significant(m.recall),
                 round_significant(m.f1)};
  rec.early_stopped = model->info().early_stopped;
  rec.train_ms = model->info().train_ms;
  return rec;
}

}  // namespace

RunRecord execute_task(const LabeledDataset& ds, const ClassifierSpec& spec, std::size_t run_index,
                       std::uint64_t base_seed) {
  const std::uint64_t seed_r = run_seed(base_seed, run_index);
  try {
    return run_prepared(prepare_run(ds, seed_r), spec, run_index, seed_r);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::TrainingFailed, "run " + std::to_string(run_index) + " model " +
                                               std::string(model_id(spec.kind)) + " seed " +
                                               std::to_string(seed_r) + ": " + e.what());
  }
}

RunTable run_experiment(const ExperimentConfig& config, const LabeledDataset& ds, const RunTable* resume,
                        const ProgressFn& progress) {
  config.validate();
  ds.validate();
  for (const auto& m : config.models) {
    if (const auto* p = std::get_if<DnnParams>(&m.params); p && p->input_dim != 0 &&
                                                         static_cast<std::size_t>(p->input_dim) != ds.feature_dim()) {
      throw Error(ErrorCode::DimensionMismatch, "dnn input_dim " + std::to_string(p->input_dim) +
                                                    " but dataset has " + std::to_string(ds.feature_dim()) +
                                                    " features");
    }
  }

  const std::size_t n_models = config.models.size();
  const std::size_t total = config.runs * n_models;
  std::vector<std::optional<RunRecord>> slots(total);

  if (resume) {
    for (const auto& r : resume->records) {
      if (r.run_index >= config.runs) continue;
      for (std::size_t m = 0; m < n_models; ++m) {
        if (config.models[m].kind == r.model) slots[r.run_index * n_models + m] = r;
      }
    }
  }

  // Tasks are grouped by run so one worker prepares a split once and reuses
  // it for every missing model of that run.
  std::vector<std::size_t> pending_runs;
  for (std::size_t r = 0; r < config.runs; ++r) {
    for (std::size_t m = 0; m < n_models; ++m) {
      if (!slots[r * n_models + m]) {
        pending_runs.push_back(r);
        break;
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{total};
  for (const auto& s : slots) {
    if (!s) --done;
  }
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::map<std::size_t, std::string> errors;  // task index -> message

  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t k = next.fetch_add(1);
      if (k >= pending_runs.size()) return;
      const std::size_t r = pending_runs[k];
      const std::uint64_t seed_r = run_seed(config.base_seed, r);
      std::optional<PreparedRun> prepared;
      for (std::size_t m = 0; m < n_models; ++m) {
        const std::size_t slot = r * n_models + m;
        if (slots[slot]) continue;
        const auto& spec = config.models[m];
        try {
          if (!prepared) prepared = prepare_run(ds, seed_r);
          slots[slot] = run_prepared(*prepared, spec, r, seed_r);
        } catch (const std::exception& e) {
          std::lock_guard lock(mu);
          errors[slot] = "run " + std::to_string(r) + " model " + std::string(model_id(spec.kind)) + " seed " +
                         std::to_string(seed_r) + ": " + e.what();
          failed = true;
          return;
        }
        const std::size_t d = ++done;
        if (progress) {
          std::lock_guard lock(mu);
          progress(d, total);
        }
      }
    }
  };

  const std::size_t n_threads = std::min<std::size_t>(config.workers, std::max<std::size_t>(pending_runs.size(), 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (!errors.empty()) throw Error(ErrorCode::TrainingFailed, errors.begin()->second);

  RunTable table;
  table.config_fingerprint = config.fingerprint();
  table.records.reserve(total);
  for (auto& s : slots) table.records.push_back(std::move(*s));
  return table;
}

void write_splits_csv(const LabeledDataset& ds, const ExperimentConfig& config, std::ostream& out) {
  out << "# format_version=" << kFormatVersion << "\n";
  out << "run_index,partition,row_index\n";
  for (std::size_t r = 0; r < config.runs; ++r) {
    auto idx = stratified_indices(ds.labels, derive_seed(run_seed(config.base_seed, r), kSplitStream));
    auto emit = [&](const char* name, const std::vector<std::size_t>& rows) {
      for (auto i : rows) out << r << ',' << name << ',' << i << '\n';
    };
    emit("train", idx.train);
    emit("validation", idx.validation);
    emit("test", idx.test);
  }
}

}  // namespace pdvoice
