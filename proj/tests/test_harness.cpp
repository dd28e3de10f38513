#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>

#include "pdbench/cli.hpp"
#include "pdvoice/error.hpp"
#include "pdvoice/experiment.hpp"
#include "support.hpp"

using namespace pdvoice;
using testing_support::TempDir;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected pdvoice::Error");
  return ErrorCode::InvalidArgument;
}

std::vector<ClassifierSpec> quick_models() {
  auto models = ExperimentConfig::default_models();
  for (auto& m : models) {
    if (auto* p = std::get_if<DnnParams>(&m.params)) p->epochs = 15;
    if (auto* p = std::get_if<ForestParams>(&m.params)) p->n_trees = 15;
    if (auto* p = std::get_if<BoostingParams>(&m.params)) p->n_estimators = 20;
  }
  return models;
}

ExperimentConfig quick_config(std::size_t runs, std::uint64_t seed) {
  ExperimentConfig c;
  c.dataset.path = "unused.csv";
  c.models = quick_models();
  c.runs = runs;
  c.base_seed = seed;
  return c;
}

std::string runs_text(const RunTable& t) {
  std::ostringstream ss;
  write_runs_csv(t, ss);
  return ss.str();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_lines(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) n += !line.empty() && line[0] != '#';
  return n;
}

RunTable synthetic_table(const std::vector<std::vector<double>>& acc_by_model) {
  RunTable t;
  for (std::size_t r = 0; r < acc_by_model[0].size(); ++r) {
    for (std::size_t m = 0; m < acc_by_model.size(); ++m) {
      RunRecord rec;
      rec.run_index = r;
      rec.model = kAllModelKinds[m];
      rec.metrics = {acc_by_model[m][r], 0.5, 0.5, 0.5};
      t.records.push_back(rec);
    }
  }
  return t;
}

int cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "pdbench");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = pdbench::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return rc;
}

const LabeledDataset& dataset() {
  static const LabeledDataset ds = testing_support::blobs(70, 4, 0.6, 1.0, 5, 0.4);
  return ds;
}

}  // namespace

TEST_CASE("config parsing") {
  auto c = parse_config(R"({
    "dataset": {"type": "csv", "path": "x.csv", "label_column": "status", "drop_columns": ["name"]},
    "models": ["lr", {"kind": "dnn", "epochs": 7, "hidden": [8]}],
    "runs": 12, "base_seed": 9, "workers": 3, "alpha": 0.01, "output_dir": "out"
  })");
  CHECK(c.runs == 12);
  CHECK(c.base_seed == 9);
  CHECK(c.workers == 3);
  CHECK(c.alpha == 0.01);
  CHECK(c.dataset.label_column == "status");
  REQUIRE(c.models.size() == 2);
  CHECK(std::get<DnnParams>(c.models[1].params).epochs == 7);
  CHECK(std::get<DnnParams>(c.models[1].params).hidden == std::vector<int>{8});
  CHECK_NOTHROW(c.validate());

  auto again = parse_config(config_to_json(c));
  CHECK(again.fingerprint() == c.fingerprint());
  auto moved = c;
  moved.workers = 8;
  moved.output_dir = "elsewhere";
  CHECK(moved.fingerprint() == c.fingerprint());
  moved.base_seed = 10;
  CHECK(moved.fingerprint() != c.fingerprint());

  auto defaults = parse_config(R"({"dataset": {"type": "audio", "path": "root"}})");
  CHECK(defaults.models.size() == 5);
  CHECK(defaults.runs == 1000);
  CHECK(defaults.dataset.manifest == std::filesystem::path("root") / "manifest.csv");

  CHECK(code_of([] { parse_config(R"({"runz": 3})"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { parse_config(R"({"models": ["knn"]})"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { parse_config(R"({"models": [{"kind": "svm", "depth": 3}]})"); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { parse_config("{not json"); }) == ErrorCode::InvalidArgument);
  auto zero = quick_config(0, 1);
  CHECK(code_of([&] { zero.validate(); }) == ErrorCode::InvalidArgument);
  auto empty = quick_config(1, 1);
  empty.models.clear();
  CHECK(code_of([&] { empty.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("run seeds") {
  CHECK(run_seed(7, 0) == run_seed(7, 0));
  CHECK(run_seed(7, 0) != run_seed(7, 1));
  CHECK(run_seed(7, 0) != run_seed(8, 0));
}

TEST_CASE("run_experiment: cardinality and bit-identical rerun") {
  auto c = quick_config(2, 7);
  c.models = {quick_models()[2]};
  auto a = run_experiment(c, dataset());
  auto b = run_experiment(c, dataset());
  CHECK(a.records.size() == 2);
  CHECK(runs_text(a) == runs_text(b));

  auto five = quick_config(3, 7);
  auto t = run_experiment(five, dataset());
  CHECK(t.records.size() == 15);
  CHECK(t.run_count() == 3);
  CHECK(t.models().size() == 5);
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    CHECK(t.records[i].run_index == i / 5);
    CHECK(t.records[i].model == kAllModelKinds[i % 5]);
    // Every model in a run sees the same split.
    CHECK(t.records[i].split_fingerprint == t.records[i - i % 5].split_fingerprint);
    CHECK(t.records[i].seed == run_seed(7, i / 5));
    CHECK(t.records[i].metrics.accuracy >= 0.0);
    CHECK(t.records[i].metrics.accuracy <= 1.0);
  }
  CHECK(t.records[0].split_fingerprint != t.records[5].split_fingerprint);
  auto single = execute_task(dataset(), five.models[3], 1, 7);
  CHECK(single.metrics.accuracy == t.records[8].metrics.accuracy);
  CHECK(single.metrics.f1 == t.records[8].metrics.f1);
}

TEST_CASE("run_experiment: worker count and resume do not change bytes") {
  auto c = quick_config(6, 42);
  const std::string serial = runs_text(run_experiment(c, dataset()));
  c.workers = 4;
  CHECK(runs_text(run_experiment(c, dataset())) == serial);

  std::istringstream in(serial);
  RunTable partial = read_runs_csv(in);
  partial.records.erase(partial.records.begin() + 13, partial.records.end());
  partial.records.erase(partial.records.begin() + 2);
  CHECK(runs_text(run_experiment(c, dataset(), &partial)) == serial);
}

TEST_CASE("run_experiment: failures name run, model and seed") {
  auto c = quick_config(1, 3);
  LabeledDataset tiny;
  tiny.features = Matrix(6, 1, 2.0);  // identical rows cannot be trained on
  tiny.labels = {0, 0, 0, 1, 1, 1};
  try {
    run_experiment(c, tiny);
    FAIL("expected TrainingFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TrainingFailed);
    CHECK(std::string(e.what()).find("run 0 model") != std::string::npos);
    CHECK(std::string(e.what()).find(std::to_string(run_seed(3, 0))) != std::string::npos);
  }
  auto bad_dim = quick_config(1, 3);
  std::get<DnnParams>(bad_dim.models[0].params).input_dim = 13;
  CHECK(code_of([&] { run_experiment(bad_dim, dataset()); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("runs.csv round trip and validation") {
  auto t = run_experiment(quick_config(3, 1), dataset());
  const std::string text = runs_text(t);
  CHECK(data_lines(text) == 16);
  std::istringstream in(text);
  auto back = read_runs_csv(in);
  CHECK(back.config_fingerprint == t.config_fingerprint);
  CHECK(runs_text(back) == text);

  std::istringstream bad("run_index,model,seed,accuracy,precision,recall,f1,early_stopped,split_fingerprint\n"
                         "0,dnn,1,1.5,0,0,0,0,ab\n");
  CHECK_THROWS_AS(read_runs_csv(bad), Error);
  std::istringstream wrong_header("a,b\n");
  CHECK(code_of([&] { read_runs_csv(wrong_header); }) == ErrorCode::MissingColumn);
}

TEST_CASE("analyze: preconditions") {
  auto one = synthetic_table({{0.9, 0.8, 0.7}});
  CHECK(code_of([&] { analyze(one, 0.05); }) == ErrorCode::TooFewModels);
  auto two_runs = synthetic_table({{0.9, 0.8}, {0.7, 0.6}});
  CHECK(code_of([&] { analyze(two_runs, 0.05); }) == ErrorCode::TooFewRuns);
}

TEST_CASE("analyze: identical samples share one letter") {
  std::vector<double> acc{0.8, 0.8, 0.8, 0.8, 0.8};
  auto rep = analyze(synthetic_table({acc, acc, acc}), 0.05);
  CHECK(!rep.kruskal_wallis);
  CHECK(rep.kruskal_wallis_error.find("AllTied") != std::string::npos);
  CHECK(!rep.omnibus_significant);
  CHECK(rep.letters.letters == std::vector<std::string>{"a", "a", "a"});
  CHECK(!rep.models[0].shapiro_wilk);
  CHECK(rep.models[0].accuracy.std == 0.0);
}

TEST_CASE("analyze: disjoint accuracy ranges") {
  Rng rng(3);
  std::vector<double> lo(30), hi(30);
  for (auto& v : lo) v = rng.uniform(0.60, 0.70);
  for (auto& v : hi) v = rng.uniform(0.90, 0.99);
  auto rep = analyze(synthetic_table({lo, hi}), 0.05);
  REQUIRE(rep.kruskal_wallis);
  CHECK(rep.kruskal_wallis->p_value < 0.001);
  CHECK(rep.omnibus_significant);
  // Mean-rank gap 30 over N = 60: z = 30 / sqrt(60*61/12 * 2/30).
  CHECK(std::abs(rep.pairwise.z(0, 1)) == doctest::Approx(30.0 / std::sqrt(305.0 * 2.0 / 30.0)));
  CHECK(rep.letters.letters == std::vector<std::string>{"a", "b"});
}

TEST_CASE("emit_outputs and report round trip") {
  TempDir dir("emit");
  auto c = quick_config(3, 11);
  auto t = run_experiment(c, dataset());
  auto rep = analyze(t, 0.05);
  emit_outputs(t, rep, dir.path());
  CHECK(data_lines(slurp(dir.path() / "runs.csv")) == 16);
  CHECK(data_lines(slurp(dir.path() / "boxplot_accuracy.csv")) == 16);
  CHECK(data_lines(slurp(dir.path() / "timings.csv")) == 16);

  const std::string json_text = slurp(dir.path() / "report.json");
  auto parsed = nlohmann::json::parse(json_text);
  CHECK(parsed.dump(2) + "\n" == json_text);
  CHECK(parsed["models"].size() == 5);
  CHECK(parsed["dunn_bonferroni"]["comparisons"] == 10);
  CHECK(parsed["dunn_bonferroni"]["raw_p"].size() == 5);
  CHECK(parsed["dunn_bonferroni"]["adjusted_p"].size() == 5);

  std::ofstream(dir.path() / "blocker") << "x";
  CHECK(code_of([&] { emit_outputs(t, rep, dir.path() / "blocker" / "sub"); }) == ErrorCode::IoError);
}

TEST_CASE("descriptives agree with runs.csv") {
  auto t = run_experiment(quick_config(5, 2), dataset());
  std::istringstream in(runs_text(t));
  auto back = read_runs_csv(in);
  auto rep = analyze(back, 0.05);
  for (const auto& m : rep.models) {
    std::vector<double> xs;
    for (const auto& r : back.records) {
      if (r.model == m.model) xs.push_back(r.metrics.recall);
    }
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    CHECK(std::abs(m.recall.mean - mean) <= 1e-12);
    CHECK(std::abs(m.recall.std - std::sqrt(ss / (xs.size() - 1))) <= 1e-12);
  }
  // In-memory records already hold the serialised values.
  CHECK(analyze(t, 0.05).models[0].accuracy.mean == rep.models[0].accuracy.mean);
}

TEST_CASE("cli") {
  TempDir dir("cli");
  const auto csv = dir.path() / "d.csv";
  {
    std::ofstream out(csv);
    write_features_csv(dataset(), out);
  }
  const auto a = (dir.path() / "a").string(), b = (dir.path() / "b").string();
  const std::vector<std::string> base{"--data", csv.string(), "--runs", "4", "--seed", "42", "--models", "lr,svm", "-q"};
  auto with = [&](std::vector<std::string> head, const std::string& out) {
    head.insert(head.end(), base.begin(), base.end());
    head.push_back("--out");
    head.push_back(out);
    return head;
  };
  CHECK(cli(with({"run"}, a)) == 0);
  CHECK(cli(with({"run", "--workers", "3"}, b)) == 0);
  CHECK(slurp(dir.path() / "a" / "runs.csv") == slurp(dir.path() / "b" / "runs.csv"));

  CHECK(cli({"analyze", "--input", a + "/runs.csv", "-q"}) == 0);
  CHECK(std::filesystem::exists(dir.path() / "a" / "report.json"));
  CHECK(std::filesystem::exists(dir.path() / "a" / "boxplot_accuracy.csv"));

  std::string err;
  CHECK(cli({"run", "--data", csv.string(), "--models", "dnn,knn", "--out", a}, &err) == pdbench::kExitUsage);
  CHECK(err.find("dnn, rf, lr, svm, gb") != std::string::npos);

  auto one = synthetic_table({{0.9, 0.8, 0.7}});
  std::ofstream(dir.path() / "one.csv") << runs_text(one);
  CHECK(cli({"analyze", "--input", (dir.path() / "one.csv").string(), "-q"}, &err) == pdbench::kExitData);
  CHECK(err.find("TooFewModels") != std::string::npos);

  CHECK(cli({}, &err) == pdbench::kExitUsage);
  CHECK(cli({"run", "--runs", "x"}) == pdbench::kExitUsage);
  CHECK(cli({"run", "--data", (dir.path() / "nope.csv").string(), "--out", a}) == pdbench::kExitData);

  const std::string cfg = (dir.path() / "cfg.json").string();
  std::ofstream(cfg) << R"({"dataset": {"type": "csv", "path": "d.csv"}, "models": ["lr", "gb"], "runs": 3})";
  CHECK(cli({"all", "--config", cfg, "--out", b, "-q"}) == 0);
  CHECK(data_lines(slurp(dir.path() / "b" / "runs.csv")) == 7);
  CHECK(cli({"run", "--config", cfg, "--out", b, "--resume", "--seed", "5", "-q"}) == pdbench::kExitUsage);
}

TEST_CASE("cli: extract and audio datasets") {
  TempDir dir("extract");
  testing_support::write_synthetic_corpus(dir.path() / "corpus", 4, 5, 1);
  const auto out = dir.path() / "features.csv";
  CHECK(cli({"extract", "--input", (dir.path() / "corpus").string(), "--output", out.string()}) == 0);
  auto ds = load_tabular_dataset(out, "label", {});
  CHECK(ds.size() == 9);
  CHECK(ds.feature_dim() == 13);
  CHECK(ds.row_names[0] == "healthy/rec_000.wav");
  DatasetSpec audio;
  audio.type = DatasetSpec::Type::Audio;
  audio.path = dir.path() / "corpus";
  CHECK(load_dataset(audio).features == ds.features);
}
