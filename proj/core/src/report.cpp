#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pdvoice/error.hpp"
#include "pdvoice/experiment.hpp"

namespace pdvoice {

using nlohmann::json;

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double round_significant(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_float(v).c_str(), nullptr);
}

namespace {

constexpr const char* kRunsHeader =
    "run_index,model,seed,accuracy,precision,recall,f1,early_stopped,split_fingerprint";

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

[[noreturn]] void bad_runs(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::NonNumericValue, "runs.csv line " + std::to_string(line) + ": " + what);
}

std::uint64_t parse_u64(const std::string& s, int base, std::size_t line) {
  if (s.empty()) bad_runs(line, "empty field");
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(s.c_str(), &end, base);
  if (errno != 0 || *end != '\0' || s[0] == '-') bad_runs(line, "bad integer '" + s + "'");
  return v;
}

double parse_metric(const std::string& s, std::size_t line) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !(v >= 0.0 && v <= 1.0)) bad_runs(line, "bad metric '" + s + "'");
  return v;
}

MetricSummary summarize(const std::vector<double>& xs) {
  MetricSummary s;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

json num(double v) {
  if (!std::isfinite(v)) return json(nullptr);
  return json(round_significant(v));
}

json test_json(const std::optional<TestResult>& t, const std::string& error) {
  json j;
  if (!t) {
    j["error"] = error;
    return j;
  }
  j["test"] = t->test_name;
  j["statistic"] = num(t->statistic);
  j["p_value"] = num(t->p_value);
  if (t->df1) j["df1"] = num(*t->df1);
  if (t->df2) j["df2"] = num(*t->df2);
  return j;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(num(m(i, k)));
    rows.push_back(row);
  }
  return rows;
}

json summary_json(const MetricSummary& s) { return json{{"mean", num(s.mean)}, {"std", num(s.std)}}; }

}  // namespace

void write_runs_csv(const RunTable& table, std::ostream& out) {
  out << "# format_version=" << kFormatVersion << " config_fingerprint=" << hex64(table.config_fingerprint)
      << "\n";
  out << kRunsHeader << "\n";
  for (const auto& r : table.records) {
    out << r.run_index << ',' << model_id(r.model) << ',' << r.seed << ',' << format_float(r.metrics.accuracy)
        << ',' << format_float(r.metrics.precision) << ',' << format_float(r.metrics.recall) << ','
        << format_float(r.metrics.f1) << ',' << (r.early_stopped ? 1 : 0) << ',' << hex64(r.split_fingerprint)
        << "\n";
  }
}

RunTable read_runs_csv(std::istream& in) {
  RunTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "format_version" && val != std::to_string(kFormatVersion)) {
          throw Error(ErrorCode::InvalidArgument, "runs.csv: unsupported format_version " + val);
        }
        if (key == "config_fingerprint") table.config_fingerprint = parse_u64(val, 16, line_no);
      }
      continue;
    }
    if (!header_seen) {
      if (line != kRunsHeader) throw Error(ErrorCode::MissingColumn, "runs.csv: unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    auto f = split_csv_line(line);
    if (f.size() != 9) bad_runs(line_no, "expected 9 fields");
    RunRecord r;
    r.run_index = parse_u64(f[0], 10, line_no);
    auto kind = parse_model_kind(f[1]);
    if (!kind) {
      throw Error(ErrorCode::InvalidArgument, "runs.csv line " + std::to_string(line_no) + ": unknown model '" +
                                                  f[1] + "' (valid: " + valid_model_ids() + ")");
    }
    r.model = *kind;
    r.seed = parse_u64(f[2], 10, line_no);
    r.metrics = {parse_metric(f[3], line_no), parse_metric(f[4], line_no), parse_metric(f[5], line_no),
                 parse_metric(f[6], line_no)};
    if (f[7] != "0" && f[7] != "1") bad_runs(line_no, "early_stopped must be 0 or 1");
    r.early_stopped = f[7] == "1";
    r.split_fingerprint = parse_u64(f[8], 16, line_no);
    table.records.push_back(r);
  }
  if (!header_seen) throw Error(ErrorCode::EmptyInput, "runs.csv: no header");
  return table;
}

void write_timings_csv(const RunTable& table, std::ostream& out) {
  out << "# format_version=" << kFormatVersion << "\n";
  out << "run_index,model,train_ms\n";
  for (const auto& r : table.records) {
    out << r.run_index << ',' << model_id(r.model) << ',' << format_float(r.train_ms) << "\n";
  }
}

void write_boxplot_csv(const RunTable& table, std::ostream& out) {
  out << "# format_version=" << kFormatVersion << "\n";
  out << "model,run_index,accuracy\n";
  for (const auto& r : table.records) {
    out << model_id(r.model) << ',' << r.run_index << ',' << format_float(r.metrics.accuracy) << "\n";
  }
}

StatReport analyze(const RunTable& table, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  const auto kinds = table.models();
  if (kinds.size() < 2) {
    throw Error(ErrorCode::TooFewModels, "need at least 2 models, got " + std::to_string(kinds.size()));
  }
  StatReport rep;
  rep.alpha = alpha;
  rep.config_fingerprint = table.config_fingerprint;

  std::vector<SampleGroup> groups;
  for (ModelKind k : kinds) {
    std::vector<double> acc, prec, rec, f1;
    for (const auto& r : table.records) {
      if (r.model != k) continue;
      acc.push_back(r.metrics.accuracy);
      prec.push_back(r.metrics.precision);
      rec.push_back(r.metrics.recall);
      f1.push_back(r.metrics.f1);
    }
    if (acc.size() < 3) {
      throw Error(ErrorCode::TooFewRuns, std::string(model_id(k)) + " has " + std::to_string(acc.size()) +
                                             " runs; at least 3 are needed");
    }
    ModelSummary s;
    s.model = k;
    s.runs = acc.size();
    s.accuracy = summarize(acc);
    s.precision = summarize(prec);
    s.recall = summarize(rec);
    s.f1 = summarize(f1);
    try {
      s.shapiro_wilk = shapiro_wilk(acc);
    } catch (const Error& e) {
      s.shapiro_wilk_error = e.what();
    }
    rep.models.push_back(s);
    groups.push_back({std::string(model_id(k)), std::move(acc)});
  }

  try {
    rep.levene = levene(groups);
  } catch (const Error& e) {
    rep.levene_error = e.what();
  }
  try {
    rep.kruskal_wallis = kruskal_wallis(groups);
    rep.omnibus_significant = rep.kruskal_wallis->p_value <= alpha;
  } catch (const Error& e) {
    rep.kruskal_wallis_error = e.what();
  }

  std::vector<std::string> names;
  for (const auto& g : groups) names.push_back(g.name);
  rep.pairwise.names = names;
  if (rep.kruskal_wallis) rep.pairwise = dunn_bonferroni(groups);

  // Post-hoc letters only follow a significant omnibus test; otherwise every
  // model shares one letter.
  if (rep.omnibus_significant) {
    rep.letters = compact_letters(rep.pairwise, alpha);
  } else {
    std::vector<std::vector<bool>> none(names.size(), std::vector<bool>(names.size(), false));
    rep.letters = compact_letters(names, none);
  }
  return rep;
}

std::string report_to_json(const StatReport& report) {
  json j;
  j["format_version"] = kFormatVersion;
  j["alpha"] = num(report.alpha);
  j["config_fingerprint"] = hex64(report.config_fingerprint);
  json models = json::array();
  for (std::size_t i = 0; i < report.models.size(); ++i) {
    const auto& m = report.models[i];
    json e;
    e["model"] = std::string(model_id(m.model));
    e["runs"] = m.runs;
    e["accuracy"] = summary_json(m.accuracy);
    e["precision"] = summary_json(m.precision);
    e["recall"] = summary_json(m.recall);
    e["f1"] = summary_json(m.f1);
    e["shapiro_wilk"] = test_json(m.shapiro_wilk, m.shapiro_wilk_error);
    if (i < report.letters.letters.size()) e["letters"] = report.letters.letters[i];
    models.push_back(e);
  }
  j["models"] = models;
  j["levene"] = test_json(report.levene, report.levene_error);
  j["kruskal_wallis"] = test_json(report.kruskal_wallis, report.kruskal_wallis_error);
  j["omnibus_significant"] = report.omnibus_significant;
  json dunn;
  dunn["models"] = report.pairwise.names;
  dunn["comparisons"] = report.pairwise.comparisons;
  dunn["z"] = matrix_json(report.pairwise.z);
  dunn["raw_p"] = matrix_json(report.pairwise.raw_p);
  dunn["adjusted_p"] = matrix_json(report.pairwise.adjusted_p);
  j["dunn_bonferroni"] = dunn;
  return j.dump(2) + "\n";
}

void emit_outputs(const RunTable& table, const StatReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  auto write = [&](const char* name, auto&& body) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    body(out);
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
  };
  write("runs.csv", [&](std::ostream& o) { write_runs_csv(table, o); });
  write("timings.csv", [&](std::ostream& o) { write_timings_csv(table, o); });
  write("boxplot_accuracy.csv", [&](std::ostream& o) { write_boxplot_csv(table, o); });
  write("report.json", [&](std::ostream& o) { o << report_to_json(report); });
}

}  // namespace pdvoice
