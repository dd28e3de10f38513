#include "pdvoice/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "pdvoice/error.hpp"

namespace pdvoice {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* begin = t.data();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

bool is_wav(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav";
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::size_t LabeledDataset::count(int label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

void LabeledDataset::validate() const {
  if (labels.empty()) throw Error(ErrorCode::EmptyDataset, source_name + " has no rows");
  if (features.rows() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, source_name + ": features and labels disagree on row count");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
  }
  if (count(0) == 0 || count(1) == 0) {
    throw Error(ErrorCode::SingleClass, source_name + " contains only one class");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r' && c != '\n') {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

GroupManifest read_group_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + path.string());
  GroupManifest groups;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto fields = split_csv_line(t);
    double label = 0.0;
    if (fields.size() != 2 || !parse_double(fields[1], label) || (label != 0.0 && label != 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "manifest line must be `group,0|1`: " + t);
    }
    groups.push_back({trim(fields[0]), static_cast<int>(label)});
  }
  if (groups.empty()) throw Error(ErrorCode::EmptyDataset, "manifest lists no groups");
  return groups;
}

LabeledDataset load_audio_dataset(const std::filesystem::path& root, const GroupManifest& groups,
                                  const MfccParams& params) {
  namespace fs = std::filesystem;
  params.validate();
  LabeledDataset ds;
  ds.source_name = root.filename().string();
  ds.features = Matrix(0, static_cast<std::size_t>(params.n_mfcc));
  std::vector<std::string> failures;
  ErrorCode first_code = ErrorCode::MalformedWav;

  std::vector<std::vector<fs::path>> files_by_group;
  std::vector<std::string> missing;
  std::size_t total = 0;
  for (const auto& group : groups) {
    const fs::path dir = root / group.subdirectory;
    auto& files = files_by_group.emplace_back();
    if (!fs::is_directory(dir)) {
      missing.push_back(dir.string());
      continue;
    }
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file() && is_wav(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    total += files.size();
  }
  if (total == 0) throw Error(ErrorCode::EmptyDataset, "no WAV files under " + root.string());
  if (!missing.empty()) throw Error(ErrorCode::IoError, "group directory missing: " + missing.front());

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& group = groups[g];
    for (const auto& file : files_by_group[g]) {
      try {
        const auto features = extract_features(read_wav_file(file), params);
        ds.features.append_row(features);
        ds.labels.push_back(group.label);
        ds.row_names.push_back(fs::relative(file, root).generic_string());
      } catch (const Error& e) {
        if (failures.empty()) first_code = e.code();
        failures.push_back(e.what());
      }
    }
  }
  if (!failures.empty()) {
    std::string message = std::to_string(failures.size()) + " file(s) failed:";
    for (const auto& f : failures) message += "\n  " + f;
    throw Error(first_code, message);
  }
  ds.validate();
  return ds;
}

LabeledDataset read_tabular_dataset(std::istream& in, const std::string& label_column,
                                    const std::vector<std::string>& drop_columns,
                                    const std::string& source_name) {
  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    header = split_csv_line(t);
    break;
  }
  if (header.empty()) throw Error(ErrorCode::EmptyDataset, source_name + " has no header");
  for (auto& h : header) h = trim(h);

  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw Error(ErrorCode::MissingColumn, "label column `" + label_column + "` not in " + source_name);
  }
  const auto label_idx = static_cast<std::size_t>(label_it - header.begin());
  std::vector<std::size_t> feature_idx;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i == label_idx || header[i] == "path") continue;
    if (std::find(drop_columns.begin(), drop_columns.end(), header[i]) != drop_columns.end()) continue;
    feature_idx.push_back(i);
  }
  for (const auto& d : drop_columns) {
    if (std::find(header.begin(), header.end(), d) == header.end()) {
      throw Error(ErrorCode::MissingColumn, "drop column `" + d + "` not in " + source_name);
    }
  }

  LabeledDataset ds;
  ds.source_name = source_name;
  ds.features = Matrix(0, feature_idx.size());
  std::vector<double> row(feature_idx.size());
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto fields = split_csv_line(t);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::NonNumericValue, source_name + " line " + std::to_string(line_no) +
                                                  ": expected " + std::to_string(header.size()) +
                                                  " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < feature_idx.size(); ++j) {
      if (!parse_double(fields[feature_idx[j]], row[j])) {
        throw Error(ErrorCode::NonNumericValue, source_name + " line " + std::to_string(line_no) +
                                                    ", column `" + header[feature_idx[j]] + "`: `" +
                                                    fields[feature_idx[j]] + "`");
      }
    }
    double label = 0.0;
    if (!parse_double(fields[label_idx], label) || (label != 0.0 && label != 1.0)) {
      throw Error(ErrorCode::NonNumericValue, source_name + " line " + std::to_string(line_no) +
                                                  ": label `" + fields[label_idx] + "` is not 0 or 1");
    }
    ds.features.append_row(row);
    ds.labels.push_back(static_cast<int>(label));
    const auto path_it = std::find(header.begin(), header.end(), "path");
    if (path_it != header.end()) ds.row_names.push_back(fields[static_cast<std::size_t>(path_it - header.begin())]);
  }
  ds.validate();
  return ds;
}

LabeledDataset load_tabular_dataset(const std::filesystem::path& csv_path,
                                    const std::string& label_column,
                                    const std::vector<std::string>& drop_columns) {
  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + csv_path.string());
  return read_tabular_dataset(in, label_column, drop_columns, csv_path.filename().string());
}

void write_features_csv(const LabeledDataset& ds, std::ostream& out) {
  out << "# format_version=1\n";
  out << "path,label";
  for (std::size_t c = 0; c < ds.feature_dim(); ++c) out << ",mfcc_" << c;
  out << '\n';
  for (std::size_t r = 0; r < ds.size(); ++r) {
    out << csv_quote(r < ds.row_names.size() ? ds.row_names[r] : std::to_string(r)) << ','
        << ds.labels[r];
    for (double v : ds.features.row(r)) out << ',' << format_g17(v);
    out << '\n';
  }
}

}  // namespace pdvoice
