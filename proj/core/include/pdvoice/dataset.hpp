#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pdvoice/matrix.hpp"
#include "pdvoice/mfcc.hpp"

namespace pdvoice {

/// Binary-labelled observations: 0 = healthy, 1 = Parkinson's.
struct LabeledDataset {
  Matrix features;
  LabelVector labels;
  std::string source_name;
  /// Optional per-row identifiers (recording paths for audio datasets).
  std::vector<std::string> row_names;

  std::size_t size() const { return labels.size(); }
  std::size_t feature_dim() const { return features.cols(); }
  std::size_t count(int label) const;
  /// Throws Error(EmptyDataset / SingleClass / DimensionMismatch).
  void validate() const;
};

/// Subdirectory -> label rules for an audio corpus.
struct GroupRule {
  std::string subdirectory;
  int label = 0;
};
using GroupManifest = std::vector<GroupRule>;

/// Reads a `group,label` CSV (header required, `#` comments allowed).
GroupManifest read_group_manifest(const std::filesystem::path& path);

/// Walks every *.wav below each group's subdirectory (sorted by path),
/// extracts mean-MFCC features and labels rows by group. Any file that
/// fails to decode aborts the load; the error lists every failing file.
LabeledDataset load_audio_dataset(const std::filesystem::path& root, const GroupManifest& groups,
                                  const MfccParams& params = {});

/// Numeric CSV with a 0/1 label column. A `path` column, when present,
/// supplies row_names and is never treated as a feature.
LabeledDataset load_tabular_dataset(const std::filesystem::path& csv_path,
                                    const std::string& label_column,
                                    const std::vector<std::string>& drop_columns);
LabeledDataset read_tabular_dataset(std::istream& in, const std::string& label_column,
                                    const std::vector<std::string>& drop_columns,
                                    const std::string& source_name);

/// `path,label,mfcc_0..mfcc_{d-1}` with a leading format_version comment.
/// Values are written with 17 significant digits so a reload is lossless.
void write_features_csv(const LabeledDataset& ds, std::ostream& out);

/// Minimal RFC 4180 field splitting (quoted fields, doubled quotes).
std::vector<std::string> split_csv_line(const std::string& line);
std::string csv_quote(const std::string& field);

}  // namespace pdvoice
