#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pdvoice/dataset.hpp"
#include "pdvoice/matrix.hpp"

namespace pdvoice {

/// Per-feature z-score statistics. Standard deviations are population
/// (ddof = 0) values; they are clamped to kStdFloor when applied.
struct ScalerState {
  static constexpr double kStdFloor = 1e-12;
  std::vector<double> means;
  std::vector<double> stds;
};

ScalerState fit_scaler(const Matrix& m);
/// (x - mean) / max(std, 1e-12) per column. Throws Error(DimensionMismatch).
Matrix apply_scaler(const ScalerState& state, const Matrix& m);

/// Row indices of the source dataset, each partition sorted ascending.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;

  /// FNV-1a hash of the three index lists; equal splits hash equally.
  std::uint64_t fingerprint() const;
};

struct Partition {
  Matrix features;
  LabelVector labels;
};

struct SplitTriple {
  SplitIndices indices;
  Partition train;
  Partition validation;
  Partition test;
  ScalerState scaler;
};

/// Two-stage stratified draw: per class, floor(n/5) rows (at least one) go
/// to test; of the remaining rows floor(m/4) (at least one) go to
/// validation; everything else is training. Throws Error(ClassTooSmall) if a
/// class has fewer than three rows.
SplitIndices stratified_indices(const LabelVector& labels, std::uint64_t seed);

/// stratified_indices, then a scaler fitted on the training rows and applied
/// to all three partitions.
SplitTriple stratified_split(const LabeledDataset& ds, std::uint64_t seed);

/// Random minority duplication until both classes have equal counts. The
/// original rows come first, in order, followed by the duplicates.
/// Throws Error(SingleClass) when only one class is present.
std::pair<Matrix, LabelVector> oversample(const Matrix& features, const LabelVector& labels,
                                          std::uint64_t seed);

}  // namespace pdvoice
