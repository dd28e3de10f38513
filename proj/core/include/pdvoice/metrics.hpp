#pragma once

#include <cstddef>

#include "pdvoice/matrix.hpp"

namespace pdvoice {

/// Counts with label 1 (Parkinson's) as the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct MetricSet {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Throws Error(LengthMismatch) or Error(EmptyInput).
ConfusionMatrix confusion(const LabelVector& truth, const LabelVector& predicted);

/// Ratios with a zero denominator are reported as 0. Throws
/// Error(EmptyInput) for an all-zero matrix.
MetricSet metrics(const ConfusionMatrix& cm);

}  // namespace pdvoice
