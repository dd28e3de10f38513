#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace pdvoice {

/// Flat binary tree; rows with x[feature] <= threshold go left.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // class label (forest) or raw score (boosting)
  int depth = 0;
};

class DecisionTree {
 public:
  std::vector<TreeNode> nodes;

  double evaluate(std::span<const double> x) const;
  std::size_t leaf_count() const;
  int depth() const;
  void save(std::ostream& out) const;
};

/// Midpoint between two sorted distinct values, nudged to `lo` if rounding
/// lands on `hi`, so that lo <= t < hi.
double split_threshold(double lo, double hi);

}  // namespace pdvoice
