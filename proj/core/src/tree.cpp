#include "pdvoice/tree.hpp"

#include <algorithm>
#include <ostream>

namespace pdvoice {

double DecisionTree::evaluate(std::span<const double> x) const {
  std::size_t at = 0;
  while (nodes[at].feature >= 0) {
    const auto& node = nodes[at];
    at = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                               : node.right);
  }
  return nodes[at].value;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

int DecisionTree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

void DecisionTree::save(std::ostream& out) const {
  out << "tree " << nodes.size() << '\n';
  for (const auto& n : nodes) {
    if (n.feature < 0) {
      out << "leaf " << n.value << '\n';
    } else {
      out << "split " << n.feature << ' ' << n.threshold << ' ' << n.left << ' ' << n.right << '\n';
    }
  }
}

double split_threshold(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid >= hi ? lo : mid;
}

}  // namespace pdvoice
