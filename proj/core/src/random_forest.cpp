#include "pdvoice/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace pdvoice {
namespace {

struct Candidate {
  int feature = -1;
  double threshold = 0.0;
  double score = -1.0;  // sum over children of (c0^2 + c1^2) / n_child; larger is purer
};

class GiniBuilder {
 public:
  GiniBuilder(const Matrix& x, const LabelVector& y, const ForestParams& params, Rng& rng)
      : x_(x), y_(y), params_(params), rng_(rng) {
    const auto d = static_cast<double>(x.cols());
    mtry_ = params.max_features > 0 ? std::min<std::size_t>(static_cast<std::size_t>(params.max_features), x.cols())
                                    : static_cast<std::size_t>(std::ceil(std::sqrt(d)));
    features_.resize(x.cols());
  }

  DecisionTree build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    tree_.nodes.back().depth = depth;

    std::size_t ones = 0;
    for (std::size_t r : rows) ones += static_cast<std::size_t>(y_[r]);
    const bool pure = ones == 0 || ones == rows.size();
    const bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;
    Candidate best;
    if (!pure && !depth_capped && rows.size() >= static_cast<std::size_t>(params_.min_samples_split)) {
      best = find_split(rows);
    }
    if (best.feature < 0) {
      tree_.nodes[static_cast<std::size_t>(index)].value =
          majority_label(static_cast<int>(ones), static_cast<int>(rows.size()));
      return index;
    }

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (x_(r, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  // Visits features in random order, skipping those constant on this node,
  // until mtry informative features have been scored.
  Candidate find_split(const std::vector<std::size_t>& rows) {
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    std::vector<std::pair<double, int>> column(rows.size());
    Candidate best;
    std::size_t scored = 0;
    for (std::size_t k = 0; k < features_.size() && scored < mtry_; ++k) {
      const std::size_t pick = k + rng_.uniform_index(features_.size() - k);
      std::swap(features_[k], features_[pick]);
      const std::size_t f = features_[k];

      for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {x_(rows[i], f), y_[rows[i]]};
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      ++scored;

      double total[2] = {0, 0};
      for (const auto& [v, label] : column) total[label] += 1.0;
      double left[2] = {0, 0};
      const auto n = static_cast<double>(column.size());
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left[column[i].second] += 1.0;
        if (column[i].first == column[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double r0 = total[0] - left[0], r1 = total[1] - left[1];
        const double score = (left[0] * left[0] + left[1] * left[1]) / nl + (r0 * r0 + r1 * r1) / nr;
        if (score > best.score) {
          best.score = score;
          best.feature = static_cast<int>(f);
          best.threshold = split_threshold(column[i].first, column[i + 1].first);
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  const LabelVector& y_;
  const ForestParams& params_;
  Rng& rng_;
  std::size_t mtry_ = 1;
  std::vector<std::size_t> features_;
  DecisionTree tree_;
};

}  // namespace

int majority_label(int votes_for_one, int total) { return 2 * votes_for_one >= total ? 1 : 0; }

DecisionTree grow_gini_tree(const Matrix& x, const LabelVector& y, std::span<const std::size_t> rows,
                            const ForestParams& params, Rng& rng) {
  GiniBuilder builder(x, y, params, rng);
  return builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

int RandomForestModel::votes(std::span<const double> x) const {
  int ones = 0;
  for (const auto& t : trees_) ones += t.evaluate(x) > 0.5 ? 1 : 0;
  return ones;
}

LabelVector RandomForestModel::predict_rows(const Matrix& m) const {
  LabelVector out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out[r] = majority_label(votes(m.row(r)), static_cast<int>(trees_.size()));
  }
  return out;
}

void RandomForestModel::save_body(std::ostream& out) const {
  out << "trees " << trees_.size() << '\n';
  for (const auto& t : trees_) t.save(out);
}

std::unique_ptr<RandomForestModel> train_random_forest(const Matrix& x, const LabelVector& y,
                                                       const ForestParams& params, std::uint64_t seed) {
  const std::size_t n = x.rows();
  Rng rng(seed);
  std::vector<DecisionTree> trees;
  std::vector<std::vector<std::size_t>> bootstraps;
  trees.reserve(static_cast<std::size_t>(params.n_trees));
  for (int t = 0; t < params.n_trees; ++t) {
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = rng.uniform_index(n);
    std::sort(rows.begin(), rows.end());
    trees.push_back(grow_gini_tree(x, y, rows, params, rng));
    bootstraps.push_back(std::move(rows));
  }
  return std::make_unique<RandomForestModel>(std::move(trees), std::move(bootstraps), x.cols());
}

}  // namespace pdvoice
