#include "pdvoice/gradient_boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace pdvoice {
namespace {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

// Depth-limited least-squares tree on the residuals, split by Friedman's
// improvement n_l n_r / n (mean_l - mean_r)^2, leaves set to one Newton
// step sum(r) / sum(p (1 - p)).
class ResidualTreeBuilder {
 public:
  ResidualTreeBuilder(const Matrix& x, std::span<const double> residual, std::span<const double> hessian,
                      int max_depth)
      : x_(x), residual_(residual), hessian_(hessian), max_depth_(max_depth) {}

  DecisionTree build() {
    std::vector<std::size_t> rows(x_.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    tree_.nodes.back().depth = depth;

    int feature = -1;
    double threshold = 0.0;
    if (depth < max_depth_ && rows.size() >= 2) find_split(rows, feature, threshold);
    if (feature < 0) {
      double num = 0.0, den = 0.0;
      for (std::size_t r : rows) {
        num += residual_[r];
        den += hessian_[r];
      }
      tree_.nodes[static_cast<std::size_t>(index)].value = std::abs(den) < 1e-150 ? 0.0 : num / den;
      return index;
    }
    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) (x_(r, static_cast<std::size_t>(feature)) <= threshold ? left : right).push_back(r);
    const int l = grow(std::move(left), depth + 1);
    const int rr = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = feature;
    node.threshold = threshold;
    node.left = l;
    node.right = rr;
    return index;
  }

  void find_split(const std::vector<std::size_t>& rows, int& best_feature, double& best_threshold) {
    const auto n = static_cast<double>(rows.size());
    double total = 0.0;
    for (std::size_t r : rows) total += residual_[r];
    double best = 0.0;
    std::vector<std::pair<double, double>> column(rows.size());
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {x_(rows[i], f), residual_[rows[i]]};
      std::sort(column.begin(), column.end());
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_sum += column[i].second;
        if (column[i].first == column[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double diff = nr * left_sum - nl * (total - left_sum);
        const double improvement = diff * diff / (n * nl * nr);
        if (improvement > best) {
          best = improvement;
          best_feature = static_cast<int>(f);
          best_threshold = split_threshold(column[i].first, column[i + 1].first);
        }
      }
    }
  }

  const Matrix& x_;
  std::span<const double> residual_;
  std::span<const double> hessian_;
  int max_depth_;
  DecisionTree tree_;
};

}  // namespace

double binomial_deviance(std::span<const double> raw_scores, const LabelVector& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += softplus(raw_scores[i]) - y[i] * raw_scores[i];
  return acc / static_cast<double>(y.size());
}

double GradientBoostingModel::raw_score(std::span<const double> x) const {
  double f = initial_score_;
  for (const auto& t : stages_) f += learning_rate_ * t.evaluate(x);
  return f;
}

LabelVector GradientBoostingModel::predict_rows(const Matrix& m) const {
  LabelVector out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = raw_score(m.row(r)) >= 0.0 ? 1 : 0;
  return out;
}

void GradientBoostingModel::save_body(std::ostream& out) const {
  out << "initial_score " << initial_score_ << "\nlearning_rate " << learning_rate_ << "\nstages "
      << stages_.size() << '\n';
  for (const auto& t : stages_) t.save(out);
}

std::unique_ptr<GradientBoostingModel> train_gradient_boosting(const Matrix& x, const LabelVector& y,
                                                               const BoostingParams& params) {
  const std::size_t n = x.rows();
  const double positives = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const double prior = positives / static_cast<double>(n);
  const double f0 = std::log(prior / (1.0 - prior));

  std::vector<double> raw(n, f0), residual(n), hessian(n);
  std::vector<DecisionTree> stages;
  std::vector<double> losses{binomial_deviance(raw, y)};
  for (int stage = 0; stage < params.n_estimators; ++stage) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(raw[i]);
      residual[i] = y[i] - p;
      hessian[i] = p * (1.0 - p);
    }
    DecisionTree tree = ResidualTreeBuilder(x, residual, hessian, params.max_depth).build();
    for (std::size_t i = 0; i < n; ++i) raw[i] += params.learning_rate * tree.evaluate(x.row(i));
    losses.push_back(binomial_deviance(raw, y));
    stages.push_back(std::move(tree));
  }
  auto model = std::make_unique<GradientBoostingModel>(f0, params.learning_rate, std::move(stages), x.cols());
  model->mutable_info().iterations = params.n_estimators;
  model->mutable_info().stage_loss = std::move(losses);
  return model;
}

}  // namespace pdvoice
