#pragma once

#include <vector>

#include "pdvoice/learners.hpp"
#include "pdvoice/random.hpp"
#include "pdvoice/tree.hpp"

namespace pdvoice {

/// Bagged Gini CART trees with hard majority voting (ties go to class 1).
class RandomForestModel final : public TrainedModel {
 public:
  RandomForestModel(std::vector<DecisionTree> trees, std::vector<std::vector<std::size_t>> bootstraps,
                    std::size_t input_dim)
      : trees_(std::move(trees)), bootstraps_(std::move(bootstraps)), input_dim_(input_dim) {}

  ModelKind kind() const override { return ModelKind::RandomForest; }
  std::size_t input_dim() const override { return input_dim_; }

  const std::vector<DecisionTree>& trees() const { return trees_; }
  /// Training-row multiset each tree was grown on.
  const std::vector<std::vector<std::size_t>>& bootstraps() const { return bootstraps_; }
  /// Number of trees voting class 1.
  int votes(std::span<const double> x) const;

 protected:
  LabelVector predict_rows(const Matrix& m) const override;
  void save_body(std::ostream& out) const override;

 private:
  std::vector<DecisionTree> trees_;
  std::vector<std::vector<std::size_t>> bootstraps_;
  std::size_t input_dim_;
};

/// Majority-vote rule shared with the tests: class 1 iff 2 * ones >= total.
int majority_label(int votes_for_one, int total);

/// One fully grown Gini tree on the given rows (duplicates allowed).
DecisionTree grow_gini_tree(const Matrix& x, const LabelVector& y, std::span<const std::size_t> rows,
                            const ForestParams& params, Rng& rng);

std::unique_ptr<RandomForestModel> train_random_forest(const Matrix& x, const LabelVector& y,
                                                       const ForestParams& params, std::uint64_t seed);

}  // namespace pdvoice
