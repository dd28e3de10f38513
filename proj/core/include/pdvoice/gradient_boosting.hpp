#pragma once

#include <vector>

#include "pdvoice/learners.hpp"
#include "pdvoice/tree.hpp"

namespace pdvoice {

/// Binomial-deviance boosting: F(x) = F0 + lr * sum_t tree_t(x), label 1
/// when F(x) >= 0.
class GradientBoostingModel final : public TrainedModel {
 public:
  GradientBoostingModel(double initial_score, double learning_rate, std::vector<DecisionTree> stages,
                        std::size_t input_dim)
      : initial_score_(initial_score), learning_rate_(learning_rate), stages_(std::move(stages)),
        input_dim_(input_dim) {}

  ModelKind kind() const override { return ModelKind::GradientBoosting; }
  std::size_t input_dim() const override { return input_dim_; }

  double initial_score() const { return initial_score_; }
  const std::vector<DecisionTree>& stages() const { return stages_; }
  double raw_score(std::span<const double> x) const;

 protected:
  LabelVector predict_rows(const Matrix& m) const override;
  void save_body(std::ostream& out) const override;

 private:
  double initial_score_;
  double learning_rate_;
  std::vector<DecisionTree> stages_;
  std::size_t input_dim_;
};

/// Mean binomial deviance (log-loss) of raw scores against 0/1 labels.
double binomial_deviance(std::span<const double> raw_scores, const LabelVector& y);

/// info().stage_loss holds the training deviance at F0 followed by the
/// value after each stage.
std::unique_ptr<GradientBoostingModel> train_gradient_boosting(const Matrix& x, const LabelVector& y,
                                                               const BoostingParams& params);

}  // namespace pdvoice
