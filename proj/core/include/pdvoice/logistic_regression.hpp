#pragma once

#include <vector>

#include "pdvoice/learners.hpp"

namespace pdvoice {

/// L2-penalised logistic regression: minimises
///   C * sum_i log(1 + exp(-s_i (w.x_i + b))) + 0.5 * |w|^2,  s_i = +-1,
/// with the intercept left unpenalised.
class LogisticRegressionModel final : public TrainedModel {
 public:
  LogisticRegressionModel(std::vector<double> weights, double intercept)
      : weights_(std::move(weights)), intercept_(intercept) {}

  ModelKind kind() const override { return ModelKind::LogisticRegression; }
  std::size_t input_dim() const override { return weights_.size(); }

  const std::vector<double>& weights() const { return weights_; }
  double intercept() const { return intercept_; }
  double decision_value(std::span<const double> x) const;

 protected:
  LabelVector predict_rows(const Matrix& m) const override;
  void save_body(std::ostream& out) const override;

 private:
  std::vector<double> weights_;
  double intercept_;
};

/// Penalised objective and its gradient over (w, b) packed as [w..., b].
double logistic_objective(std::span<const double> params, const Matrix& x, const LabelVector& y,
                          double C, std::vector<double>* gradient);

/// Limited-memory BFGS with Armijo backtracking. Sets info().converged to
/// false (instead of throwing) when max_iter is reached first.
std::unique_ptr<LogisticRegressionModel> train_logreg(const Matrix& x, const LabelVector& y,
                                                      const LogRegParams& params);

}  // namespace pdvoice
