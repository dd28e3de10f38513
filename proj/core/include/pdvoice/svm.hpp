#pragma once

#include <vector>

#include "pdvoice/learners.hpp"

namespace pdvoice {

/// RBF-kernel soft-margin SVM. Decision value
///   f(x) = sum_i alpha_i y_i exp(-gamma |x_i - x|^2) + bias,  y_i = +-1;
/// label 1 when f(x) >= 0.
class SvmModel final : public TrainedModel {
 public:
  SvmModel(Matrix support, std::vector<double> signed_alpha, double bias, double gamma,
           std::vector<double> all_alpha, std::vector<int> signs)
      : support_(std::move(support)), signed_alpha_(std::move(signed_alpha)), bias_(bias),
        gamma_(gamma), all_alpha_(std::move(all_alpha)), signs_(std::move(signs)) {}

  ModelKind kind() const override { return ModelKind::Svm; }
  std::size_t input_dim() const override { return support_.cols(); }

  double decision_value(std::span<const double> x) const;
  double gamma() const { return gamma_; }
  double bias() const { return bias_; }
  const Matrix& support_vectors() const { return support_; }
  /// Dual variables for every training row (zeros included) and the
  /// matching +-1 labels, kept for feasibility audits.
  const std::vector<double>& dual_coefficients() const { return all_alpha_; }
  const std::vector<int>& training_signs() const { return signs_; }

 protected:
  LabelVector predict_rows(const Matrix& m) const override;
  void save_body(std::ostream& out) const override;

 private:
  Matrix support_;
  std::vector<double> signed_alpha_;
  double bias_;
  double gamma_;
  std::vector<double> all_alpha_;
  std::vector<int> signs_;
};

/// 1 / (d * var(X)) over all entries; 1 when the variance is zero.
double scale_gamma(const Matrix& x);

/// SMO with second-order working-set selection. Stops when the maximal KKT
/// violation drops below the tolerance or after max_passes * n updates.
std::unique_ptr<SvmModel> train_svm_smo(const Matrix& x, const LabelVector& y, const SvmParams& params);

}  // namespace pdvoice
