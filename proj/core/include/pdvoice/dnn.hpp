#pragma once

#include <cstdint>
#include <vector>

#include "pdvoice/learners.hpp"
#include "pdvoice/random.hpp"

namespace pdvoice {

/// Fully connected ReLU network with a single sigmoid output. Dropout sits
/// after every hidden activation and uses inverted scaling, so inference
/// needs no rescaling.
class Mlp {
 public:
  Mlp() = default;
  /// Layer widths input, hidden..., 1. Weights are drawn uniformly from
  /// +-sqrt(6 / (fan_in + fan_out)); biases start at zero.
  Mlp(int input_dim, const std::vector<int>& hidden, Rng& init_rng);

  std::size_t input_dim() const { return widths_.front(); }
  std::size_t parameter_count() const { return params_.size(); }
  const std::vector<int>& widths() const { return widths_; }

  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  /// Output logits for every row, inference mode.
  std::vector<double> logits(const Matrix& x) const;

  /// Mean binary cross-entropy over `rows` and its gradient. With a
  /// non-null dropout_rng, hidden units are dropped with probability
  /// dropout_rate (training mode).
  double loss_and_gradient(const Matrix& x, const LabelVector& y, std::span<const std::size_t> rows,
                           std::vector<double>& gradient, Rng* dropout_rng, double dropout_rate) const;

  /// Mean binary cross-entropy in inference mode over all rows.
  double loss(const Matrix& x, const LabelVector& y) const;

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }

  std::vector<int> widths_;
  std::vector<std::size_t> offsets_;  // per layer: start of W (out x in), then b (out)
  std::vector<double> params_;
};

class DnnModel final : public TrainedModel {
 public:
  explicit DnnModel(Mlp net) : net_(std::move(net)) {}

  ModelKind kind() const override { return ModelKind::Dnn; }
  std::size_t input_dim() const override { return net_.input_dim(); }
  const Mlp& network() const { return net_; }
  /// Sigmoid outputs in inference mode.
  std::vector<double> probabilities(const Matrix& m) const;

 protected:
  LabelVector predict_rows(const Matrix& m) const override;
  void save_body(std::ostream& out) const override;

 private:
  Mlp net_;
};

/// Label rule for a sigmoid output: 1 iff p >= 0.5.
int probability_label(double p);

/// Adam with decoupled weight decay on mini-batches; early stopping on
/// validation loss with best-epoch weights restored. Random streams derive
/// from seed in the order: initialisation, batch shuffling, dropout masks.
std::unique_ptr<DnnModel> train_dnn(const Matrix& x, const LabelVector& y, const Matrix& val_x,
                                    const LabelVector& val_y, const DnnParams& params,
                                    std::uint64_t seed);

}  // namespace pdvoice
