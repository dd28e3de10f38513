#include "pdvoice/dnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "pdvoice/error.hpp"

namespace pdvoice {
namespace {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

enum Stream : std::uint64_t { kInitStream = 1, kShuffleStream = 2, kDropoutStream = 3 };

}  // namespace

Mlp::Mlp(int input_dim, const std::vector<int>& hidden, Rng& init_rng) {
  widths_.push_back(input_dim);
  widths_.insert(widths_.end(), hidden.begin(), hidden.end());
  widths_.push_back(1);
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(widths_[l] * widths_[l + 1] + widths_[l + 1]);
  }
  params_.assign(total, 0.0);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const auto fan_in = static_cast<std::size_t>(widths_[l]);
    const auto fan_out = static_cast<std::size_t>(widths_[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t k = 0; k < fan_in * fan_out; ++k) {
      params_[offsets_[l] + k] = init_rng.uniform(-limit, limit);
    }
  }
}

std::vector<double> Mlp::logits(const Matrix& x) const {
  std::vector<double> out(x.rows());
  std::vector<double> a, next;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    a.assign(row.begin(), row.end());
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      const auto in = static_cast<std::size_t>(widths_[l]);
      const auto outw = static_cast<std::size_t>(widths_[l + 1]);
      const double* W = params_.data() + offsets_[l];
      const double* b = W + in * outw;
      next.assign(outw, 0.0);
      for (std::size_t o = 0; o < outw; ++o) {
        double z = b[o];
        for (std::size_t i = 0; i < in; ++i) z += W[o * in + i] * a[i];
        const bool hidden = l + 2 < widths_.size();
        next[o] = hidden ? std::max(z, 0.0) : z;
      }
      a.swap(next);
    }
    out[r] = a[0];
  }
  return out;
}

double Mlp::loss(const Matrix& x, const LabelVector& y) const {
  const auto z = logits(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) acc += softplus(z[i]) - y[i] * z[i];
  return acc / static_cast<double>(z.size());
}

double Mlp::loss_and_gradient(const Matrix& x, const LabelVector& y, std::span<const std::size_t> rows,
                              std::vector<double>& gradient, Rng* dropout_rng, double dropout_rate) const {
  const std::size_t batch = rows.size();
  const std::size_t layers = widths_.size() - 1;
  gradient.assign(params_.size(), 0.0);

  // acts[l] is the (post-dropout) input to layer l, batch x widths_[l];
  // pre[l] the pre-activation output of layer l.
  std::vector<std::vector<double>> acts(layers + 1), pre(layers), masks(layers);
  acts[0].resize(batch * static_cast<std::size_t>(widths_[0]));
  for (std::size_t b = 0; b < batch; ++b) {
    auto row = x.row(rows[b]);
    std::copy(row.begin(), row.end(), acts[0].begin() + static_cast<std::ptrdiff_t>(b * row.size()));
  }
  const double keep = 1.0 - dropout_rate;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<std::size_t>(widths_[l]);
    const auto out = static_cast<std::size_t>(widths_[l + 1]);
    const double* W = params_.data() + offsets_[l];
    const double* bias = W + in * out;
    const bool hidden = l + 1 < layers;
    pre[l].resize(batch * out);
    acts[l + 1].resize(batch * out);
    if (hidden && dropout_rng) masks[l].resize(batch * out);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* a = acts[l].data() + b * in;
      for (std::size_t o = 0; o < out; ++o) {
        double z = bias[o];
        for (std::size_t i = 0; i < in; ++i) z += W[o * in + i] * a[i];
        pre[l][b * out + o] = z;
        double act = hidden ? std::max(z, 0.0) : z;
        if (hidden && dropout_rng) {
          const double m = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
          masks[l][b * out + o] = m;
          act *= m;
        }
        acts[l + 1][b * out + o] = act;
      }
    }
  }

  double loss = 0.0;
  std::vector<double> delta(batch), next_delta;
  for (std::size_t b = 0; b < batch; ++b) {
    const double z = acts[layers][b];
    const double target = y[rows[b]];
    loss += softplus(z) - target * z;
    delta[b] = (sigmoid(z) - target) / static_cast<double>(batch);
  }

  for (std::size_t l = layers; l-- > 0;) {
    const auto in = static_cast<std::size_t>(widths_[l]);
    const auto out = static_cast<std::size_t>(widths_[l + 1]);
    const double* W = params_.data() + offsets_[l];
    double* gW = gradient.data() + offsets_[l];
    double* gb = gW + in * out;
    next_delta.assign(batch * in, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* a = acts[l].data() + b * in;
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[b * out + o];
        if (d == 0.0) continue;
        gb[o] += d;
        for (std::size_t i = 0; i < in; ++i) {
          gW[o * in + i] += d * a[i];
          next_delta[b * in + i] += W[o * in + i] * d;
        }
      }
    }
    if (l == 0) break;
    // Back through dropout and ReLU of the previous hidden layer.
    for (std::size_t k = 0; k < batch * in; ++k) {
      double d = next_delta[k];
      if (!masks[l - 1].empty()) d *= masks[l - 1][k];
      if (pre[l - 1][k] <= 0.0) d = 0.0;
      next_delta[k] = d;
    }
    delta.swap(next_delta);
  }
  return loss / static_cast<double>(batch);
}

int probability_label(double p) { return p >= 0.5 ? 1 : 0; }

std::vector<double> DnnModel::probabilities(const Matrix& m) const {
  auto z = net_.logits(m);
  for (double& v : z) v = sigmoid(v);
  return z;
}

LabelVector DnnModel::predict_rows(const Matrix& m) const {
  const auto p = probabilities(m);
  LabelVector out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = probability_label(p[i]);
  return out;
}

void DnnModel::save_body(std::ostream& out) const {
  out << "widths";
  for (int w : net_.widths()) out << ' ' << w;
  out << "\nparameters " << net_.parameter_count() << '\n';
  for (double v : net_.parameters()) out << v << '\n';
}

std::unique_ptr<DnnModel> train_dnn(const Matrix& x, const LabelVector& y, const Matrix& val_x,
                                    const LabelVector& val_y, const DnnParams& params,
                                    std::uint64_t seed) {
  const int input_dim = params.input_dim > 0 ? params.input_dim : static_cast<int>(x.cols());
  if (static_cast<std::size_t>(input_dim) != x.cols() || val_x.cols() != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "DNN input_dim " + std::to_string(input_dim) +
                                                  " does not match data width " + std::to_string(x.cols()));
  }
  if (val_x.rows() == 0 || val_x.rows() != val_y.size()) {
    throw Error(ErrorCode::InvalidArgument, "DNN validation set is empty or misaligned");
  }

  Rng init_rng(derive_seed(seed, kInitStream));
  Rng shuffle_rng(derive_seed(seed, kShuffleStream));
  Rng dropout_rng(derive_seed(seed, kDropoutStream));
  Mlp net(input_dim, params.hidden, init_rng);

  auto& theta = net.parameters();
  std::vector<double> m(theta.size(), 0.0), v(theta.size(), 0.0), grad;
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainingInfo info;
  std::vector<double> best_theta = theta;
  double best_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;
  long long step = 0;
  const auto batch = static_cast<std::size_t>(params.batch_size);

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const auto rows = std::span<const std::size_t>(order).subspan(start, std::min(batch, order.size() - start));
      net.loss_and_gradient(x, y, rows, grad, params.dropout > 0.0 ? &dropout_rng : nullptr, params.dropout);
      ++step;
      const double c1 = 1.0 - std::pow(params.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(params.beta2, static_cast<double>(step));
      for (std::size_t k = 0; k < theta.size(); ++k) {
        m[k] = params.beta1 * m[k] + (1.0 - params.beta1) * grad[k];
        v[k] = params.beta2 * v[k] + (1.0 - params.beta2) * grad[k] * grad[k];
        theta[k] *= 1.0 - params.learning_rate * params.weight_decay;
        theta[k] -= params.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + params.epsilon);
      }
    }
    const double val_loss = net.loss(val_x, val_y);
    info.validation_loss.push_back(val_loss);
    info.iterations = epoch + 1;
    if (val_loss < best_loss) {
      best_loss = val_loss;
      best_theta = theta;
      info.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= params.patience) {
      info.early_stopped = true;
      break;
    }
  }
  theta = best_theta;
  auto model = std::make_unique<DnnModel>(std::move(net));
  model->mutable_info() = std::move(info);
  return model;
}

}  // namespace pdvoice
