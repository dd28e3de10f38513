#include "pdvoice/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace pdvoice {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}

constexpr double kTau = 1e-12;

}  // namespace

double scale_gamma(const Matrix& x) {
  const auto& v = x.data();
  if (v.empty()) return 1.0;
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double e : v) var += (e - mean) * (e - mean);
  var /= static_cast<double>(v.size());
  return var > 0.0 ? 1.0 / (static_cast<double>(x.cols()) * var) : 1.0;
}

double SvmModel::decision_value(std::span<const double> x) const {
  double f = bias_;
  for (std::size_t i = 0; i < support_.rows(); ++i) {
    f += signed_alpha_[i] * std::exp(-gamma_ * squared_distance(support_.row(i), x));
  }
  return f;
}

LabelVector SvmModel::predict_rows(const Matrix& m) const {
  LabelVector out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = decision_value(m.row(r)) >= 0.0 ? 1 : 0;
  return out;
}

void SvmModel::save_body(std::ostream& out) const {
  out << "gamma " << gamma_ << "\nbias " << bias_ << "\nsupport_vectors " << support_.rows() << '\n';
  for (std::size_t i = 0; i < support_.rows(); ++i) {
    out << signed_alpha_[i];
    for (double v : support_.row(i)) out << ' ' << v;
    out << '\n';
  }
}

std::unique_ptr<SvmModel> train_svm_smo(const Matrix& x, const LabelVector& labels,
                                        const SvmParams& params) {
  const std::size_t n = x.rows();
  const double C = params.C;
  const double gamma = params.gamma.value_or(scale_gamma(x));

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == 1 ? 1.0 : -1.0;

  std::vector<double> kernel(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    kernel[i * n + i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double k = std::exp(-gamma * squared_distance(x.row(i), x.row(j)));
      kernel[i * n + j] = k;
      kernel[j * n + i] = k;
    }
  }
  auto K = [&](std::size_t i, std::size_t j) { return kernel[i * n + j]; };

  std::vector<double> alpha(n, 0.0);
  // Gradient of 0.5 a'Qa - e'a with Q_ij = y_i y_j K_ij.
  std::vector<double> grad(n, -1.0);

  auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0); };
  auto in_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C); };

  const long long max_iter = static_cast<long long>(params.max_passes) * static_cast<long long>(n);
  long long iter = 0;
  bool converged = false;
  while (iter < max_iter) {
    // Working set selection, second-order rule.
    double g_max = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] >= g_max) {
        g_max = -y[t] * grad[t];
        i = t;
      }
    }
    double g_min = std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    if (i < n) {
      for (std::size_t t = 0; t < n; ++t) {
        if (!in_low(t)) continue;
        const double v = -y[t] * grad[t];
        g_min = std::min(g_min, v);
        const double b = g_max - v;
        if (b > 0.0) {
          double a = K(i, i) + K(t, t) - 2.0 * K(i, t);
          if (a <= 0.0) a = kTau;
          const double obj = -(b * b) / a;
          if (obj <= best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      }
    }
    if (i == n || j == n || g_max - g_min < params.tolerance) {
      converged = true;
      break;
    }
    ++iter;

    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    const double Qii = K(i, i), Qjj = K(j, j), Kij = K(i, j);
    if (y[i] != y[j]) {
      double quad = Qii + Qjj - 2.0 * Kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
      } else {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
      }
    } else {
      double quad = Qii + Qjj - 2.0 * Kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > C) {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }

    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * K(t, i) * dai + y[j] * K(t, j) * daj);
    }
  }

  // Bias from free vectors when any exist, else the midpoint of the
  // feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  int free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / free_count : (ub + lb) / 2.0;

  Matrix support(0, x.cols());
  std::vector<double> signed_alpha;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      support.append_row(x.row(t));
      signed_alpha.push_back(alpha[t] * y[t]);
    }
  }
  std::vector<int> signs(n);
  for (std::size_t t = 0; t < n; ++t) signs[t] = y[t] > 0 ? 1 : -1;
  auto model = std::make_unique<SvmModel>(std::move(support), std::move(signed_alpha), -rho, gamma,
                                          std::move(alpha), std::move(signs));
  model->mutable_info().iterations = static_cast<int>(std::min<long long>(iter, std::numeric_limits<int>::max()));
  model->mutable_info().converged = converged;
  return model;
}

}  // namespace pdvoice
