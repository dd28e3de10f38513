#include "pdvoice/logistic_regression.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <ostream>

namespace pdvoice {
namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double LogisticRegressionModel::decision_value(std::span<const double> x) const {
  return dot(weights_, x) + intercept_;
}

LabelVector LogisticRegressionModel::predict_rows(const Matrix& m) const {
  LabelVector out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = decision_value(m.row(r)) >= 0.0 ? 1 : 0;
  return out;
}

void LogisticRegressionModel::save_body(std::ostream& out) const {
  out << "intercept " << intercept_ << "\nweights";
  for (double w : weights_) out << ' ' << w;
  out << '\n';
}

double logistic_objective(std::span<const double> params, const Matrix& x, const LabelVector& y,
                          double C, std::vector<double>* gradient) {
  const std::size_t d = x.cols();
  const auto w = params.first(d);
  const double b = params[d];
  double value = 0.5 * dot(w, w);
  if (gradient) {
    gradient->assign(d + 1, 0.0);
    for (std::size_t j = 0; j < d; ++j) (*gradient)[j] = w[j];
  }
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    const double s = y[i] == 1 ? 1.0 : -1.0;
    const double z = dot(w, row) + b;
    value += C * softplus(-s * z);
    if (gradient) {
      // d/dz softplus(-s z) = -s * sigmoid(-s z)
      const double g = -C * s * sigmoid(-s * z);
      for (std::size_t j = 0; j < d; ++j) (*gradient)[j] += g * row[j];
      (*gradient)[d] += g;
    }
  }
  return value;
}

std::unique_ptr<LogisticRegressionModel> train_logreg(const Matrix& x, const LabelVector& y,
                                                      const LogRegParams& params) {
  const std::size_t n_params = x.cols() + 1;
  std::vector<double> theta(n_params, 0.0), grad, next(n_params), next_grad;
  double value = logistic_objective(theta, x, y, params.C, &grad);

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> memory;
  std::vector<double> direction(n_params);
  std::vector<double> alpha(static_cast<std::size_t>(params.history));

  int iter = 0;
  bool converged = max_abs(grad) <= params.tolerance;
  while (!converged && iter < params.max_iter) {
    ++iter;
    // Two-loop recursion: direction = -H * grad.
    direction = grad;
    for (std::size_t k = memory.size(); k-- > 0;) {
      alpha[k] = memory[k].rho * dot(memory[k].s, direction);
      for (std::size_t j = 0; j < n_params; ++j) direction[j] -= alpha[k] * memory[k].y[j];
    }
    double h0 = 1.0;
    if (!memory.empty()) {
      const auto& last = memory.back();
      h0 = dot(last.s, last.y) / dot(last.y, last.y);
    } else {
      h0 = 1.0 / std::max(1.0, std::sqrt(dot(grad, grad)));
    }
    for (double& v : direction) v *= h0;
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const double beta = memory[k].rho * dot(memory[k].y, direction);
      for (std::size_t j = 0; j < n_params; ++j) direction[j] += (alpha[k] - beta) * memory[k].s[j];
    }
    for (double& v : direction) v = -v;

    double slope = dot(grad, direction);
    if (slope >= 0.0) {
      // Not a descent direction; fall back to steepest descent.
      memory.clear();
      for (std::size_t j = 0; j < n_params; ++j) direction[j] = -grad[j];
      slope = -dot(grad, grad);
    }

    double step = 1.0;
    double next_value = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < n_params; ++j) next[j] = theta[j] + step * direction[j];
      next_value = logistic_objective(next, x, y, params.C, &next_grad);
      if (next_value <= value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    Pair pair{std::vector<double>(n_params), std::vector<double>(n_params), 0.0};
    for (std::size_t j = 0; j < n_params; ++j) {
      pair.s[j] = next[j] - theta[j];
      pair.y[j] = next_grad[j] - grad[j];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 1e-12 * std::sqrt(dot(pair.y, pair.y)) * std::sqrt(dot(pair.s, pair.s))) {
      pair.rho = 1.0 / sy;
      memory.push_back(std::move(pair));
      if (memory.size() > static_cast<std::size_t>(params.history)) memory.pop_front();
    }
    theta.swap(next);
    grad.swap(next_grad);
    value = next_value;
    converged = max_abs(grad) <= params.tolerance;
  }

  const double intercept = theta.back();
  theta.pop_back();
  auto model = std::make_unique<LogisticRegressionModel>(std::move(theta), intercept);
  model->mutable_info().iterations = iter;
  model->mutable_info().converged = converged;
  return model;
}

}  // namespace pdvoice
