// Shared test-only oracles: naive reference implementations kept independent
// of the library's computation paths.
#pragma once

#include "hyda/multitask.hpp"
#include "hyda/nn.hpp"
#include "hyda/types.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace hyda::testing {

// Triple-loop matrix product.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c = Matrix::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index k = 0; k < a.cols(); ++k)
      for (Index j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
  return c;
}

// Straight-line MLP forward, no caching, elementwise activation loops.
inline Matrix naive_forward(const Mlp& mlp, const Matrix& batch) {
  Matrix a = batch;
  for (const auto& layer : mlp.layers()) {
    Matrix z = naive_matmul(a, layer.weights);
    for (Index i = 0; i < z.rows(); ++i)
      for (Index j = 0; j < z.cols(); ++j) {
        double v = z(i, j) + layer.bias(j);
        switch (layer.activation) {
          case Activation::identity: break;
          case Activation::tanh: v = std::tanh(v); break;
          case Activation::relu: v = v > 0.0 ? v : 0.0; break;
          case Activation::sigmoid: v = 1.0 / (1.0 + std::exp(-v)); break;
        }
        z(i, j) = v;
      }
    a = std::move(z);
  }
  return a;
}

// Central finite differences of a scalar function of the flat parameters.
inline Vector finite_difference_grad(Mlp& mlp, const std::function<double()>& f, double h = 1e-5) {
  Vector params = mlp.flat_params();
  Vector grad(params.size());
  for (Index i = 0; i < params.size(); ++i) {
    Vector p = params;
    p(i) = params(i) + h;
    mlp.set_flat_params(p);
    const double up = f();
    p(i) = params(i) - h;
    mlp.set_flat_params(p);
    const double down = f();
    grad(i) = (up - down) / (2.0 * h);
  }
  mlp.set_flat_params(params);
  return grad;
}

// Central finite differences with respect to an arbitrary matrix argument.
inline Matrix finite_difference_wrt(Matrix m, const std::function<double(const Matrix&)>& f,
                                    double h = 1e-6) {
  Matrix grad(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      const double orig = m(i, j);
      m(i, j) = orig + h;
      const double up = f(m);
      m(i, j) = orig - h;
      const double down = f(m);
      m(i, j) = orig;
      grad(i, j) = (up - down) / (2.0 * h);
    }
  return grad;
}

// Pairwise O(n^2) AUC: concordant pairs count 1, ties 1/2.
inline double pairwise_auc(const Matrix& scores, const Matrix& labels) {
  double credit = 0.0;
  long n_pos = 0, n_neg = 0;
  for (Index i = 0; i < scores.size(); ++i) {
    if (labels.data()[i] == 1.0) ++n_pos;
    else ++n_neg;
  }
  for (Index i = 0; i < scores.size(); ++i) {
    if (labels.data()[i] != 1.0) continue;
    for (Index j = 0; j < scores.size(); ++j) {
      if (labels.data()[j] != 0.0) continue;
      if (scores.data()[i] > scores.data()[j]) credit += 1.0;
      else if (scores.data()[i] == scores.data()[j]) credit += 0.5;
    }
  }
  return credit / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline double max_relative_error(const Vector& a, const Vector& b, double denom_floor = 1e-8) {
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a(i)), std::abs(b(i)), denom_floor});
    worst = std::max(worst, std::abs(a(i) - b(i)) / denom);
  }
  return worst;
}

}  // namespace hyda::testing
