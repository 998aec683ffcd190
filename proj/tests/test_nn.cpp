#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hyda/nn.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace hyda;
using hyda::testing::finite_difference_grad;
using hyda::testing::finite_difference_wrt;
using hyda::testing::max_relative_error;
using hyda::testing::naive_forward;
using hyda::testing::pairwise_auc;

namespace {

Mlp random_mlp(std::uint64_t seed, const std::vector<Index>& dims, Activation hidden,
               Activation output) {
  Rng rng(seed);
  return make_mlp(rng, dims, hidden, output);
}

}  // namespace

TEST_CASE("forward zero parameters identity activation gives zeros") {
  Mlp mlp;
  DenseLayer l;
  l.weights = Matrix::Zero(3, 2);
  l.bias = Vector::Zero(2);
  l.activation = Activation::identity;
  mlp.add_layer(l);
  Rng rng(1);
  const Matrix batch = gaussian_matrix(rng, 5, 3, 0.0, 1.0);
  CHECK(forward(mlp, batch) == Matrix::Zero(5, 2));
}

TEST_CASE("forward single tanh unit at zero input") {
  Mlp mlp;
  DenseLayer l;
  l.weights = Matrix::Ones(1, 1);
  l.bias = Vector::Zero(1);
  l.activation = Activation::tanh;
  mlp.add_layer(l);
  Matrix x(1, 1);
  x << 0.0;
  CHECK(forward(mlp, x)(0, 0) == 0.0);
}

TEST_CASE("forward matches straight-line oracle") {
  Mlp mlp = random_mlp(7, {4, 6, 3}, Activation::tanh, Activation::identity);
  Rng rng(8);
  const Matrix batch = gaussian_matrix(rng, 9, 4, 0.0, 1.0);
  const Matrix fast = forward(mlp, batch);
  const Matrix slow = naive_forward(mlp, batch);
  CHECK((fast - slow).array().abs().maxCoeff() < 1e-12);
}

TEST_CASE("forward shape error") {
  Mlp mlp = random_mlp(7, {4, 3}, Activation::relu, Activation::identity);
  CHECK_THROWS_AS(forward(mlp, Matrix::Zero(2, 5)), ShapeError);
}

TEST_CASE("backward zero upstream gives zero gradients") {
  Mlp mlp = random_mlp(3, {3, 5, 2}, Activation::sigmoid, Activation::identity);
  Rng rng(4);
  const Matrix batch = gaussian_matrix(rng, 6, 3, 0.0, 1.0);
  MlpCache cache;
  forward(mlp, batch, &cache);
  const BackwardResult res = backward(mlp, cache, Matrix::Zero(6, 2));
  CHECK(res.grads.flat().isZero(0.0));
  CHECK(res.input_grad.isZero(0.0));
}

TEST_CASE("backward identity single layer closed form") {
  Mlp mlp = random_mlp(5, {3, 2}, Activation::identity, Activation::identity);
  Rng rng(6);
  const Matrix batch = gaussian_matrix(rng, 4, 3, 0.0, 1.0);
  const Matrix upstream = gaussian_matrix(rng, 4, 2, 0.0, 1.0);
  MlpCache cache;
  forward(mlp, batch, &cache);
  const BackwardResult res = backward(mlp, cache, upstream);
  CHECK((res.grads.weight_grads[0] - batch.transpose() * upstream).isZero(0.0));
}

TEST_CASE("backward stale cache rejected") {
  Mlp mlp = random_mlp(5, {3, 2}, Activation::tanh, Activation::identity);
  Rng rng(6);
  const Matrix batch = gaussian_matrix(rng, 4, 3, 0.0, 1.0);
  MlpCache cache;
  forward(mlp, batch, &cache);
  mlp.add_scaled(Vector::Ones(mlp.param_count()), 0.001);  // mutate
  CHECK_THROWS_AS(backward(mlp, cache, Matrix::Zero(4, 2)), ContractError);
}

// The gradient-check suite: every coordinate of the analytic gradient against
// central finite differences at h = 1e-5 for each loss and activation mix.
TEST_CASE("backward matches finite differences on 3-layer nets") {
  struct Case {
    Activation hidden;
    Activation output;
    LossKind loss;
    std::uint64_t seed;
  };
  const Case cases[] = {
      {Activation::tanh, Activation::identity, LossKind::mse, 21},
      {Activation::sigmoid, Activation::identity, LossKind::mse, 22},
      {Activation::relu, Activation::identity, LossKind::mse, 23},
      {Activation::tanh, Activation::sigmoid, LossKind::bce, 24},
  };
  for (const Case& c : cases) {
    CAPTURE(static_cast<int>(c.hidden));
    CAPTURE(static_cast<int>(c.loss));
    Mlp mlp = random_mlp(c.seed, {4, 7, 6, 3}, c.hidden, c.output);
    Rng rng(c.seed + 100);
    const Matrix batch = gaussian_matrix(rng, 5, 4, 0.0, 1.0);
    Matrix target;
    if (c.loss == LossKind::bce) {
      target = Matrix::Zero(5, 3);
      for (Index i = 0; i < target.size(); ++i) target.data()[i] = rng.next_uniform() < 0.5 ? 0.0 : 1.0;
    } else {
      target = gaussian_matrix(rng, 5, 3, 0.0, 1.0);
    }
    const Loss loss{c.loss};

    MlpCache cache;
    const Matrix pred = forward(mlp, batch, &cache);
    auto [value, loss_grad] = loss_value_and_grad(loss, pred, target);
    (void)value;
    const BackwardResult res = backward(mlp, cache, loss_grad);

    const Vector numeric = finite_difference_grad(
        mlp, [&] { return loss_value_and_grad(loss, forward(mlp, batch), target).first; }, 1e-5);
    CHECK(max_relative_error(res.grads.flat(), numeric, 1e-6) < 1e-4);
  }
}

TEST_CASE("mse loss on equal pred and target") {
  Matrix p(2, 2), t(2, 2);
  p << 1, 2, 3, 4;
  t = p;
  auto [value, grad] = loss_value_and_grad(Loss{LossKind::mse}, p, t);
  CHECK(value == 0.0);
  CHECK(grad.isZero(0.0));
}

TEST_CASE("mse loss closed form single element") {
  Matrix p(1, 1), t(1, 1);
  p << 2.0;
  t << 0.0;
  auto [value, grad] = loss_value_and_grad(Loss{LossKind::mse}, p, t);
  CHECK(value == 4.0);
  CHECK(grad(0, 0) == 4.0);
}

TEST_CASE("mse averages over batch and output dims") {
  Matrix p = Matrix::Constant(4, 5, 2.0);
  Matrix t = Matrix::Zero(4, 5);
  auto [value, grad] = loss_value_and_grad(Loss{LossKind::mse}, p, t);
  CHECK(value == 4.0);  // independent of shape
  CHECK(grad(0, 0) == doctest::Approx(2.0 * 2.0 / 20.0));
}

TEST_CASE("bce gradient matches finite differences") {
  Rng rng(33);
  Matrix p(3, 2);
  for (Index i = 0; i < p.size(); ++i) p.data()[i] = 0.05 + 0.9 * rng.next_uniform();
  Matrix t(3, 2);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = rng.next_uniform() < 0.5 ? 0.0 : 1.0;
  const Loss loss{LossKind::bce};
  auto [value, grad] = loss_value_and_grad(loss, p, t);
  CHECK(value >= 0.0);
  const Matrix numeric = finite_difference_wrt(
      p, [&](const Matrix& m) { return loss_value_and_grad(loss, m, t).first; }, 1e-7);
  for (Index i = 0; i < grad.size(); ++i) {
    const double denom = std::max(std::abs(grad.data()[i]), 1e-6);
    CHECK(std::abs(grad.data()[i] - numeric.data()[i]) / denom < 1e-4);
  }
}

TEST_CASE("bce clamps saturated probabilities") {
  Matrix p(1, 2), t(1, 2);
  p << 0.0, 1.0;  // would be infinite loss unclamped
  t << 1.0, 0.0;
  auto [value, grad] = loss_value_and_grad(Loss{LossKind::bce}, p, t);
  CHECK(std::isfinite(value));
  CHECK(hyda::all_finite(grad));
}

TEST_CASE("auc perfect ranking") {
  Matrix s(1, 2), t(1, 2);
  s << 0.1, 0.9;
  t << 0.0, 1.0;
  CHECK(metric_value(make_metric(MetricKind::auc), s, t) == 1.0);
}

TEST_CASE("auc all-equal predictions on balanced labels") {
  Matrix s = Matrix::Constant(1, 10, 0.7);
  Matrix t(1, 10);
  for (Index i = 0; i < 10; ++i) t(0, i) = i < 5 ? 0.0 : 1.0;
  CHECK(metric_value(make_metric(MetricKind::auc), s, t) == 0.5);
}

TEST_CASE("auc equals pairwise oracle exactly") {
  Rng rng(55);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 50;
    Matrix s(1, n), t(1, n);
    bool has_pos = false, has_neg = false;
    for (Index i = 0; i < n; ++i) {
      // quantize scores so ties actually occur
      s(0, i) = std::floor(rng.next_uniform() * 8.0) / 8.0;
      t(0, i) = rng.next_uniform() < 0.4 ? 1.0 : 0.0;
      (t(0, i) == 1.0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    CHECK(metric_value(make_metric(MetricKind::auc), s, t) == pairwise_auc(s, t));
  }
}

TEST_CASE("auc rejects single-class targets") {
  Matrix s(1, 4), t(1, 4);
  s << 0.1, 0.2, 0.3, 0.4;
  t << 1, 1, 1, 1;
  CHECK_THROWS_AS(metric_value(make_metric(MetricKind::auc), s, t), MetricError);
}

TEST_CASE("auc invariant under strictly monotone score transforms") {
  Rng rng(66);
  const Index n = 60;
  Matrix s(1, n), t(1, n);
  for (Index i = 0; i < n; ++i) {
    s(0, i) = rng.next_gaussian(0.0, 1.0);
    t(0, i) = i % 3 == 0 ? 1.0 : 0.0;
  }
  const Metric auc = make_metric(MetricKind::auc);
  const double base = metric_value(auc, s, t);
  const Matrix warped1 = (s.array() * 3.0 + 11.0).matrix();
  const Matrix warped2 = s.array().exp().matrix();
  const Matrix warped3 = s.array().atan().matrix();
  CHECK(metric_value(auc, warped1, t) == base);
  CHECK(metric_value(auc, warped2, t) == base);
  CHECK(metric_value(auc, warped3, t) == base);
}

TEST_CASE("mae and mse metric values") {
  Matrix p(1, 4), t(1, 4);
  p << 1, 2, 3, 4;
  t << 0, 0, 0, 0;
  CHECK(metric_value(make_metric(MetricKind::mae), p, t) == doctest::Approx(2.5));
  CHECK(metric_value(make_metric(MetricKind::mse), p, t) == doctest::Approx(7.5));
}

// Orientation is the single source of sign truth downstream: a gain computed
// as sign * (new - old) must be positive exactly when the metric improved.
TEST_CASE("metric orientation marks improvement for mae and auc") {
  Matrix t(1, 4);
  t << 0, 0, 1, 1;
  Matrix good(1, 4), bad(1, 4);
  good << 0.1, 0.2, 0.8, 0.9;
  bad << 0.9, 0.8, 0.2, 0.1;

  const Metric mae = make_metric(MetricKind::mae);
  CHECK(mae.orientation == Orientation::lower_is_better);
  const double mae_gain =
      mae.orientation_sign() * (metric_value(mae, good, t) - metric_value(mae, bad, t));
  CHECK(mae_gain > 0.0);

  const Metric auc = make_metric(MetricKind::auc);
  CHECK(auc.orientation == Orientation::higher_is_better);
  const double auc_gain =
      auc.orientation_sign() * (metric_value(auc, good, t) - metric_value(auc, bad, t));
  CHECK(auc_gain > 0.0);
}

TEST_CASE("xavier bounds and determinism") {
  Rng rng(77);
  const Matrix w = xavier_init(rng, 50, 200);
  const double bound = std::sqrt(6.0 / 250.0);
  CHECK(w.maxCoeff() <= bound);
  CHECK(w.minCoeff() >= -bound);

  Rng a(12), b(12);
  CHECK(xavier_init(a, 8, 8) == xavier_init(b, 8, 8));

  Rng c(5);
  const Matrix one = xavier_init(c, 1, 1);
  CHECK(std::abs(one(0, 0)) <= std::sqrt(3.0));
}

TEST_CASE("parameter flattening round-trips") {
  Mlp mlp = random_mlp(31, {3, 4, 2}, Activation::tanh, Activation::identity);
  const Vector flat = mlp.flat_params();
  CHECK(flat.size() == mlp.param_count());
  Mlp other = random_mlp(32, {3, 4, 2}, Activation::tanh, Activation::identity);
  other.set_flat_params(flat);
  CHECK(other.params_checksum() == mlp.params_checksum());
}
