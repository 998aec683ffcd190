#include "hyda/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hyda {

namespace {

Matrix apply_activation(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::identity: return z;
    case Activation::tanh: return z.array().tanh().matrix();
    case Activation::relu: return z.array().max(0.0).matrix();
    case Activation::sigmoid: return (1.0 / (1.0 + (-z.array()).exp())).matrix();
  }
  return z;
}

// Derivative expressed through pre-activation z and activation value a.
Matrix activation_derivative(Activation act, const Matrix& z, const Matrix& a) {
  switch (act) {
    case Activation::identity: return Matrix::Ones(z.rows(), z.cols());
    case Activation::tanh: return (1.0 - a.array().square()).matrix();
    case Activation::relu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::sigmoid: return (a.array() * (1.0 - a.array())).matrix();
  }
  return Matrix::Ones(z.rows(), z.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream oss;
    oss << where << ": shapes disagree (" << a.rows() << "x" << a.cols() << " vs " << b.rows()
        << "x" << b.cols() << ")";
    throw ShapeError(oss.str());
  }
}

constexpr double kBceClamp = 1e-7;

}  // namespace

const char* to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  throw ConfigError("unknown activation: " + s);
}

Matrix xavier_init(Rng& rng, Index in_dim, Index out_dim) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  Matrix w(in_dim, out_dim);
  for (Index i = 0; i < in_dim; ++i)
    for (Index j = 0; j < out_dim; ++j) w(i, j) = -bound + 2.0 * bound * rng.next_uniform();
  return w;
}

void Mlp::add_layer(DenseLayer layer) {
  if (layer.weights.cols() != layer.bias.size())
    throw ShapeError("add_layer: bias length must equal weight columns");
  if (!layers_.empty() && layers_.back().out_dim() != layer.in_dim())
    throw ShapeError("add_layer: layer input dim must chain with previous output dim");
  layers_.push_back(std::move(layer));
  ++revision_;
}

Index Mlp::param_count() const {
  Index n = 0;
  for (const auto& l : layers_) n += l.param_count();
  return n;
}

std::vector<std::pair<Index, Index>> Mlp::param_layout() const {
  std::vector<std::pair<Index, Index>> layout;
  Index offset = 0;
  for (const auto& l : layers_) {
    layout.emplace_back(offset, l.param_count());
    offset += l.param_count();
  }
  return layout;
}

Vector Mlp::flat_params() const {
  Vector flat(param_count());
  Index at = 0;
  for (const auto& l : layers_) {
    // row-major weights: Eigen storage is already row-major here
    std::copy(l.weights.data(), l.weights.data() + l.weights.size(), flat.data() + at);
    at += l.weights.size();
    std::copy(l.bias.data(), l.bias.data() + l.bias.size(), flat.data() + at);
    at += l.bias.size();
  }
  return flat;
}

void Mlp::set_flat_params(const Vector& flat) {
  if (flat.size() != param_count())
    throw ShapeError("set_flat_params: flat size does not match parameter count");
  Index at = 0;
  for (auto& l : layers_) {
    std::copy(flat.data() + at, flat.data() + at + l.weights.size(), l.weights.data());
    at += l.weights.size();
    std::copy(flat.data() + at, flat.data() + at + l.bias.size(), l.bias.data());
    at += l.bias.size();
  }
  ++revision_;
}

void Mlp::add_scaled(const Vector& delta, double scale) {
  if (delta.size() != param_count())
    throw ShapeError("add_scaled: delta size does not match parameter count");
  Index at = 0;
  for (auto& l : layers_) {
    Eigen::Map<const Matrix> dw(delta.data() + at, l.weights.rows(), l.weights.cols());
    l.weights += scale * dw;
    at += l.weights.size();
    Eigen::Map<const Vector> db(delta.data() + at, l.bias.size());
    l.bias += scale * db;
    at += l.bias.size();
  }
  ++revision_;
}

std::uint64_t Mlp::params_checksum() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const auto& l : layers_) {
    h = checksum_bytes(l.weights.data(), sizeof(double) * static_cast<std::size_t>(l.weights.size()), h);
    h = checksum_bytes(l.bias.data(), sizeof(double) * static_cast<std::size_t>(l.bias.size()), h);
  }
  return h;
}

Matrix forward(const Mlp& mlp, const Matrix& batch, MlpCache* cache) {
  if (mlp.layer_count() == 0) throw ShapeError("forward: empty network");
  if (batch.cols() != mlp.input_dim()) {
    std::ostringstream oss;
    oss << "forward: batch has " << batch.cols() << " columns, network expects "
        << mlp.input_dim();
    throw ShapeError(oss.str());
  }
  if (cache) {
    cache->input = batch;
    cache->pre.clear();
    cache->post.clear();
    cache->pre.reserve(mlp.layers().size());
    cache->post.reserve(mlp.layers().size());
    cache->net = &mlp;
    cache->revision = mlp.revision();
  }
  Matrix a = batch;
  for (const auto& layer : mlp.layers()) {
    Matrix z = a * layer.weights;
    z.rowwise() += layer.bias.transpose();
    a = apply_activation(layer.activation, z);
    if (cache) {
      cache->pre.push_back(std::move(z));
      cache->post.push_back(a);
    }
  }
  return a;
}

Vector MlpGrads::flat() const {
  Index n = 0;
  for (std::size_t i = 0; i < weight_grads.size(); ++i)
    n += weight_grads[i].size() + bias_grads[i].size();
  Vector flat(n);
  Index at = 0;
  for (std::size_t i = 0; i < weight_grads.size(); ++i) {
    std::copy(weight_grads[i].data(), weight_grads[i].data() + weight_grads[i].size(),
              flat.data() + at);
    at += weight_grads[i].size();
    std::copy(bias_grads[i].data(), bias_grads[i].data() + bias_grads[i].size(), flat.data() + at);
    at += bias_grads[i].size();
  }
  return flat;
}

BackwardResult backward(const Mlp& mlp, const MlpCache& cache, const Matrix& upstream,
                        bool upstream_at_last_preactivation) {
  if (cache.net != &mlp || cache.revision != mlp.revision())
    throw ContractError("backward: cache is stale or belongs to a different network");
  const auto& layers = mlp.layers();
  if (cache.pre.size() != layers.size())
    throw ContractError("backward: cache depth does not match network");
  require_same_shape(upstream, cache.post.back(), "backward");

  BackwardResult out;
  out.grads.weight_grads.resize(layers.size());
  out.grads.bias_grads.resize(layers.size());

  Matrix delta;  // gradient at current layer's pre-activation
  for (Index l = static_cast<Index>(layers.size()) - 1; l >= 0; --l) {
    const auto& layer = layers[static_cast<std::size_t>(l)];
    const Matrix& z = cache.pre[static_cast<std::size_t>(l)];
    const Matrix& a = cache.post[static_cast<std::size_t>(l)];
    if (l == static_cast<Index>(layers.size()) - 1) {
      if (upstream_at_last_preactivation)
        delta = upstream;
      else
        delta = upstream.cwiseProduct(activation_derivative(layer.activation, z, a));
    } else {
      delta = delta.cwiseProduct(activation_derivative(layer.activation, z, a));
    }
    const Matrix& below =
        (l == 0) ? cache.input : cache.post[static_cast<std::size_t>(l - 1)];
    out.grads.weight_grads[static_cast<std::size_t>(l)] = below.transpose() * delta;
    out.grads.bias_grads[static_cast<std::size_t>(l)] = delta.colwise().sum().transpose();
    if (l > 0)
      delta = (delta * layer.weights.transpose()).eval();
    else
      out.input_grad = delta * layer.weights.transpose();
  }
  return out;
}

Mlp make_mlp(Rng& rng, const std::vector<Index>& dims, Activation hidden, Activation output) {
  if (dims.size() < 2) throw ConfigError("make_mlp: need at least input and output dims");
  Mlp mlp;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    DenseLayer layer;
    layer.weights = xavier_init(rng, dims[i], dims[i + 1]);
    layer.bias = Vector::Zero(dims[i + 1]);
    layer.activation = (i + 2 == dims.size()) ? output : hidden;
    mlp.add_layer(std::move(layer));
  }
  return mlp;
}

const char* to_string(LossKind k) { return k == LossKind::mse ? "mse" : "bce"; }

std::pair<double, Matrix> loss_value_and_grad(const Loss& loss, const Matrix& pred,
                                              const Matrix& target) {
  require_same_shape(pred, target, "loss_value_and_grad");
  const double n = static_cast<double>(pred.size());
  switch (loss.kind) {
    case LossKind::mse: {
      const Matrix diff = pred - target;
      const double value = diff.array().square().sum() / n;
      Matrix grad = (2.0 / n) * diff;
      return {value, std::move(grad)};
    }
    case LossKind::bce: {
      const Eigen::ArrayXXd p =
          pred.array().min(1.0 - kBceClamp).max(kBceClamp);
      const Eigen::ArrayXXd t = target.array();
      const double value = -((t * p.log()) + (1.0 - t) * (1.0 - p).log()).sum() / n;
      Matrix grad = (((p - t) / (p * (1.0 - p))) / n).matrix();
      return {value, std::move(grad)};
    }
  }
  throw ConfigError("loss_value_and_grad: unknown loss kind");
}

Metric make_metric(MetricKind kind) {
  Metric m;
  m.kind = kind;
  m.orientation =
      kind == MetricKind::auc ? Orientation::higher_is_better : Orientation::lower_is_better;
  return m;
}

const char* to_string(MetricKind k) {
  switch (k) {
    case MetricKind::mae: return "mae";
    case MetricKind::mse: return "mse";
    case MetricKind::auc: return "auc";
  }
  return "mae";
}

MetricKind metric_kind_from_string(const std::string& s) {
  if (s == "mae") return MetricKind::mae;
  if (s == "mse") return MetricKind::mse;
  if (s == "auc") return MetricKind::auc;
  throw ConfigError("unknown metric: " + s);
}

namespace {

// Mann-Whitney AUC with average ranks for ties. Sums of ranks are exact in
// doubles (integers and halves), so this agrees bit-for-bit with the O(n^2)
// pairwise count.
double auc_value(const Matrix& pred, const Matrix& target) {
  const Index n = pred.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const double* s = pred.data();
  const double* t = target.data();
  for (Index i = 0; i < n; ++i) {
    if (t[i] != 0.0 && t[i] != 1.0)
      throw MetricError("auc: targets must be 0 or 1");
  }
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return s[a] < s[b]; });

  double rank_sum_pos = 0.0;
  Index n_pos = 0;
  Index i = 0;
  while (i < n) {
    Index j = i;
    while (j < n && s[order[static_cast<std::size_t>(j)]] == s[order[static_cast<std::size_t>(i)]]) ++j;
    // 1-based ranks i+1..j share the average rank
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (Index k = i; k < j; ++k) {
      const Index idx = order[static_cast<std::size_t>(k)];
      if (t[idx] == 1.0) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const Index n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw MetricError("auc: degenerate target (needs both classes present)");
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace

double metric_value(const Metric& metric, const Matrix& pred, const Matrix& target) {
  require_same_shape(pred, target, "metric_value");
  const double n = static_cast<double>(pred.size());
  switch (metric.kind) {
    case MetricKind::mae: return (pred - target).array().abs().sum() / n;
    case MetricKind::mse: return (pred - target).array().square().sum() / n;
    case MetricKind::auc: return auc_value(pred, target);
  }
  throw ConfigError("metric_value: unknown metric kind");
}

}  // namespace hyda
