// hyda/nn.hpp — dense feed-forward layers with hand-derived backpropagation,
// losses, and evaluation metrics.
//
// Parameter flattening order (used by every flat view, checkpoint and
// gradient bundle): layer 0 weights row-major, layer 0 bias, layer 1
// weights, layer 1 bias, ...
#pragma once

#include "hyda/rng.hpp"
#include "hyda/tensor.hpp"
#include "hyda/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hyda {

enum class Activation { identity, tanh, relu, sigmoid };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
  Matrix weights;  // in x out
  Vector bias;     // out
  Activation activation = Activation::identity;

  Index in_dim() const { return weights.rows(); }
  Index out_dim() const { return weights.cols(); }
  Index param_count() const { return weights.size() + bias.size(); }
};

// Weights ~ U(-b, b) with b = sqrt(6 / (in + out)).
Matrix xavier_init(Rng& rng, Index in_dim, Index out_dim);

class Mlp {
 public:
  Mlp() = default;

  void add_layer(DenseLayer layer);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  Index layer_count() const { return static_cast<Index>(layers_.size()); }
  Index input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
  Index output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }
  Index param_count() const;

  // (offset, count) of each layer's slice in the flat parameter vector,
  // weights and bias together.
  std::vector<std::pair<Index, Index>> param_layout() const;

  Vector flat_params() const;
  void set_flat_params(const Vector& flat);
  // params += scale * delta (flattening order above).
  void add_scaled(const Vector& delta, double scale);

  // Bumped on every parameter mutation; forward caches record it so a
  // backward pass against mutated parameters is rejected.
  std::uint64_t revision() const { return revision_; }

  std::uint64_t params_checksum() const;

 private:
  std::vector<DenseLayer> layers_;
  std::uint64_t revision_ = 0;
};

// Everything backward() needs: the input batch plus per-layer pre-activations
// and activations recorded by forward().
struct MlpCache {
  Matrix input;
  std::vector<Matrix> pre;   // Z_l = A_{l-1} W_l + b_l
  std::vector<Matrix> post;  // A_l = act(Z_l)
  const Mlp* net = nullptr;
  std::uint64_t revision = 0;
};

// Rows of `batch` are samples. Fills `cache` when given.
Matrix forward(const Mlp& mlp, const Matrix& batch, MlpCache* cache = nullptr);

struct MlpGrads {
  std::vector<Matrix> weight_grads;
  std::vector<Vector> bias_grads;

  Vector flat() const;
};

struct BackwardResult {
  MlpGrads grads;
  Matrix input_grad;
};

// upstream is dLoss/dOutput (same shape as forward's output). When
// upstream_at_last_preactivation is set, upstream is instead the gradient at
// the last layer's pre-activation and that layer's activation derivative is
// skipped — the hook for the fused sigmoid+BCE unit.
BackwardResult backward(const Mlp& mlp, const MlpCache& cache, const Matrix& upstream,
                        bool upstream_at_last_preactivation = false);

// Convenience constructor: dims = {in, h1, ..., out}; hidden layers use
// `hidden`, the last layer `output`. Weights Xavier, biases zero.
Mlp make_mlp(Rng& rng, const std::vector<Index>& dims, Activation hidden, Activation output);

enum class LossKind { mse, bce };

struct Loss {
  LossKind kind = LossKind::mse;
};

const char* to_string(LossKind k);

// value >= 0 and grad = d(value)/d(pred). MSE averages over batch rows and
// output columns so the loss scale does not depend on the output width. BCE
// clamps probabilities to [1e-7, 1 - 1e-7] first.
std::pair<double, Matrix> loss_value_and_grad(const Loss& loss, const Matrix& pred,
                                              const Matrix& target);

enum class MetricKind { mae, mse, auc };
enum class Orientation { higher_is_better, lower_is_better };

struct Metric {
  MetricKind kind = MetricKind::mae;
  Orientation orientation = Orientation::lower_is_better;

  // +1 when an increase in the raw value is an improvement, else -1. The
  // single source of sign truth for every gain computed downstream.
  double orientation_sign() const {
    return orientation == Orientation::higher_is_better ? 1.0 : -1.0;
  }
};

Metric make_metric(MetricKind kind);
const char* to_string(MetricKind k);
MetricKind metric_kind_from_string(const std::string& s);

// mae/mse average over all entries. auc ranks the flattened scores with
// average-rank (Mann-Whitney) tie handling; targets must be {0,1} with both
// classes present, else MetricError.
double metric_value(const Metric& metric, const Matrix& pred, const Matrix& target);

}  // namespace hyda
