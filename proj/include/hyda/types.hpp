// hyda/types.hpp — dense type aliases and the error taxonomy shared by all modules.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hyda {

using Index = Eigen::Index;

// Everything numeric runs on 64-bit floats: the per-step metric gains are
// small differences of metric values and would drown in float32 rounding.
template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

// Dimension disagreement between operands.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain (negative variance, bad fraction).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// An API precondition was broken (stale cache, snapshot/net mismatch).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// A metric cannot be evaluated on the given data (e.g. single-class AUC).
struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A weighting strategy could not complete its step.
struct StrategyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent run configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input data (CSV parse failures, schema violations).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training aborted (non-finite loss, degenerate metric mid-run).
struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hyda
