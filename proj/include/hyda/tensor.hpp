// hyda/tensor.hpp — free-function linear algebra helpers over the Eigen types.
#pragma once

#include "hyda/rng.hpp"
#include "hyda/types.hpp"

#include <cstring>
#include <sstream>
#include <string>

namespace hyda {

// Checked matrix product.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream oss;
    oss << "matmul: inner dimensions disagree (" << a.rows() << "x" << a.cols()
        << " times " << b.rows() << "x" << b.cols() << ")";
    throw ShapeError(oss.str());
  }
  return a * b;
}

// Euclidean norm of any dense expression.
template <class Derived>
double l2_norm(const Eigen::MatrixBase<Derived>& v) {
  return std::sqrt(v.derived().array().square().sum());
}

// Matrix with i.i.d. N(mean, variance) entries, filled in row-major order so
// the draw sequence is reproducible from the documented Rng transform alone.
inline Matrix gaussian_matrix(Rng& rng, Index rows, Index cols, double mean, double variance) {
  if (variance < 0.0) throw DomainError("gaussian_matrix: variance must be non-negative");
  const double stddev = std::sqrt(variance);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian(mean, stddev);
  return m;
}

// FNV-1a over the raw little-endian bytes; used for bit-exactness checks
// (parameter trajectories, dataset fairness, snapshot round-trips).
inline std::uint64_t checksum_bytes(const void* data, std::size_t n, std::uint64_t h = 0xCBF29CE484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

template <class Derived>
std::uint64_t checksum(const Eigen::MatrixBase<Derived>& m, std::uint64_t h = 0xCBF29CE484222325ULL) {
  const Eigen::Matrix<double, Eigen::Dynamic, 1> flat =
      m.derived().template cast<double>().reshaped();
  return checksum_bytes(flat.data(), sizeof(double) * static_cast<std::size_t>(flat.size()), h);
}

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.derived().array().isFinite().all();
}

}  // namespace hyda
