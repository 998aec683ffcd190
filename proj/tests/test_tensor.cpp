#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hyda/rng.hpp"
#include "hyda/tensor.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace hyda;

TEST_CASE("matmul identity") {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  const Matrix r = matmul(Matrix::Identity(2, 2), m);
  CHECK(r == m);
}

TEST_CASE("matmul hand arithmetic") {
  Matrix a(1, 2), b(2, 1);
  a << 1, 2;
  b << 3, 4;
  const Matrix r = matmul(a, b);
  CHECK(r.rows() == 1);
  CHECK(r.cols() == 1);
  CHECK(r(0, 0) == 11.0);
}

TEST_CASE("matmul matches triple-loop oracle") {
  Rng rng(42);
  const Matrix a = gaussian_matrix(rng, 7, 5, 0.0, 1.0);
  const Matrix b = gaussian_matrix(rng, 5, 3, 0.0, 1.0);
  const Matrix fast = matmul(a, b);
  const Matrix slow = hyda::testing::naive_matmul(a, b);
  CHECK((fast - slow).array().abs().maxCoeff() < 1e-12);
}

TEST_CASE("matmul shape error") {
  CHECK_THROWS_AS(matmul(Matrix::Zero(2, 3), Matrix::Zero(2, 3)), ShapeError);
}

TEST_CASE("matmul associativity within 1e-9 relative") {
  Rng rng(7);
  const Matrix a = gaussian_matrix(rng, 6, 4, 0.0, 1.0);
  const Matrix b = gaussian_matrix(rng, 4, 8, 0.0, 1.0);
  const Matrix c = gaussian_matrix(rng, 8, 5, 0.0, 1.0);
  const Matrix left = matmul(matmul(a, b), c);
  const Matrix right = matmul(a, matmul(b, c));
  for (Index i = 0; i < left.rows(); ++i)
    for (Index j = 0; j < left.cols(); ++j) {
      const double denom = std::max({std::abs(left(i, j)), std::abs(right(i, j)), 1e-12});
      CHECK(std::abs(left(i, j) - right(i, j)) / denom < 1e-9);
    }
}

TEST_CASE("gaussian_matrix degenerate variance") {
  Rng rng(1);
  const Matrix m = gaussian_matrix(rng, 4, 4, 2.5, 0.0);
  CHECK((m.array() == 2.5).all());
}

TEST_CASE("gaussian_matrix rejects negative variance") {
  Rng rng(1);
  CHECK_THROWS_AS(gaussian_matrix(rng, 2, 2, 0.0, -1.0), DomainError);
}

TEST_CASE("gaussian_matrix sample variance near 10") {
  Rng rng(2024);
  const Matrix m = gaussian_matrix(rng, 1000, 100, 0.0, 10.0);
  const double mean = m.mean();
  const double var = (m.array() - mean).square().sum() / static_cast<double>(m.size() - 1);
  CHECK(var == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("gaussian_matrix determinism") {
  Rng a(99), b(99);
  const Matrix ma = gaussian_matrix(a, 8, 8, 0.0, 3.0);
  const Matrix mb = gaussian_matrix(b, 8, 8, 0.0, 3.0);
  CHECK(ma == mb);
}

TEST_CASE("l2_norm pythagorean") {
  Vector v(2);
  v << 3, 4;
  CHECK(l2_norm(v) == 5.0);
}

TEST_CASE("l2_norm zero vector") { CHECK(l2_norm(Vector::Zero(17)) == 0.0); }

TEST_CASE("l2_norm matches naive summation oracle") {
  Rng rng(5);
  const Matrix m = gaussian_matrix(rng, 1, 257, 0.0, 2.0);
  double acc = 0.0;
  for (Index i = 0; i < m.size(); ++i) acc += m.data()[i] * m.data()[i];
  CHECK(std::abs(l2_norm(m) - std::sqrt(acc)) < 1e-12);
}

TEST_CASE("rng equal seeds produce bit-identical streams") {
  Rng a(123456789), b(123456789);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng golden values pin the documented transform") {
  // Frozen from the splitmix64 reference sequence for seed 42; a change here
  // means the generator no longer reproduces published runs.
  Rng rng(42);
  const std::uint64_t expected[4] = {13679457532755275413ULL, 2949826092126892291ULL,
                                     5139283748462763858ULL, 6349198060258255764ULL};
  for (std::uint64_t e : expected) CHECK(rng.next_u64() == e);
}

TEST_CASE("rng fork streams are independent and deterministic") {
  Rng root(7);
  Rng s1 = root.fork(1);
  Rng s1b = root.fork(1);
  Rng s2 = root.fork(2);
  CHECK(s1.next_u64() == s1b.next_u64());
  CHECK(s1.seed() != s2.seed());
  // forking does not disturb the parent stream
  Rng fresh(7);
  CHECK(root.next_u64() == fresh.next_u64());
}

TEST_CASE("uniform draws live in [0,1)") {
  Rng rng(31337);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("public ops return finite values for finite inputs") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Index r = 1 + rng.next_index(10);
    const Index k = 1 + rng.next_index(10);
    const Index c = 1 + rng.next_index(10);
    const Matrix a = gaussian_matrix(rng, r, k, 0.0, 100.0);
    const Matrix b = gaussian_matrix(rng, k, c, 0.0, 100.0);
    CHECK(all_finite(matmul(a, b)));
    CHECK(std::isfinite(l2_norm(a)));
  }
}
