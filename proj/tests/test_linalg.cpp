#include <doctest.h>

#include <cmath>
#include <random>

#include "dbp/errors.hpp"
#include "dbp/linalg.hpp"
#include "fixtures.hpp"

using namespace dbp;

namespace {

Matrix random_upper(std::mt19937_64& rng, int n, double gap) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> diag(static_cast<std::size_t>(n));
  double x = -1.0 + u(rng);
  for (double& d : diag) {
    d = x;
    x += gap + 0.4 * u(rng);
  }
  std::shuffle(diag.begin(), diag.end(), rng);
  Matrix B = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    B(i, i) = diag[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) B(i, j) = u(rng);
  }
  return B;
}

}  // namespace

TEST_CASE("closed matexp of a diagonal matrix") {
  Matrix B = Matrix::Zero(2, 2);
  B(0, 0) = 0.3;
  B(1, 1) = -0.7;
  const Matrix E = triangular_matexp_closed(TriangularSpectrum::from_matrix(B), 1.0);
  CHECK(E(0, 0) == doctest::Approx(std::exp(0.3)));
  CHECK(E(1, 1) == doctest::Approx(std::exp(-0.7)));
  CHECK(E(0, 1) == 0.0);
  CHECK(E(1, 0) == 0.0);
}

TEST_CASE("closed matexp of the Model A generator") {
  const Matrix B = generator_matrix(fixtures::model_a());
  const Matrix E = triangular_matexp_closed(TriangularSpectrum::from_matrix(B), 1.0);
  CHECK(E(0, 0) == doctest::Approx(1.221403).epsilon(1e-6));
  CHECK(E(0, 1) == doctest::Approx(0.712197).epsilon(1e-6));
  CHECK(E(1, 1) == doctest::Approx(1.648721).epsilon(1e-6));
  CHECK(E(1, 0) == 0.0);
}

TEST_CASE("closed matexp matches the reference on a random 5x5") {
  std::mt19937_64 rng(11);
  const Matrix B = random_upper(rng, 5, 0.1);
  const Matrix closed = triangular_matexp_closed(TriangularSpectrum::from_matrix(B), 1.0);
  CHECK(max_abs_diff(closed, matexp_reference(B, 1.0)) < 1e-10);
}

TEST_CASE("closed matexp refuses a near-degenerate diagonal") {
  Matrix B = Matrix::Zero(2, 2);
  B(0, 0) = 0.5;
  B(1, 1) = 0.5 + 1e-10;
  B(0, 1) = 1.0;
  CHECK_THROWS_AS(triangular_matexp_closed(TriangularSpectrum::from_matrix(B), 1.0),
                  NearDegenerateSpectrumError);
}

TEST_CASE("closed matexp semigroup property") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix B = random_upper(rng, 2 + trial % 6, 0.1);
    const TriangularSpectrum S = TriangularSpectrum::from_matrix(B);
    const Matrix lhs = triangular_matexp_closed(S, 1.7);
    const Matrix rhs = triangular_matexp_closed(S, 0.5) * triangular_matexp_closed(S, 1.2);
    CHECK(max_abs_diff(lhs, rhs) < 1e-9);
  }
}

TEST_CASE("reference matexp basics") {
  CHECK(max_abs_diff(matexp_reference(Matrix::Zero(3, 3), 2.0), Matrix::Identity(3, 3)) == 0.0);
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 1.5;
  D(1, 1) = -2.0;
  const Matrix E = matexp_reference(D, 1.0);
  CHECK(E(0, 0) == doctest::Approx(std::exp(1.5)).epsilon(1e-13));
  CHECK(E(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-13));
  Matrix N = Matrix::Zero(2, 2);
  N(0, 1) = 1.0;
  const Matrix EN = matexp_reference(N, 1.0);
  CHECK(EN(0, 0) == 1.0);
  CHECK(EN(0, 1) == 1.0);
  CHECK(EN(1, 0) == 0.0);
  CHECK(EN(1, 1) == 1.0);
}

TEST_CASE("reference matexp against a rotation") {
  Matrix R = Matrix::Zero(2, 2);
  R(0, 1) = -1.0;
  R(1, 0) = 1.0;
  const Matrix E = matexp_reference(R, 3.0);
  CHECK(E(0, 0) == doctest::Approx(std::cos(3.0)).epsilon(1e-12));
  CHECK(E(1, 0) == doctest::Approx(std::sin(3.0)).epsilon(1e-12));
}

TEST_CASE("perron of [[2,1],[1,2]]") {
  Matrix A(2, 2);
  A << 2, 1, 1, 2;
  const PerronData p = perron(A);
  CHECK(p.root == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(p.right(0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(p.right(1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(p.left(0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(p.left(1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("perron of a scalar") {
  Matrix A(1, 1);
  A << -0.4;
  const PerronData p = perron(A);
  CHECK(p.root == -0.4);
  CHECK(p.left(0) == 1.0);
  CHECK(p.right(0) == 1.0);
}

TEST_CASE("perron rejects a reducible matrix") {
  CHECK_THROWS_AS(perron(Matrix::Identity(2, 2)), NotPositiveRegularError);
}

TEST_CASE("perron eigen-equations, normalization and scaling") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 5;
    Matrix A(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = i == j ? -2.0 * u(rng) : 0.1 + u(rng);
    }
    const PerronData p = perron(A);
    CHECK((A * p.right - p.root * p.right).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((A.transpose() * p.left - p.root * p.left).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(p.right.dot(p.left) - 1.0) < 1e-10);
    CHECK(p.right.minCoeff() > 0.0);
    CHECK(p.left.minCoeff() > 0.0);
    CHECK(p.root == doctest::Approx(spectral_abscissa(A)).epsilon(1e-9));

    const PerronData scaled = perron(2.5 * A);
    CHECK(scaled.root == doctest::Approx(2.5 * p.root).epsilon(1e-9));
    const double cosine = scaled.right.dot(p.right) / (scaled.right.norm() * p.right.norm());
    CHECK(1.0 - cosine < 1e-9);
  }
}

TEST_CASE("M-matrix inverse of a scalar") {
  Matrix A(1, 1);
  A << 0.2;
  const Matrix inv = m_matrix_inverse(0.5, A);
  CHECK(inv(0, 0) == doctest::Approx(10.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("M-matrix inverse at the dominant eigenvalue is singular") {
  Matrix A(1, 1);
  A << 0.2;
  CHECK_THROWS_AS(m_matrix_inverse(0.2, A), SingularityError);
  Matrix B(2, 2);
  B << 0.0, 1.0, 1.0, 0.0;
  CHECK_THROWS_AS(m_matrix_inverse(1.0, B), SingularityError);
}

TEST_CASE("M-matrix inverse below the dominant eigenvalue is refused") {
  Matrix B(2, 2);
  B << 0.0, 1.0, 1.0, 0.0;
  CHECK_THROWS_AS(m_matrix_inverse(0.5, B), NotMMatrixError);
}

TEST_CASE("M-matrix inverse of random irreducible blocks is nonnegative") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4;
    Matrix A(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = i == j ? u(rng) - 0.5 : 0.05 + u(rng);
    }
    const double alpha2 = perron(A).root + 1.0;
    const Matrix inv = m_matrix_inverse(alpha2, A);
    CHECK(inv.minCoeff() >= -1e-12);
    const Matrix direct = (alpha2 * Matrix::Identity(n, n) - A).fullPivLu().inverse();
    CHECK(max_abs_diff(inv, direct) < 1e-10);
    CHECK(max_abs_diff(inv * (alpha2 * Matrix::Identity(n, n) - A), Matrix::Identity(n, n)) <
          1e-9);
  }
}

TEST_CASE("partial fraction identity") {
  const std::vector<double> two{0.0, 1.0};
  CHECK(partial_fraction_residual(two) == 0.0);
  const std::vector<double> three{0.0, 1.0, 2.0};
  CHECK(partial_fraction_residual(three) < 1e-12);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> eight;
  while (eight.size() < 8) {
    const double x = u(rng);
    if (std::all_of(eight.begin(), eight.end(), [&](double y) { return std::abs(x - y) >= 0.05; })) {
      eight.push_back(x);
    }
  }
  CHECK(partial_fraction_residual(eight) < 1e-8);
}

TEST_CASE("partial fraction identity rejects duplicates and short input") {
  const std::vector<double> dup{0.5, 0.5, 1.0};
  CHECK_THROWS_AS(partial_fraction_residual(dup), ArgumentError);
  const std::vector<double> one{0.5};
  CHECK_THROWS_AS(partial_fraction_residual(one), ArgumentError);
}

TEST_CASE("Sylvester solve") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix A(3, 3), B(2, 2), C(3, 2);
  for (int i = 0; i < 9; ++i) A.data()[i] = u(rng);
  for (int i = 0; i < 4; ++i) B.data()[i] = u(rng);
  for (int i = 0; i < 6; ++i) C.data()[i] = u(rng);
  A.diagonal().array() += 3.0;
  const Matrix X = solve_sylvester(A, B, C);
  CHECK(max_abs_diff(A * X - X * B, C) < 1e-12);
}

TEST_CASE("irreducibility by reachability") {
  Matrix A(3, 3);
  A << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  CHECK(is_irreducible(A));
  A(2, 0) = 0.0;
  CHECK(!is_irreducible(A));
}
