#include "dbp/linalg.hpp"

#include <cmath>
#include <sstream>

#include "dbp/errors.hpp"

namespace dbp {

namespace {

double norm1(const Matrix& A) {
  return A.cwiseAbs().colwise().sum().maxCoeff();
}

bool reaches_all(const Matrix& A, bool transpose) {
  const Eigen::Index n = A.rows();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const Eigen::Index u = stack.back();
    stack.pop_back();
    for (Eigen::Index v = 0; v < n; ++v) {
      if (v == u || seen[static_cast<std::size_t>(v)]) continue;
      const double w = transpose ? A(v, u) : A(u, v);
      if (w > 0.0) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  for (char s : seen) {
    if (!s) return false;
  }
  return true;
}

struct PowerResult {
  double value;
  Vector vector;
};

// Power iteration on A + shift*I, which is entrywise nonnegative with a
// positive diagonal and therefore primitive when A is irreducible.
PowerResult shifted_power(const Matrix& A, double shift, const PerronOptions& options) {
  const Eigen::Index n = A.rows();
  const Matrix S = A + shift * Matrix::Identity(n, n);
  Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double mu = 0.0;
  for (long it = 0; it < options.maxIter; ++it) {
    Vector w = S * v;
    const double next = w.norm();
    if (!(next > 0.0) || !std::isfinite(next)) {
      throw ConvergenceError("power iteration collapsed", next, it);
    }
    w /= next;
    const double dv = (w - v).cwiseAbs().maxCoeff();
    const double dmu = std::abs(next - mu);
    v = std::move(w);
    mu = next;
    if (it > 0 && dmu <= options.tolerance * std::max(1.0, std::abs(mu)) &&
        dv <= options.tolerance) {
      return {mu - shift, v};
    }
  }
  throw ConvergenceError("Perron power iteration did not converge", std::abs(mu), options.maxIter);
}

}  // namespace

TriangularSpectrum TriangularSpectrum::from_matrix(const Matrix& B) {
  if (B.rows() != B.cols()) throw ArgumentError("generator must be square");
  for (Eigen::Index i = 0; i < B.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (B(i, j) != 0.0) throw ArgumentError("generator is not upper triangular");
    }
  }
  return {B.diagonal(), B.triangularView<Eigen::StrictlyUpper>()};
}

void require_distinct(std::span<const double> values, double eps, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      if (std::abs(values[i] - values[j]) <= eps) {
        std::ostringstream out;
        out.precision(17);
        out << what << ": entries " << i << " and " << j << " differ by "
            << std::abs(values[i] - values[j]) << " (" << values[i] << ")";
        throw NearDegenerateSpectrumError(out.str());
      }
    }
  }
}

Matrix triangular_matexp_closed(const TriangularSpectrum& B, double delta) {
  const std::size_t n = B.size();
  const std::vector<double> alpha(B.diag.data(), B.diag.data() + n);
  require_distinct(alpha, kEpsDistinct, "triangular_matexp_closed diagonal");

  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = std::exp(alpha[k] * delta);
  }

  // Entry (j,i) sums, over increasing paths j -> j1 -> ... -> i, the product of
  // the edge rates times the divided difference of exp(x*delta) on the path's
  // diagonal values.
  std::vector<std::size_t> path;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = j + 1; i < n; ++i) {
      double entry = 0.0;
      path.assign(1, j);
      auto walk = [&](auto&& self, std::size_t from, double weight) -> void {
        for (std::size_t next = from + 1; next <= i; ++next) {
          const double edge =
              B.offdiag(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(next));
          if (edge == 0.0) continue;
          path.push_back(next);
          if (next == i) {
            double dd = 0.0;
            for (std::size_t p : path) {
              double denom = 1.0;
              for (std::size_t l : path) {
                if (l != p) denom *= alpha[p] - alpha[l];
              }
              dd += std::exp(alpha[p] * delta) / denom;
            }
            entry += weight * edge * dd;
          } else {
            self(self, next, weight * edge);
          }
          path.pop_back();
        }
      };
      walk(walk, j, 1.0);
      out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = entry;
    }
  }
  return out;
}

Matrix matexp_reference(const Matrix& A, double delta) {
  if (A.rows() != A.cols()) throw ArgumentError("matexp needs a square matrix");
  const Eigen::Index n = A.rows();
  Matrix X = A * delta;
  const double norm = norm1(X);
  int squarings = 0;
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    X /= std::ldexp(1.0, squarings);
  }
  Matrix sum = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k < 200; ++k) {
    term = term * X / static_cast<double>(k);
    sum += term;
    if (norm1(term) < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

bool is_irreducible(const Matrix& A) {
  if (A.rows() != A.cols()) throw ArgumentError("irreducibility check needs a square matrix");
  if (A.rows() <= 1) return true;
  return reaches_all(A, false) && reaches_all(A, true);
}

PerronData perron(const Matrix& A, const PerronOptions& options) {
  if (A.rows() != A.cols() || A.rows() == 0) throw ArgumentError("perron needs a square matrix");
  const Eigen::Index n = A.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && A(i, j) < 0.0) throw ArgumentError("perron needs nonnegative off-diagonals");
    }
  }
  if (n == 1) return {A(0, 0), Vector::Ones(1), Vector::Ones(1)};
  if (!is_irreducible(A)) throw NotPositiveRegularError("matrix is reducible");

  const double shift = A.diagonal().cwiseAbs().maxCoeff() + 1.0;
  PowerResult right = shifted_power(A, shift, options);
  PowerResult left = shifted_power(A.transpose(), shift, options);
  PerronData out;
  out.root = right.value;
  out.right = right.vector;
  out.left = left.vector / right.vector.dot(left.vector);
  return out;
}

double spectral_abscissa(const Matrix& A) {
  if (A.rows() != A.cols() || A.rows() == 0) throw ArgumentError("spectrum needs a square matrix");
  if (A.rows() == 1) return A(0, 0);
  Eigen::EigenSolver<Matrix> solver(A, false);
  return solver.eigenvalues().real().maxCoeff();
}

Matrix m_matrix_inverse(double alpha2, const Matrix& A11) {
  if (A11.rows() != A11.cols() || A11.rows() == 0) {
    throw ArgumentError("A11 must be a nonempty square matrix");
  }
  const Eigen::Index n = A11.rows();
  const Matrix shifted = alpha2 * Matrix::Identity(n, n) - A11;
  Eigen::PartialPivLU<Matrix> lu(shifted);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12)) {
    std::ostringstream out;
    out << "alpha2 I - A11 is singular (rcond " << rcond << ")";
    throw SingularityError(out.str());
  }
  if (!(alpha2 > spectral_abscissa(A11))) {
    throw NotMMatrixError("alpha2 does not exceed the dominant eigenvalue of A11");
  }
  Matrix inverse = lu.inverse();
  const double scale = std::max(1.0, inverse.cwiseAbs().maxCoeff());
  if (inverse.minCoeff() < -1e-12 * scale) {
    throw NotMMatrixError("inverse has negative entries");
  }
  return inverse;
}

double partial_fraction_residual(std::span<const double> alphas) {
  if (alphas.size() < 2) throw ArgumentError("partial fraction identity needs at least 2 values");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    for (std::size_t j = i + 1; j < alphas.size(); ++j) {
      if (std::abs(alphas[i] - alphas[j]) <= kEpsDistinct) {
        throw ArgumentError("partial fraction identity needs distinct values");
      }
    }
  }
  // Neumaier summation; the terms are large and alternate in sign.
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    double denom = 1.0;
    for (std::size_t l = 0; l < alphas.size(); ++l) {
      if (l != j) denom *= alphas[j] - alphas[l];
    }
    const double term = 1.0 / denom;
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return std::abs(sum + comp);
}

Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.rows();
  if (A.cols() != n || B.cols() != m || C.rows() != n || C.cols() != m) {
    throw ArgumentError("solve_sylvester: dimension mismatch");
  }
  Matrix K = Matrix::Zero(n * m, n * m);
  // Column-major vec: vec(AX) = (I_m (x) A) vec X, vec(XB) = (B^T (x) I_n) vec X.
  for (Eigen::Index c = 0; c < m; ++c) {
    K.block(c * n, c * n, n, n) += A;
    for (Eigen::Index r = 0; r < m; ++r) {
      K.block(c * n, r * n, n, n) -= B(r, c) * Matrix::Identity(n, n);
    }
  }
  Eigen::FullPivLU<Matrix> lu(K);
  if (!lu.isInvertible()) throw SingularityError("Sylvester operator is singular");
  const Vector rhs = Eigen::Map<const Vector>(C.data(), n * m);
  const Vector x = lu.solve(rhs);
  return Eigen::Map<const Matrix>(x.data(), n, m);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ArgumentError("shape mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace dbp
