#pragma once

#include <span>
#include <vector>

#include "dbp/model.hpp"

namespace dbp {

/// Minimum gap between diagonal rates before closed forms with
/// (alpha_i - alpha_j) denominators are refused.
inline constexpr double kEpsDistinct = 1e-8;

/// Upper-triangular generator split into its diagonal and strict upper part.
struct TriangularSpectrum {
  Vector diag;
  Matrix offdiag;  // strictly upper entries used, the rest ignored

  static TriangularSpectrum from_matrix(const Matrix& B);
  std::size_t size() const { return static_cast<std::size_t>(diag.size()); }
};

struct PerronData {
  double root = 0.0;
  Vector left;
  Vector right;
};

/// Throws NearDegenerateSpectrumError if two entries are within eps.
void require_distinct(std::span<const double> values, double eps, const char* what);

/// e^{B delta} from the path-sum / divided-difference closed form.
Matrix triangular_matexp_closed(const TriangularSpectrum& B, double delta);

/// e^{A delta} by scaling and squaring of a truncated Taylor series.
Matrix matexp_reference(const Matrix& A, double delta);

/// True when the directed graph with an edge i->j for every positive
/// off-diagonal A(i,j) is strongly connected. 1x1 matrices are irreducible.
bool is_irreducible(const Matrix& A);

struct PerronOptions {
  double tolerance = 1e-12;
  long maxIter = 100000;
};

/// Dominant eigenvalue of an irreducible matrix with nonnegative
/// off-diagonal entries, with positive eigenvectors normalized so that
/// |right|_2 = 1 and right . left = 1.
PerronData perron(const Matrix& A, const PerronOptions& options = {});

/// Largest real part over the spectrum (dense eigen-solve).
double spectral_abscissa(const Matrix& A);

/// (alpha2 I - A11)^{-1}, asserted entrywise nonnegative.
Matrix m_matrix_inverse(double alpha2, const Matrix& A11);

/// |sum_j 1 / prod_{l != j} (alpha_j - alpha_l)|.
double partial_fraction_residual(std::span<const double> alphas);

/// Solves A X - X B = C for X (A: n x n, B: m x m, C: n x m) through the
/// Kronecker form. Requires disjoint spectra.
Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace dbp
