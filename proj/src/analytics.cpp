#include "dbp/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dbp/errors.hpp"
#include "dbp/linalg.hpp"

namespace dbp {

namespace {

using Idx = Eigen::Index;

Idx ix(std::size_t i) { return static_cast<Idx>(i); }

Matrix checked_generator(const SdcbpModel& model) {
  if (const auto v = validate(model); !v.empty()) {
    throw ModelError(v.front().invariant + " at " + v.front().location);
  }
  return generator_matrix(model);
}

void require_distinct_range(const Matrix& B, std::size_t lo, std::size_t hi) {
  std::vector<double> alpha;
  for (std::size_t i = lo; i <= hi; ++i) alpha.push_back(B(ix(i), ix(i)));
  require_distinct(alpha, kEpsDistinct, "generator diagonal");
}

// a_i^m for i in lo..m, from the generator: a_m = 1 and, going down,
// a_i = (B_im + sum_{i<j<m} B_ij a_j) / (alpha_m - alpha_i).
Vector coeffs_from_generator(const Matrix& B, std::size_t lo, std::size_t m) {
  Vector a = Vector::Zero(ix(m + 1));
  a(ix(m)) = 1.0;
  const double am = B(ix(m), ix(m));
  for (std::size_t i = m; i-- > lo;) {
    double num = B(ix(i), ix(m));
    for (std::size_t j = i + 1; j < m; ++j) num += B(ix(i), ix(j)) * a(ix(j));
    a(ix(i)) = num / (am - B(ix(i), ix(i)));
  }
  return a;
}

bool strictly_increasing_diag(const Matrix& B, std::size_t lo, std::size_t hi) {
  for (std::size_t i = lo; i < hi; ++i) {
    if (!(B(ix(i), ix(i)) < B(ix(i + 1), ix(i + 1)))) return false;
  }
  return true;
}

Matrix solve_checked(const Matrix& A, const Matrix& rhs, const char* what) {
  Eigen::FullPivLU<Matrix> lu(A);
  if (!lu.isInvertible()) throw SingularityError(std::string(what) + " is singular");
  return lu.solve(rhs);
}

// (alpha2 I - A11)^{-1}; nonnegativity is only asserted when alpha1 < alpha2.
Matrix resolvent(const VdcbpBlocks& blocks, const VdcbpGrowth& growth) {
  const double gap[] = {growth.alpha1, growth.alpha2};
  require_distinct(gap, kEpsDistinct, "alpha1/alpha2");
  if (growth.alpha1 < growth.alpha2) return m_matrix_inverse(growth.alpha2, blocks.A11);
  const Idx n = blocks.A11.rows();
  return solve_checked(growth.alpha2 * Matrix::Identity(n, n) - blocks.A11,
                       Matrix::Identity(n, n), "alpha2 I - A11");
}

}  // namespace

MartingaleCoeffs martingale_coeffs(const SdcbpModel& model, std::size_t m) {
  const Matrix B = checked_generator(model);
  if (m >= model.types()) throw ArgumentError("target type out of range");
  require_distinct_range(B, 0, m);
  MartingaleCoeffs out{m, coeffs_from_generator(B, 0, m)};
  if (strictly_increasing_diag(B, 0, m) && out.a.minCoeff() < -1e-12) {
    throw Error("martingale coefficient negative under increasing rates");
  }
  return out;
}

ExpCurve expectation_coeffs(const SdcbpModel& model, std::size_t m) {
  return expectation_curve(model, 0, m);
}

ExpCurve expectation_curve(const SdcbpModel& model, std::size_t k, std::size_t m) {
  const Matrix B = checked_generator(model);
  if (k >= model.types() || m >= model.types()) throw ArgumentError("type index out of range");
  if (k > m) return {};
  require_distinct_range(B, k, m);

  // a[j] holds a^j over indices k..j; c[j] the chain weights c_j^m with
  // c_m^m = 1 and c_j^m = -sum_{j <= i < m} c_j^i a_i^m.
  std::vector<Vector> a(m + 1);
  for (std::size_t j = k; j <= m; ++j) a[j] = coeffs_from_generator(B, k, j);

  ExpCurve curve;
  for (std::size_t j = k; j <= m; ++j) {
    // c_j^i for i = j..m
    std::vector<double> c(m + 1, 0.0);
    c[j] = 1.0;
    for (std::size_t i = j + 1; i <= m; ++i) {
      double sum = 0.0;
      for (std::size_t p = j; p < i; ++p) sum += c[p] * a[i](ix(p));
      c[i] = -sum;
    }
    curve.terms.push_back({B(ix(j), ix(j)), a[j](ix(k)) * c[m]});
  }
  return curve;
}

double expected_population(const SdcbpModel& model, std::size_t k, std::size_t m, double t) {
  return expectation_curve(model, k, m).eval(t);
}

FixedPoint pgf_fixed_point(const Model& model, const std::vector<bool>& free,
                           const FixedPointOptions& options) {
  const std::size_t n = type_count(model);
  if (free.size() != n) throw ArgumentError("mask length does not match the type count");
  std::vector<double> s(n), next(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = free[i] ? 0.0 : 1.0;
  double change = 0.0;
  for (long it = 1; it <= options.maxIter; ++it) {
    change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = free[i] ? event_pgf(model, i, s) : 1.0;
      if (next[i] < s[i] - 1e-14) {
        throw Error("extinction iteration lost monotonicity");
      }
      change = std::max(change, std::abs(next[i] - s[i]));
    }
    s.swap(next);
    if (change < options.tol) {
      FixedPoint out;
      out.s = Eigen::Map<const Vector>(s.data(), ix(n));
      out.iterations = it;
      double residual = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (free[i]) residual = std::max(residual, std::abs(s[i] - event_pgf(model, i, s)));
      }
      out.residual = residual;
      return out;
    }
  }
  std::ostringstream msg;
  msg << "extinction fixed point did not converge in " << options.maxIter
      << " iterations (last change " << change << ")";
  throw ConvergenceError(msg.str(), change, options.maxIter);
}

ExtinctionTable extinction_probabilities(const SdcbpModel& model, const FixedPointOptions& options) {
  checked_generator(model);
  const std::size_t n = model.types();
  ExtinctionTable table;
  table.q = Matrix::Ones(ix(n), ix(n));
  const Model wrapped = model;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<bool> free(n, false);
    for (std::size_t k = 0; k <= i; ++k) free[k] = true;
    const FixedPoint fp = pgf_fixed_point(wrapped, free, options);
    for (std::size_t k = 0; k <= i; ++k) table.q(ix(k), ix(i)) = fp.s(ix(k));
    table.residual = std::max(table.residual, fp.residual);
    table.iterations = std::max(table.iterations, fp.iterations);
  }
  return table;
}

VdcbpBlocks vdcbp_blocks(const VdcbpModel& model) {
  if (const auto v = validate(model); !v.empty()) {
    throw ModelError(v.front().invariant + " at " + v.front().location);
  }
  const Matrix G = generator_matrix(model);
  const Idx n = ix(model.class1);
  const Idx m = ix(model.class2);
  return {G.topLeftCorner(n, n), G.topRightCorner(n, m), G.bottomRightCorner(m, m)};
}

VdcbpGrowth vdcbp_growth(const VdcbpModel& model) {
  const VdcbpBlocks blocks = vdcbp_blocks(model);
  const PerronData p1 = perron(blocks.A11);
  const PerronData p2 = perron(blocks.A22);
  return {p1.root, p1.left, p1.right, p2.root, p2.left, p2.right};
}

Vector vdcbp_martingale_weights(const VdcbpModel& model) {
  const VdcbpBlocks blocks = vdcbp_blocks(model);
  const VdcbpGrowth growth = vdcbp_growth(model);
  return resolvent(blocks, growth) * blocks.A12 * growth.xi2R;
}

double vdcbp_martingale_value(const VdcbpModel& model, const Vector& X, const Vector& Y, double t) {
  if (X.size() != ix(model.class1) || Y.size() != ix(model.class2)) {
    throw ArgumentError("population vectors do not match the class sizes");
  }
  const VdcbpGrowth growth = vdcbp_growth(model);
  const Vector w = vdcbp_martingale_weights(model);
  return std::exp(-growth.alpha2 * t) * (Y.dot(growth.xi2R) + X.dot(w));
}

Vector VdcbpExpectedY::exact(double t) const {
  const Matrix value = S * matexp_reference(A22, t) - matexp_reference(A11, t) * S;
  return value.row(ix(start)).transpose();
}

VdcbpExpectedY vdcbp_expected_y(const VdcbpModel& model, std::size_t startType) {
  if (startType >= model.class1) throw ArgumentError("start type must be in class 1");
  const VdcbpBlocks blocks = vdcbp_blocks(model);
  const VdcbpGrowth growth = vdcbp_growth(model);
  const Matrix RA12 = resolvent(blocks, growth) * blocks.A12;

  VdcbpExpectedY out;
  out.start = startType;
  out.A11 = blocks.A11;
  out.A22 = blocks.A22;
  out.S = solve_sylvester(blocks.A11, blocks.A22, -blocks.A12);
  const Vector hHat = RA12.row(ix(startType)).transpose();
  const Vector dHat = growth.xi1R(ix(startType)) * (RA12.transpose() * growth.xi1L);
  for (std::size_t l = 0; l < model.class2; ++l) {
    out.twoTerm.push_back(
        ExpCurve{{{growth.alpha2, hHat(ix(l))}, {growth.alpha1, -dHat(ix(l))}}});
  }
  return out;
}

VdcbpExtinction vdcbp_extinction(const VdcbpModel& model, const FixedPointOptions& options) {
  vdcbp_blocks(model);
  const std::size_t n = model.class1;
  const std::size_t total = model.types();
  const Model wrapped = model;
  std::vector<bool> first(total, false), second(total, false), all(total, true);
  for (std::size_t i = 0; i < total; ++i) (i < n ? first : second)[i] = true;

  const FixedPoint f1 = pgf_fixed_point(wrapped, first, options);
  const FixedPoint f2 = pgf_fixed_point(wrapped, second, options);
  const FixedPoint f12 = pgf_fixed_point(wrapped, all, options);
  VdcbpExtinction out;
  out.q1 = f1.s.head(ix(n));
  out.q2 = f2.s.tail(ix(model.class2));
  out.q12 = f12.s.head(ix(n));
  out.residual = std::max({f1.residual, f2.residual, f12.residual});
  out.iterations = std::max({f1.iterations, f2.iterations, f12.iterations});
  return out;
}

TcBlocks tc_blocks(const TcvdbpModel& model) {
  if (const auto v = validate(model); !v.empty()) {
    throw ModelError(v.front().invariant + " at " + v.front().location);
  }
  const Idx M = ix(model.mixed);
  const Idx E = ix(model.exclusive);
  if (M == 0 || E == 0) throw ArgumentError("share curves need mixed and exclusive types");
  const Matrix m = model.share_means();
  const double th = model.theta;
  TcBlocks b;
  b.Amx = th * model.typeChangeMixed + (1.0 - th) * m.topLeftCorner(M, M);
  b.Aex = th * model.typeChangeExclusive + (1.0 - th) * m.bottomRightCorner(E, E);
  b.Mmx = m.topRows(M);
  b.Gmx = model.lambdaV * (b.Amx - Matrix::Identity(M, M));
  b.Gex = model.lambdaV * (b.Aex - Matrix::Identity(E, E));
  b.k = Vector::Constant(E, 1.0 - th);
  b.k(E - 1) = 1.0;
  b.alphaE = spectral_abscissa(b.Gex);
  b.alphaMx = spectral_abscissa(b.Gmx);
  return b;
}

Vector exclusive_h(const TcvdbpModel& model) {
  const TcBlocks b = tc_blocks(model);
  return model.lambdaV * solve_checked(b.Gex, b.k, "exclusive generator");
}

ExpCurve exclusive_shares_curve(const TcvdbpModel& model, std::size_t l) {
  if (l >= model.exclusive) throw ArgumentError("exclusive index out of range");
  const TcBlocks b = tc_blocks(model);
  if (std::abs(b.alphaE) <= kEpsDistinct) {
    throw NearDegenerateSpectrumError("exclusive growth rate is zero");
  }
  const Vector he = model.lambdaV * solve_checked(b.Gex, b.k, "exclusive generator");
  return ExpCurve{{{0.0, -he(ix(l))}, {b.alphaE, he(ix(l))}}};
}

ShareCoeffs mixed_shares_coeffs(const TcvdbpModel& model) {
  const TcBlocks b = tc_blocks(model);
  if (!(b.alphaE > 0.0)) {
    throw ArgumentError("mixed share curve needs a supercritical exclusive class");
  }
  const double lv = model.lambdaV;
  const double th = model.theta;
  const Idx M = ix(model.mixed);

  ShareCoeffs c;
  c.alphaE = b.alphaE;
  c.alphaBar = b.alphaMx;
  c.he = lv * solve_checked(b.Gex, b.k, "exclusive generator");
  const Vector T = b.Mmx.rowwise().sum();

  if (b.alphaMx < -kEpsDistinct) {
    c.mixedSubcritical = true;
    c.ol = Vector::Zero(M);
    c.hl = lv * (1.0 - th) * T / b.alphaE;
    c.gl = -c.hl;
    return c;
  }

  const double ab = b.alphaMx;
  if (std::abs(ab) <= kEpsDistinct) {
    throw NearDegenerateSpectrumError("mixed growth rate is zero");
  }
  if (std::abs(ab - b.alphaE) <= kEpsDistinct) {
    throw NearDegenerateSpectrumError("mixed and exclusive growth rates coincide");
  }
  if (M > 1) {
    Eigen::EigenSolver<Matrix> solver(b.Gmx, false);
    int positive = 0;
    for (Idx i = 0; i < M; ++i) {
      if (solver.eigenvalues()(i).real() > 0.0) ++positive;
    }
    if (positive > 1) {
      c.warnings.push_back("several mixed-class eigenvalues exceed zero; using the largest");
    }
  }

  const Vector Se = b.Mmx.rightCols(ix(model.exclusive)) * c.he;
  const Vector AT = b.Amx * T;
  const double scale = (1.0 - th) * lv / ((ab - b.alphaE) * ab);
  c.ol = scale * b.alphaE * Se + scale * (lv * AT - (lv + b.alphaE) * T);
  c.hl = (lv * (1.0 - th) * T - ab * c.ol) / b.alphaE;
  c.gl = -c.hl - c.ol;
  return c;
}

ExpCurve mixed_shares_curve(const ShareCoeffs& c, std::size_t l) {
  if (l >= static_cast<std::size_t>(c.gl.size())) throw ArgumentError("mixed index out of range");
  ExpCurve curve{{{0.0, c.gl(ix(l))}, {c.alphaE, c.hl(ix(l))}}};
  if (!c.mixedSubcritical) curve.terms.push_back({c.alphaBar, c.ol(ix(l))});
  return curve;
}

ExpCurve mixed_shares_curve(const TcvdbpModel& model, std::size_t l) {
  return mixed_shares_curve(mixed_shares_coeffs(model), l);
}

ShareResiduals share_residuals(const TcvdbpModel& model, const ShareCoeffs& c) {
  const TcBlocks b = tc_blocks(model);
  const double lv = model.lambdaV;
  const double th = model.theta;
  const Idx M = ix(model.mixed);
  const Idx E = ix(model.exclusive);
  const Matrix mm = b.Mmx.leftCols(M);
  const Matrix me = b.Mmx.rightCols(E);
  const Vector ge = -c.he;

  ShareResiduals r;
  r.sumZero = (c.gl + c.hl + c.ol).cwiseAbs().maxCoeff();
  const Vector rhsConst = th * model.typeChangeMixed * c.gl +
                       (1.0 - th) * mm * (Vector::Ones(M) + c.gl) +
                       (1.0 - th) * me * (Vector::Ones(E) + ge);
  r.constTerm = (c.gl - rhsConst).cwiseAbs().maxCoeff();
  const Vector rhsE = (b.Amx * c.hl + (1.0 - th) * me * c.he) * (lv / (lv + c.alphaE));
  r.alphaETerm = (c.hl - rhsE).cwiseAbs().maxCoeff();
  const Vector rhsBar = (b.Amx * c.ol) * (lv / (lv + c.alphaBar));
  r.alphaBarTerm = (c.ol - rhsBar).cwiseAbs().maxCoeff();
  return r;
}

double exact_shares(const TcvdbpModel& model, std::size_t startType, double t) {
  if (startType >= model.types()) throw ArgumentError("start type out of range");
  const Matrix G = generator_matrix(model);
  const Idx M = ix(model.mixed);
  const Idx E = ix(model.exclusive);
  const Matrix m = model.share_means();
  Vector r(M + E);
  for (Idx i = 0; i < M; ++i) r(i) = model.lambdaV * (1.0 - model.theta) * m.row(i).sum();
  for (Idx i = 0; i < E; ++i) {
    r(M + i) = model.lambdaV * (i + 1 == E ? 1.0 : 1.0 - model.theta);
  }
  // Integral of e^{Gs} over [0,t] as the top-right block of exp([[G, I],[0, 0]] t),
  // which stays valid when G is singular.
  const Idx n = M + E;
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = G;
  aug.topRightCorner(n, n) = Matrix::Identity(n, n);
  const Matrix integral = matexp_reference(aug, t).topRightCorner(n, n);
  return integral.row(ix(startType)).dot(r);
}

}  // namespace dbp
