#pragma once

#include <string>
#include <vector>

#include "dbp/exp_curve.hpp"
#include "dbp/model.hpp"

namespace dbp {

struct MartingaleCoeffs {
  std::size_t m = 0;
  Vector a;  // a(i) for i = 0..m, a(m) = 1
};

/// Coefficients a_i^m making sum_i a_i^m X_i(t) e^{-alpha_m t} a martingale.
MartingaleCoeffs martingale_coeffs(const SdcbpModel& model, std::size_t m);

/// E[X_m(t)] from one type-0 particle.
ExpCurve expectation_coeffs(const SdcbpModel& model, std::size_t m);

/// E[X_m(t)] from one type-k particle, as a curve over the k..m sub-generator.
/// Empty curve (identically zero) when k > m.
ExpCurve expectation_curve(const SdcbpModel& model, std::size_t k, std::size_t m);

double expected_population(const SdcbpModel& model, std::size_t k, std::size_t m, double t);

struct ExtinctionTable {
  Matrix q;  // q(k, i): all types <= i die out, starting from one type-k particle
  double residual = 0.0;
  long iterations = 0;
};

struct FixedPointOptions {
  double tol = 1e-12;
  long maxIter = 1000000;
};

ExtinctionTable extinction_probabilities(const SdcbpModel& model,
                                         const FixedPointOptions& options = {});

/// Minimal fixed point of s_i = event_pgf_i(s) over the coordinates with
/// free[i] set; the others are held at 1. Iterates from zero.
struct FixedPoint {
  Vector s;
  double residual = 0.0;
  long iterations = 0;
};
FixedPoint pgf_fixed_point(const Model& model, const std::vector<bool>& free,
                           const FixedPointOptions& options = {});

struct VdcbpGrowth {
  double alpha1 = 0.0;
  Vector xi1L, xi1R;
  double alpha2 = 0.0;
  Vector xi2L, xi2R;
};

struct VdcbpBlocks {
  Matrix A11, A12, A22;
};

VdcbpBlocks vdcbp_blocks(const VdcbpModel& model);
VdcbpGrowth vdcbp_growth(const VdcbpModel& model);

/// (alpha2 I - A11)^{-1} A12 xi2R, one entry per class-1 type.
Vector vdcbp_martingale_weights(const VdcbpModel& model);

double vdcbp_martingale_value(const VdcbpModel& model, const Vector& X, const Vector& Y, double t);

struct VdcbpExpectedY {
  std::size_t start = 0;
  /// Two-exponential law h_l e^{alpha2 t} - d_l e^{alpha1 t}, one curve per class-2 type.
  std::vector<ExpCurve> twoTerm;
  /// Exact E[Y(t)] = e_j (S e^{A22 t} - e^{A11 t} S) with A11 S - S A22 = -A12.
  Matrix S;
  Matrix A11, A22;

  Vector exact(double t) const;
};

VdcbpExpectedY vdcbp_expected_y(const VdcbpModel& model, std::size_t startType);

struct VdcbpExtinction {
  Vector q1;   // class 1 dies out, per class-1 start type
  Vector q2;   // class 2 dies out, per class-2 start type
  Vector q12;  // everything dies out, per class-1 start type
  double residual = 0.0;
  long iterations = 0;
};

VdcbpExtinction vdcbp_extinction(const VdcbpModel& model, const FixedPointOptions& options = {});

/// Blocks of a TC-VDBP generator and the derived share-curve ingredients.
struct TcBlocks {
  Matrix Amx;   // theta a_mx + (1-theta) m_mx,mx
  Matrix Aex;   // theta a_ex + (1-theta) m_ex,ex
  Matrix Mmx;   // m restricted to mixed parents, all offspring columns
  Matrix Gex;   // lambdaV (Aex - I)
  Matrix Gmx;   // lambdaV (Amx - I)
  Vector k;     // (1-theta, ..., 1-theta, 1)
  double alphaE = 0.0;
  double alphaMx = 0.0;
};

TcBlocks tc_blocks(const TcvdbpModel& model);

/// Exclusive-start share curve (0, g^e) + (alpha_e, h^e), l an exclusive index.
ExpCurve exclusive_shares_curve(const TcvdbpModel& model, std::size_t l);

/// h^e over all exclusive types.
Vector exclusive_h(const TcvdbpModel& model);

struct ShareCoeffs {
  Vector gl, hl, ol;
  Vector he;  // exclusive h^e, g^e = -h^e
  double alphaBar = 0.0;
  double alphaE = 0.0;
  bool mixedSubcritical = false;
  std::vector<std::string> warnings;
};

ShareCoeffs mixed_shares_coeffs(const TcvdbpModel& model);

/// Mixed-start share curve, l a mixed index.
ExpCurve mixed_shares_curve(const TcvdbpModel& model, std::size_t l);
ExpCurve mixed_shares_curve(const ShareCoeffs& coeffs, std::size_t l);

struct ShareResiduals {
  double sumZero = 0.0;  // max |g + h + o|
  double constTerm = 0.0;
  double alphaETerm = 0.0;
  double alphaBarTerm = 0.0;
};

/// Plugs the coefficients back into the three fixed-point component identities.
ShareResiduals share_residuals(const TcvdbpModel& model, const ShareCoeffs& coeffs);

/// Exact expected share count from one particle of the given type (full index):
/// offspring of mixed parents plus k-weighted transitions of exclusive
/// particles, e_l G^{-1}(e^{Gt} - I) r.
double exact_shares(const TcvdbpModel& model, std::size_t startType, double t);

}  // namespace dbp
