#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "dbp/model.hpp"

namespace fixtures {

using namespace dbp;

// Two-type scalar chain; generator [[0.2, 0.5], [0, 0.5]].
inline SdcbpModel model_a() {
  SdcbpModel m;
  m.rates = {1.0, 1.0};
  m.laws = {OffspringLaw::product({{{0, 0.4}, {2, 0.6}}, {{0, 0.5}, {1, 0.5}}}),
            OffspringLaw::product({{}, {{0, 0.25}, {2, 0.75}}})};
  return m;
}

// alpha = (0.1, 0.3, 0.6), alpha_12 = 0.4, alpha_13 = 0.2, alpha_23 = 0.5.
inline SdcbpModel chain3() {
  SdcbpModel m;
  m.rates = {1.0, 1.0, 1.0};
  m.laws = {OffspringLaw::product({{{0, 0.45}, {2, 0.55}}, {{0, 0.6}, {1, 0.4}}, {{0, 0.8}, {1, 0.2}}}),
            OffspringLaw::product({{}, {{0, 0.35}, {2, 0.65}}, {{0, 0.5}, {1, 0.5}}}),
            OffspringLaw::product({{}, {}, {{0, 0.2}, {2, 0.8}}})};
  return m;
}

// Offspring count law with the given mean, supported on {floor, floor+1}.
inline std::vector<std::pair<int, double>> two_point(double mean) {
  const int lo = static_cast<int>(mean);
  const double frac = mean - lo;
  if (frac == 0.0) return {{lo, 1.0}};
  return {{lo, 1.0 - frac}, {lo + 1, frac}};
}

inline OffspringLaw law_from_means(const std::vector<double>& means) {
  std::vector<std::vector<std::pair<int, double>>> marginals;
  for (double mu : means) {
    marginals.push_back(mu == 0.0 ? std::vector<std::pair<int, double>>{} : two_point(mu));
  }
  return OffspringLaw::product(marginals);
}

// Random SDCBP with rate 1, self means spread so diagonal gaps are >= gap.
inline SdcbpModel random_sdcbp(std::mt19937_64& rng, std::size_t n, double gap = 0.1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SdcbpModel m;
  m.rates.assign(n, 1.0);
  std::vector<double> self(n);
  double x = 0.3 + 0.5 * u(rng);
  for (std::size_t i = 0; i < n; ++i) {
    self[i] = x;
    x += gap + 0.3 * u(rng);
  }
  std::shuffle(self.begin(), self.end(), rng);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> means(n, 0.0);
    means[i] = self[i];
    for (std::size_t j = i + 1; j < n; ++j) means[j] = 0.8 * u(rng);
    m.laws.push_back(law_from_means(means));
  }
  return m;
}

inline Matrix random_stochastic(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Matrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = u(rng);
    a.row(r) /= a.row(r).sum();
  }
  return a;
}

// Random TC-VDBP; share means drawn in [0, mixedScale) and [0, exclusiveScale).
inline TcvdbpModel random_tcvdbp(std::mt19937_64& rng, std::size_t M, std::size_t E, double theta,
                                 double lambdaV, double mixedScale, double exclusiveScale) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TcvdbpModel m;
  m.mixed = M;
  m.exclusive = E;
  m.theta = theta;
  m.lambdaV = lambdaV;
  m.typeChangeMixed = random_stochastic(rng, M);
  m.typeChangeExclusive = random_stochastic(rng, E);
  for (std::size_t i = 0; i < M + E; ++i) {
    std::vector<double> means(M + E, 0.0);
    for (std::size_t k = (i < M ? 0 : M); k < M + E; ++k) {
      means[k] = (i < M ? mixedScale : exclusiveScale) * u(rng);
    }
    m.shareLaws.push_back(law_from_means(means));
  }
  return m;
}

// 2 mixed + 2 exclusive types, theta 0.3, lambdaV 1; alpha_e = 0.49, alpha_mx = 0.14.
inline TcvdbpModel tc_2x2() {
  TcvdbpModel m;
  m.mixed = 2;
  m.exclusive = 2;
  m.theta = 0.3;
  m.lambdaV = 1.0;
  m.typeChangeMixed.resize(2, 2);
  m.typeChangeMixed << 0.2, 0.8, 0.6, 0.4;
  m.typeChangeExclusive.resize(2, 2);
  m.typeChangeExclusive << 0.3, 0.7, 0.5, 0.5;
  m.shareLaws = {law_from_means({0.7, 0.5, 0.5, 0.3}), law_from_means({0.4, 0.8, 0.4, 0.6}),
                 law_from_means({0.0, 0.0, 1.1, 0.6}), law_from_means({0.0, 0.0, 0.7, 1.0})};
  return m;
}

// 2 + 2 classes with alpha1 < alpha2.
inline VdcbpModel vdcbp_2x2() {
  VdcbpModel m;
  m.class1 = 2;
  m.class2 = 2;
  m.rates = {1.0, 1.0, 1.0, 1.0};
  m.laws = {law_from_means({0.7, 0.4, 0.3, 0.2}), law_from_means({0.3, 0.9, 0.2, 0.4}),
            law_from_means({0.0, 0.0, 1.4, 0.5}), law_from_means({0.0, 0.0, 0.4, 1.2})};
  return m;
}

}  // namespace fixtures
