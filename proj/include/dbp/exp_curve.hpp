#pragma once

#include <ostream>
#include <span>
#include <vector>

namespace dbp {

struct ExpTerm {
  double rate = 0.0;
  double coeff = 0.0;
};

/// sum_i coeff_i * exp(rate_i * t)
struct ExpCurve {
  std::vector<ExpTerm> terms;

  double eval(double t) const;
  std::vector<double> sample(std::span<const double> grid) const;
  double coeff_sum() const;
};

/// CSV rows "rate,coeff".
void write_terms_csv(std::ostream& out, const ExpCurve& curve);
/// CSV rows "t,value".
void write_sampled_csv(std::ostream& out, const ExpCurve& curve, std::span<const double> grid);

/// 0, step, 2*step, ... up to tMax (inclusive within half a step).
std::vector<double> uniform_grid(double tMax, double step);

}  // namespace dbp
