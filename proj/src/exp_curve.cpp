#include "dbp/exp_curve.hpp"

#include <cmath>
#include <cstdio>

#include "dbp/errors.hpp"

namespace dbp {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

double ExpCurve::eval(double t) const {
  double sum = 0.0;
  for (const ExpTerm& term : terms) sum += term.coeff * std::exp(term.rate * t);
  return sum;
}

std::vector<double> ExpCurve::sample(std::span<const double> grid) const {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back(eval(t));
  return out;
}

double ExpCurve::coeff_sum() const {
  double sum = 0.0;
  for (const ExpTerm& term : terms) sum += term.coeff;
  return sum;
}

void write_terms_csv(std::ostream& out, const ExpCurve& curve) {
  out << "rate,coeff\n";
  for (const ExpTerm& term : curve.terms) out << fmt(term.rate) << ',' << fmt(term.coeff) << '\n';
}

void write_sampled_csv(std::ostream& out, const ExpCurve& curve, std::span<const double> grid) {
  out << "t,value\n";
  for (double t : grid) out << fmt(t) << ',' << fmt(curve.eval(t)) << '\n';
}

std::vector<double> uniform_grid(double tMax, double step) {
  if (!(step > 0.0) || !(tMax >= 0.0)) throw ArgumentError("grid needs step > 0 and tMax >= 0");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor(tMax / step + 0.5));
  for (long i = 0; i <= count; ++i) grid.push_back(static_cast<double>(i) * step);
  return grid;
}

}  // namespace dbp
