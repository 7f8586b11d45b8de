#include "dbp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dbp/errors.hpp"
#include "dbp/linalg.hpp"

namespace dbp {

namespace {

constexpr double kProbTol = 1e-12;

std::string law_location(std::size_t type) {
  std::ostringstream out;
  out << "laws[" << type << "]";
  return out.str();
}

void check_dimension(std::span<const double> s, std::size_t types) {
  if (s.size() != types) {
    std::ostringstream out;
    out << "pgf argument has " << s.size() << " components, model has " << types << " types";
    throw ArgumentError(out.str());
  }
}

void validate_law(const OffspringLaw& law, std::size_t types, const std::string& where,
                  std::vector<Violation>& out) {
  if (law.types() != types) {
    out.push_back({"law dimension", where + " covers " + std::to_string(law.types()) +
                                        " types, expected " + std::to_string(types)});
  }
  if (law.atoms().empty()) {
    out.push_back({"probabilities sum to 1", where + " has no atoms"});
    return;
  }
  double total = 0.0;
  for (std::size_t a = 0; a < law.atoms().size(); ++a) {
    const Atom& atom = law.atoms()[a];
    const std::string loc = where + ".atoms[" + std::to_string(a) + "]";
    if (atom.counts.size() != types) {
      out.push_back({"atom dimension", loc});
    }
    if (!(atom.prob >= 0.0 && atom.prob <= 1.0)) {
      out.push_back({"probability in [0,1]", loc});
    }
    if (std::any_of(atom.counts.begin(), atom.counts.end(), [](int c) { return c < 0; })) {
      out.push_back({"nonnegative counts", loc});
    }
    total += atom.prob;
  }
  if (std::abs(total - 1.0) > kProbTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << where << " sums to " << total;
    out.push_back({"probabilities sum to 1", msg.str()});
  }
}

void validate_rates(std::span<const double> rates, std::size_t types,
                    std::vector<Violation>& out) {
  if (rates.size() != types) {
    out.push_back({"rate per type", "rates has " + std::to_string(rates.size()) +
                                        " entries, expected " + std::to_string(types)});
  }
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] > 0.0) || !std::isfinite(rates[i])) {
      out.push_back({"rates strictly positive", "rates[" + std::to_string(i) + "]"});
    }
  }
}

// Mean matrix with entry (i,j) = E[count_j] under law i.
Matrix mean_matrix(const std::vector<OffspringLaw>& laws, std::size_t types) {
  Matrix means = Matrix::Zero(static_cast<Eigen::Index>(laws.size()),
                              static_cast<Eigen::Index>(types));
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const auto row = laws[i].means();
    for (std::size_t j = 0; j < std::min(row.size(), types); ++j) {
      means(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
  }
  return means;
}

Matrix rate_generator(std::span<const double> rates, const std::vector<OffspringLaw>& laws,
                      std::size_t types) {
  if (rates.size() != types || laws.size() != types) {
    throw ModelError("rates/laws do not match the type count");
  }
  Matrix B = mean_matrix(laws, types);
  for (std::size_t i = 0; i < types; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    B(r, r) -= 1.0;
    B.row(r) *= rates[i];
  }
  return B;
}

void validate_row_stochastic(const Matrix& a, std::size_t expected, const std::string& name,
                             std::vector<Violation>& out) {
  if (a.rows() != static_cast<Eigen::Index>(expected) ||
      a.cols() != static_cast<Eigen::Index>(expected)) {
    out.push_back({"type-change shape", name + " must be " + std::to_string(expected) + "x" +
                                            std::to_string(expected)});
    return;
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if ((a.row(i).array() < 0.0).any()) {
      out.push_back({"row-stochastic", name + " row " + std::to_string(i) + " has a negative entry"});
    }
    const double sum = a.row(i).sum();
    if (std::abs(sum - 1.0) > kProbTol) {
      std::ostringstream msg;
      msg << name << " row " << i << " sums to " << sum;
      out.push_back({"row-stochastic", msg.str()});
    }
  }
}

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

OffspringLaw::OffspringLaw(std::size_t types, std::vector<Atom> atoms)
    : types_(types), atoms_(std::move(atoms)) {}

OffspringLaw OffspringLaw::product(
    const std::vector<std::vector<std::pair<int, double>>>& marginals) {
  const std::size_t types = marginals.size();
  std::vector<Atom> atoms{Atom{std::vector<int>(types, 0), 1.0}};
  for (std::size_t j = 0; j < types; ++j) {
    if (marginals[j].empty()) continue;
    std::vector<Atom> next;
    next.reserve(atoms.size() * marginals[j].size());
    for (const Atom& atom : atoms) {
      for (const auto& [count, prob] : marginals[j]) {
        if (prob == 0.0) continue;
        Atom a = atom;
        a.counts[j] = count;
        a.prob *= prob;
        next.push_back(std::move(a));
      }
    }
    atoms = std::move(next);
  }
  return OffspringLaw(types, std::move(atoms));
}

OffspringLaw OffspringLaw::deterministic(std::vector<int> counts) {
  const std::size_t types = counts.size();
  return OffspringLaw(types, {Atom{std::move(counts), 1.0}});
}

OffspringLaw OffspringLaw::with_means(std::span<const double> means) {
  const std::size_t types = means.size();
  double total = 0.0;
  for (double m : means) {
    if (m < 0.0) throw ArgumentError("negative mean offspring count");
    total += m;
  }
  const int n = std::max(1, static_cast<int>(std::ceil(total - 1e-12)));
  std::vector<Atom> atoms;
  double used = 0.0;
  for (std::size_t k = 0; k < types; ++k) {
    if (means[k] == 0.0) continue;
    Atom a{std::vector<int>(types, 0), means[k] / n};
    a.counts[k] = n;
    used += a.prob;
    atoms.push_back(std::move(a));
  }
  const double rest = 1.0 - used;
  if (rest > 0.0 || atoms.empty()) {
    atoms.push_back(Atom{std::vector<int>(types, 0), std::max(rest, 0.0)});
  }
  return OffspringLaw(types, std::move(atoms));
}

double OffspringLaw::pgf(std::span<const double> s) const {
  check_dimension(s, types_);
  double total = 0.0;
  for (const Atom& atom : atoms_) {
    double term = atom.prob;
    for (std::size_t j = 0; j < types_; ++j) {
      if (atom.counts[j] != 0) term *= std::pow(s[j], atom.counts[j]);
    }
    total += term;
  }
  return total;
}

std::vector<double> OffspringLaw::means() const {
  std::vector<double> m(types_, 0.0);
  for (const Atom& atom : atoms_) {
    for (std::size_t j = 0; j < std::min(types_, atom.counts.size()); ++j) {
      m[j] += atom.prob * atom.counts[j];
    }
  }
  return m;
}

double OffspringLaw::total_probability() const {
  double total = 0.0;
  for (const Atom& atom : atoms_) total += atom.prob;
  return total;
}

Matrix TcvdbpModel::type_change() const {
  const auto M = static_cast<Eigen::Index>(mixed);
  const auto E = static_cast<Eigen::Index>(exclusive);
  Matrix a = Matrix::Zero(M + E, M + E);
  a.topLeftCorner(M, M) = typeChangeMixed;
  a.bottomRightCorner(E, E) = typeChangeExclusive;
  return a;
}

Matrix TcvdbpModel::share_means() const { return mean_matrix(shareLaws, types()); }

std::size_t type_count(const Model& model) {
  return std::visit([](const auto& m) { return m.types(); }, model);
}

double pgf_eval(const SdcbpModel& model, std::size_t i, std::span<const double> s) {
  if (i >= model.types()) throw ArgumentError("type index out of range");
  check_dimension(s, model.types());
  return model.laws[i].pgf(s);
}

double pgf_eval(const VdcbpModel& model, std::size_t i, std::span<const double> s) {
  if (i >= model.types()) throw ArgumentError("type index out of range");
  check_dimension(s, model.types());
  return model.laws[i].pgf(s);
}

double event_pgf(const Model& model, std::size_t i, std::span<const double> s) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TcvdbpModel>) {
          if (i >= m.types()) throw ArgumentError("type index out of range");
          check_dimension(s, m.types());
          const Matrix a = m.type_change();
          double shift = 0.0;
          for (std::size_t k = 0; k < m.types(); ++k) {
            shift += a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * s[k];
          }
          return m.theta * shift + (1.0 - m.theta) * m.shareLaws[i].pgf(s);
        } else {
          return pgf_eval(m, i, s);
        }
      },
      model);
}

Matrix generator_matrix(const SdcbpModel& model) {
  return rate_generator(model.rates, model.laws, model.types());
}

Matrix generator_matrix(const VdcbpModel& model) {
  return rate_generator(model.rates, model.laws, model.types());
}

Matrix generator_matrix(const TcvdbpModel& model) {
  const auto n = static_cast<Eigen::Index>(model.types());
  if (model.shareLaws.size() != model.types()) {
    throw ModelError("shareLaws do not match the type count");
  }
  const Matrix m = model.share_means();
  const Matrix a = model.type_change();
  // Cross-class entries of `a` are zero by construction, so one expression
  // covers both the within-class and the mixed->exclusive blocks.
  Matrix G = model.theta * a + (1.0 - model.theta) * m - Matrix::Identity(n, n);
  G *= model.lambdaV;
  return G;
}

Matrix generator_matrix(const Model& model) {
  return std::visit([](const auto& m) { return generator_matrix(m); }, model);
}

TcvdbpModel build_social_network_model(const SocialNetworkParams& params, int targetPost) {
  if (params.N < 2) throw ArgumentError("social network model needs N >= 2");
  if (targetPost != 1 && targetPost != 2) throw ArgumentError("targetPost must be 1 or 2");
  if (const auto v = validate(params); !v.empty()) {
    throw ModelError("invalid social network parameters: " + v.front().invariant + " at " +
                     v.front().location);
  }
  const std::size_t levels = static_cast<std::size_t>(params.N - 1);
  const std::size_t M = 2 * levels;
  const std::size_t E = levels;
  const double etaT = targetPost == 1 ? params.eta1 : params.eta2;
  const double etaO = targetPost == 1 ? params.eta2 : params.eta1;
  const double m = params.meanFriends;
  // c_mx and c_{mx,t} without their (1-theta) factor.
  const double bothShared = params.deltaAtt * params.eta1 * params.eta2 * m;
  const double onlyTarget = m * etaT * (1.0 - params.deltaAtt * etaO);
  const double alone = m * etaT;

  TcvdbpModel model;
  model.mixed = M;
  model.exclusive = E;
  model.theta = params.theta;
  model.lambdaV = params.lambdaV;
  model.typeChangeMixed = Matrix::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  model.typeChangeExclusive =
      Matrix::Zero(static_cast<Eigen::Index>(E), static_cast<Eigen::Index>(E));

  const std::size_t types = M + E;
  auto mixed_index = [](std::size_t level, std::size_t order) { return 2 * level + order; };

  for (std::size_t i = 0; i < levels; ++i) {
    const std::size_t below = std::min(i + 1, levels - 1);
    for (std::size_t o = 0; o < 2; ++o) {
      model.typeChangeMixed(static_cast<Eigen::Index>(mixed_index(i, o)),
                            static_cast<Eigen::Index>(mixed_index(below, o))) = 1.0;
      std::vector<double> means(types, 0.0);
      for (std::size_t j = 0; j < levels; ++j) {
        const double base = params.readProbs[i] * params.levelProbs[j];
        means[mixed_index(j, o)] = bothShared * base * (1.0 - params.p);
        means[mixed_index(j, 1 - o)] = bothShared * base * params.p;
        means[M + j] = onlyTarget * base;
      }
      model.shareLaws.push_back(OffspringLaw::with_means(means));
    }
  }
  for (std::size_t i = 0; i < levels; ++i) {
    model.typeChangeExclusive(static_cast<Eigen::Index>(i),
                              static_cast<Eigen::Index>(std::min(i + 1, levels - 1))) = 1.0;
    std::vector<double> means(types, 0.0);
    for (std::size_t j = 0; j < levels; ++j) {
      means[M + j] = alone * params.readProbs[i] * params.levelProbs[j];
    }
    model.shareLaws.push_back(OffspringLaw::with_means(means));
  }
  return model;
}

std::vector<Violation> validate(const SdcbpModel& model) {
  std::vector<Violation> out;
  const std::size_t n = model.types();
  if (n == 0) out.push_back({"at least one type", "laws"});
  validate_rates(model.rates, n, out);
  for (std::size_t i = 0; i < n; ++i) {
    validate_law(model.laws[i], n, law_location(i), out);
    bool lower = false;
    for (const Atom& atom : model.laws[i].atoms()) {
      if (atom.prob <= 0.0) continue;
      for (std::size_t j = 0; j < std::min(i, atom.counts.size()); ++j) {
        if (atom.counts[j] > 0) lower = true;
      }
    }
    if (lower) {
      out.push_back({"triangular support",
                     law_location(i) + " produces a type with a smaller index"});
    }
  }
  return out;
}

std::vector<Violation> validate(const VdcbpModel& model) {
  std::vector<Violation> out;
  const std::size_t n = model.types();
  if (model.class1 == 0 || model.class2 == 0) {
    out.push_back({"two nonempty classes", "class1/class2"});
  }
  if (model.laws.size() != n) {
    out.push_back({"law per type", "laws has " + std::to_string(model.laws.size()) +
                                       " entries, expected " + std::to_string(n)});
    return out;
  }
  validate_rates(model.rates, n, out);
  for (std::size_t i = 0; i < n; ++i) {
    validate_law(model.laws[i], n, law_location(i), out);
  }
  for (std::size_t i = model.class1; i < n; ++i) {
    bool crosses = false;
    for (const Atom& atom : model.laws[i].atoms()) {
      if (atom.prob <= 0.0) continue;
      for (std::size_t j = 0; j < std::min(model.class1, atom.counts.size()); ++j) {
        if (atom.counts[j] > 0) crosses = true;
      }
    }
    if (crosses) {
      out.push_back({"class 2 never produces class 1",
                     law_location(i) + " has class-1 offspring"});
    }
  }
  if (!out.empty()) return out;
  const Matrix means = mean_matrix(model.laws, n);
  const auto n1 = static_cast<Eigen::Index>(model.class1);
  const auto n2 = static_cast<Eigen::Index>(model.class2);
  if (!is_irreducible(means.topLeftCorner(n1, n1))) {
    out.push_back({"irreducible A11", "class-1 block"});
  }
  if (!is_irreducible(means.bottomRightCorner(n2, n2))) {
    out.push_back({"irreducible A22", "class-2 block"});
  }
  return out;
}

std::vector<Violation> validate(const TcvdbpModel& model) {
  std::vector<Violation> out;
  const std::size_t n = model.types();
  if (model.mixed == 0 || model.exclusive == 0) {
    out.push_back({"two nonempty classes", "mixed/exclusive"});
  }
  if (!in_unit(model.theta)) out.push_back({"theta in [0,1]", "theta"});
  if (!(model.lambdaV > 0.0) || !std::isfinite(model.lambdaV)) {
    out.push_back({"lambdaV strictly positive", "lambdaV"});
  }
  validate_row_stochastic(model.typeChangeMixed, model.mixed, "typeChange.mixed", out);
  validate_row_stochastic(model.typeChangeExclusive, model.exclusive, "typeChange.exclusive", out);
  if (model.shareLaws.size() != n) {
    out.push_back({"law per type", "shareLaws has " + std::to_string(model.shareLaws.size()) +
                                       " entries, expected " + std::to_string(n)});
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    validate_law(model.shareLaws[i], n, law_location(i), out);
  }
  for (std::size_t i = model.mixed; i < n; ++i) {
    bool crosses = false;
    for (const Atom& atom : model.shareLaws[i].atoms()) {
      if (atom.prob <= 0.0) continue;
      for (std::size_t j = 0; j < std::min(model.mixed, atom.counts.size()); ++j) {
        if (atom.counts[j] > 0) crosses = true;
      }
    }
    if (crosses) {
      out.push_back({"exclusive laws produce no mixed offspring",
                     law_location(i) + " has mixed offspring"});
    }
  }
  return out;
}

std::vector<Violation> validate(const SocialNetworkParams& params) {
  std::vector<Violation> out;
  auto unit = [&](double x, const char* name) {
    if (!in_unit(x)) out.push_back({"probability in [0,1]", name});
  };
  unit(params.eta1, "eta1");
  unit(params.eta2, "eta2");
  unit(params.deltaAtt, "deltaAtt");
  unit(params.theta, "theta");
  unit(params.p, "p");
  if (!(params.lambdaV > 0.0)) out.push_back({"lambdaV strictly positive", "lambdaV"});
  if (!(params.meanFriends > 0.0)) out.push_back({"meanFriends strictly positive", "meanFriends"});
  if (params.N < 2) {
    out.push_back({"N >= 2", "N"});
    return out;
  }
  const auto levels = static_cast<std::size_t>(params.N - 1);
  if (params.readProbs.size() != levels) {
    out.push_back({"one read probability per level", "readProbs"});
  }
  if (params.levelProbs.size() != levels) {
    out.push_back({"one level probability per level", "levelProbs"});
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < params.readProbs.size(); ++j) {
    if (!in_unit(params.readProbs[j])) {
      out.push_back({"probability in [0,1]", "readProbs[" + std::to_string(j) + "]"});
    }
  }
  for (std::size_t j = 0; j < params.levelProbs.size(); ++j) {
    if (!in_unit(params.levelProbs[j])) {
      out.push_back({"probability in [0,1]", "levelProbs[" + std::to_string(j) + "]"});
    }
    sum += params.levelProbs[j];
  }
  if (sum > 1.0 + kProbTol) out.push_back({"levelProbs sum <= 1", "levelProbs"});
  return out;
}

std::vector<Violation> validate(const Model& model) {
  return std::visit([](const auto& m) { return validate(m); }, model);
}

}  // namespace dbp
