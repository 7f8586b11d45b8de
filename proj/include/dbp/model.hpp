#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace dbp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One outcome of a reproduction event: how many offspring of each type.
struct Atom {
  std::vector<int> counts;
  double prob = 0.0;
};

/// Finite joint probability mass function over offspring-count vectors.
///
/// The law does not validate itself on construction; `validate()` on the
/// owning model reports malformed laws so that model files can be diagnosed
/// in one pass.
class OffspringLaw {
 public:
  OffspringLaw() = default;
  OffspringLaw(std::size_t types, std::vector<Atom> atoms);

  /// Product law of independent per-type marginals. `marginals[j]` lists
  /// (count, prob) pairs for offspring of type j; an empty list means "always 0".
  static OffspringLaw product(
      const std::vector<std::vector<std::pair<int, double>>>& marginals);

  static OffspringLaw deterministic(std::vector<int> counts);

  /// A law with the given mean vector and at most types+1 atoms: with
  /// probability means[k]/n the event yields n offspring of type k, where
  /// n = max(1, ceil(sum(means))); otherwise nothing.
  static OffspringLaw with_means(std::span<const double> means);

  std::size_t types() const { return types_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  /// Sum over atoms of prob * prod_j s_j^counts_j.
  double pgf(std::span<const double> s) const;
  std::vector<double> means() const;
  double total_probability() const;

 private:
  std::size_t types_ = 0;
  std::vector<Atom> atoms_;
};

/// Scalar decomposable process: type i only produces types j >= i.
struct SdcbpModel {
  std::vector<double> rates;
  std::vector<OffspringLaw> laws;

  std::size_t types() const { return laws.size(); }
};

/// Two irreducible classes; class 1 (indices [0, class1)) feeds class 2.
struct VdcbpModel {
  std::size_t class1 = 0;
  std::size_t class2 = 0;
  std::vector<double> rates;
  std::vector<OffspringLaw> laws;

  std::size_t types() const { return class1 + class2; }
};

/// Type-changing process. Every type transitions at rate lambdaV; with
/// probability theta the particle changes type within its class, otherwise it
/// dies and reproduces according to its share law. Mixed types occupy indices
/// [0, mixed), exclusive types [mixed, mixed + exclusive).
struct TcvdbpModel {
  std::size_t mixed = 0;
  std::size_t exclusive = 0;
  double theta = 0.0;
  double lambdaV = 1.0;
  Matrix typeChangeMixed;
  Matrix typeChangeExclusive;
  std::vector<OffspringLaw> shareLaws;

  std::size_t types() const { return mixed + exclusive; }
  /// Full (mixed+exclusive) block-diagonal type-change matrix.
  Matrix type_change() const;
  /// Mean offspring matrix m_{l,k} conditioned on a share event.
  Matrix share_means() const;
};

using Model = std::variant<SdcbpModel, VdcbpModel, TcvdbpModel>;

/// Parameters of the two-post timeline model. Probabilities are per level,
/// level 1 being the top of a timeline.
struct SocialNetworkParams {
  double eta1 = 0.0;
  double eta2 = 0.0;
  double deltaAtt = 0.0;
  double theta = 0.0;
  double lambdaV = 1.0;
  double meanFriends = 1.0;
  std::vector<double> readProbs;   // r_1 .. r_{N-1}
  std::vector<double> levelProbs;  // rho_1 .. rho_{N-1}
  double p = 0.0;
  int N = 2;
};

struct Violation {
  std::string invariant;
  std::string location;
};

std::size_t type_count(const Model& model);

/// PGF of the offspring law of type i.
double pgf_eval(const SdcbpModel& model, std::size_t i, std::span<const double> s);
double pgf_eval(const VdcbpModel& model, std::size_t i, std::span<const double> s);

/// PGF of the population that replaces one type-i particle at its next
/// transition. Equals pgf_eval for SDCBP/VDCBP; for TC-VDBP it mixes the
/// type-change row (weight theta) with the share law.
double event_pgf(const Model& model, std::size_t i, std::span<const double> s);

Matrix generator_matrix(const SdcbpModel& model);
Matrix generator_matrix(const VdcbpModel& model);
Matrix generator_matrix(const TcvdbpModel& model);
Matrix generator_matrix(const Model& model);

/// Builds the TC-VDBP seen by one post (targetPost = 1 or 2).
///
/// Type layout, with L = N-1 tracked levels:
///   mixed type 2(i-1)+o, i in 1..L, o in {0,1}: target post at level i;
///     o flags which of the two posts sits higher on the timeline. A share
///     keeps the order with probability 1-p and swaps it with probability p.
///   exclusive type M+(i-1): target post alone at level i.
/// Share means (conditioned on a share event, i.e. with the (1-theta)
/// factor of c_mx and c_{mx,i} removed):
///   mixed(i,o)  -> mixed(j,o')  : deltaAtt*eta1*eta2*m * r_i * rho_j * (o'==o ? 1-p : p)
///   mixed(i,o)  -> excl(j)      : m*eta_t*(1-deltaAtt*eta_{-t}) * r_i * rho_j
///   excl(i)     -> excl(j)      : m*eta_t * r_i * rho_j
/// A shift moves a post one level down; the deepest tracked level is
/// saturating so that type-change rows stay stochastic.
TcvdbpModel build_social_network_model(const SocialNetworkParams& params, int targetPost);

std::vector<Violation> validate(const SdcbpModel& model);
std::vector<Violation> validate(const VdcbpModel& model);
std::vector<Violation> validate(const TcvdbpModel& model);
std::vector<Violation> validate(const SocialNetworkParams& params);
std::vector<Violation> validate(const Model& model);

}  // namespace dbp
