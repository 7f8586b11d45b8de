#include <doctest.h>

#include <random>

#include "dbp/errors.hpp"
#include "dbp/model.hpp"
#include "fixtures.hpp"

using namespace dbp;
using fixtures::model_a;

TEST_CASE("pgf at all-ones is one") {
  const SdcbpModel a = model_a();
  const std::vector<double> ones{1.0, 1.0};
  CHECK(pgf_eval(a, 0, ones) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pgf_eval(a, 1, ones) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Model A pgf hand values") {
  const SdcbpModel a = model_a();
  const std::vector<double> s01{0.0, 1.0};
  const std::vector<double> s10{1.0, 0.0};
  CHECK(pgf_eval(a, 0, s01) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(pgf_eval(a, 0, s10) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("identity pgf") {
  SdcbpModel m;
  m.rates = {1.0};
  m.laws = {OffspringLaw::deterministic({1})};
  for (double x : {0.0, 0.3, 0.77, 1.0}) {
    const std::vector<double> s{x};
    CHECK(pgf_eval(m, 0, s) == doctest::Approx(x));
  }
}

TEST_CASE("pgf dimension mismatch is an argument error") {
  const std::vector<double> s{1.0};
  CHECK_THROWS_AS(pgf_eval(model_a(), 0, s), ArgumentError);
}

TEST_CASE("pgf is monotone in each coordinate") {
  const SdcbpModel a = model_a();
  for (double x = 0.0; x < 1.0; x += 0.1) {
    const std::vector<double> lo{x, 0.5}, hi{x + 0.1, 0.5};
    CHECK(pgf_eval(a, 0, lo) <= pgf_eval(a, 0, hi));
    const std::vector<double> lo2{0.5, x}, hi2{0.5, x + 0.1};
    CHECK(pgf_eval(a, 0, lo2) <= pgf_eval(a, 0, hi2));
  }
}

TEST_CASE("Model A generator") {
  const Matrix B = generator_matrix(model_a());
  CHECK(B(0, 0) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(B(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(B(1, 0) == 0.0);
  CHECK(B(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("zero-offspring single type generator") {
  SdcbpModel m;
  m.rates = {1.0};
  m.laws = {OffspringLaw::deterministic({0})};
  const Matrix B = generator_matrix(m);
  CHECK(B(0, 0) == -1.0);
}

TEST_CASE("generator entries match independent atom summation") {
  std::mt19937_64 rng(7);
  const SdcbpModel m = fixtures::random_sdcbp(rng, 5);
  const Matrix B = generator_matrix(m);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double mean = 0.0;
      for (const Atom& atom : m.laws[i].atoms()) mean += atom.prob * atom.counts[j];
      const double expected = m.rates[i] * (mean - (i == j ? 1.0 : 0.0));
      CHECK(B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
            doctest::Approx(expected).epsilon(1e-13));
    }
    for (std::size_t j = 0; j < i; ++j) {
      CHECK(B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == 0.0);
    }
  }
}

TEST_CASE("TC-VDBP with theta 1 and identity type change has a zero generator") {
  TcvdbpModel m = fixtures::tc_2x2();
  m.theta = 1.0;
  m.typeChangeMixed = Matrix::Identity(2, 2);
  m.typeChangeExclusive = Matrix::Identity(2, 2);
  CHECK(generator_matrix(m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("TC-VDBP with theta 0 equals the VDCBP built from its share laws") {
  TcvdbpModel tc = fixtures::tc_2x2();
  tc.theta = 0.0;
  VdcbpModel v;
  v.class1 = 2;
  v.class2 = 2;
  v.rates.assign(4, tc.lambdaV);
  v.laws = tc.shareLaws;
  CHECK((generator_matrix(tc) - generator_matrix(v)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("TC-VDBP generator has the zero lower-left block") {
  const Matrix G = generator_matrix(fixtures::tc_2x2());
  CHECK(G.bottomLeftCorner(2, 2).cwiseAbs().maxCoeff() == 0.0);
  // lambdaV (theta a + (1 - theta) m - I) at (1,1): 0.3*0.2 + 0.7*0.7 - 1
  CHECK(G(0, 0) == doctest::Approx(0.3 * 0.2 + 0.7 * 0.7 - 1.0).epsilon(1e-12));
  CHECK(G(0, 2) == doctest::Approx(0.7 * 0.5).epsilon(1e-12));
}

TEST_CASE("validate accepts Model A") { CHECK(validate(model_a()).empty()); }

TEST_CASE("validate flags lower-type offspring") {
  SdcbpModel m = model_a();
  m.laws[1] = OffspringLaw::product({{{0, 0.5}, {1, 0.5}}, {{0, 0.25}, {2, 0.75}}});
  const auto v = validate(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].invariant == "triangular support");
}

TEST_CASE("validate flags a type-change row that does not sum to one") {
  TcvdbpModel m = fixtures::tc_2x2();
  m.typeChangeMixed(0, 1) = 0.7;
  const auto v = validate(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].invariant == "row-stochastic");
}

TEST_CASE("validate flags bad probabilities and rates") {
  SdcbpModel m = model_a();
  m.rates[0] = 0.0;
  m.laws[1] = OffspringLaw(2, {Atom{{0, 2}, 0.5}});
  CHECK(validate(m).size() == 2);
}

TEST_CASE("validate flags class-2 laws producing class 1") {
  VdcbpModel m = fixtures::vdcbp_2x2();
  CHECK(validate(m).empty());
  m.laws[2] = fixtures::law_from_means({0.1, 0.0, 1.4, 0.5});
  const auto v = validate(m);
  REQUIRE(!v.empty());
  CHECK(v[0].invariant == "class 2 never produces class 1");
}

TEST_CASE("validate flags reducible VDCBP blocks") {
  VdcbpModel m = fixtures::vdcbp_2x2();
  m.laws[1] = fixtures::law_from_means({0.0, 0.9, 0.2, 0.4});
  const auto v = validate(m);
  REQUIRE(!v.empty());
  CHECK(v[0].invariant == "irreducible A11");
}

TEST_CASE("validate flags exclusive laws with mixed offspring") {
  TcvdbpModel m = fixtures::tc_2x2();
  m.shareLaws[3] = fixtures::law_from_means({0.2, 0.0, 0.7, 1.0});
  const auto v = validate(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].invariant == "exclusive laws produce no mixed offspring");
}

TEST_CASE("with_means reproduces the requested means") {
  const std::vector<double> means{0.3, 1.7, 0.0, 0.25};
  const OffspringLaw law = OffspringLaw::with_means(means);
  const auto got = law.means();
  for (std::size_t k = 0; k < means.size(); ++k) CHECK(got[k] == doctest::Approx(means[k]));
  CHECK(law.total_probability() == doctest::Approx(1.0).epsilon(1e-12));
}

namespace {

SocialNetworkParams social_params() {
  SocialNetworkParams p;
  p.eta1 = 0.8;
  p.eta2 = 0.6;
  p.deltaAtt = 0.5;
  p.theta = 0.4;
  p.lambdaV = 1.5;
  p.meanFriends = 3.0;
  p.readProbs = {0.9};
  p.levelProbs = {0.7};
  p.p = 0.25;
  p.N = 2;
  return p;
}

}  // namespace

TEST_CASE("social model with zero quality never shares") {
  SocialNetworkParams p = social_params();
  p.eta1 = 0.0;
  p.eta2 = 0.0;
  const TcvdbpModel m = build_social_network_model(p, 1);
  CHECK(m.share_means().cwiseAbs().maxCoeff() == 0.0);
  const Matrix G = generator_matrix(m);
  const Matrix expected =
      p.lambdaV * (p.theta * m.type_change() - Matrix::Identity(3, 3));
  CHECK((G - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("social model with theta 0 has no type-change contribution") {
  SocialNetworkParams p = social_params();
  p.theta = 0.0;
  const TcvdbpModel m = build_social_network_model(p, 1);
  const Matrix G = generator_matrix(m);
  const Matrix expected = p.lambdaV * (m.share_means() - Matrix::Identity(3, 3));
  CHECK((G - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("social model N=2 entries match the parameter formulas") {
  const SocialNetworkParams p = social_params();
  const TcvdbpModel m = build_social_network_model(p, 1);
  REQUIRE(m.mixed == 2);
  REQUIRE(m.exclusive == 1);
  const Matrix mean = m.share_means();
  const double cmx = p.deltaAtt * p.eta1 * p.eta2 * p.meanFriends;  // without (1 - theta)
  const double base = p.readProbs[0] * p.levelProbs[0];
  // order kept with probability 1 - p (z'), swapped with probability p (z)
  CHECK(mean(0, 0) == doctest::Approx((1 - p.p) * cmx * base));
  CHECK(mean(0, 1) == doctest::Approx(p.p * cmx * base));
  CHECK(mean(1, 1) == doctest::Approx((1 - p.p) * cmx * base));
  CHECK(mean(1, 0) == doctest::Approx(p.p * cmx * base));
  const double cmxT = p.meanFriends * p.eta1 * (1 - p.deltaAtt * p.eta2);
  CHECK(mean(0, 2) == doctest::Approx(cmxT * base));
  CHECK(mean(2, 2) == doctest::Approx(p.meanFriends * p.eta1 * base));
  CHECK(mean(2, 0) == 0.0);
  const Matrix G = generator_matrix(m);
  CHECK(G(0, 2) == doctest::Approx(p.lambdaV * (1 - p.theta) * cmxT * base));

  const TcvdbpModel other = build_social_network_model(p, 2);
  const double cmxO = p.meanFriends * p.eta2 * (1 - p.deltaAtt * p.eta1);
  CHECK(other.share_means()(0, 2) == doctest::Approx(cmxO * base));
}

TEST_CASE("social model rejects N < 2") {
  SocialNetworkParams p = social_params();
  p.N = 1;
  CHECK_THROWS_AS(build_social_network_model(p, 1), ArgumentError);
}

TEST_CASE("social parameter validation") {
  SocialNetworkParams p = social_params();
  CHECK(validate(p).empty());
  p.levelProbs = {1.2};
  CHECK(!validate(p).empty());
}

TEST_CASE("social model with three levels is valid and stochastic") {
  SocialNetworkParams p = social_params();
  p.N = 4;
  p.readProbs = {0.9, 0.6, 0.3};
  p.levelProbs = {0.5, 0.3, 0.1};
  const TcvdbpModel m = build_social_network_model(p, 1);
  CHECK(m.mixed == 6);
  CHECK(m.exclusive == 3);
  CHECK(validate(m).empty());
}
