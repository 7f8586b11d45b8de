#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dbp/errors.hpp"
#include "dbp/verify.hpp"
#include "fixtures.hpp"

using namespace dbp;

TEST_CASE("a population that never changes size has zero standard error") {
  SdcbpModel m;
  m.rates = {1.0};
  m.laws = {OffspringLaw::deterministic({1})};
  EnsembleSettings s;
  s.reps = 200;
  const auto reports = mc_expectation(m, {3}, {0.5, 1.0, 2.0}, s);
  REQUIRE(reports.size() == 1);
  for (std::size_t g = 0; g < 3; ++g) {
    CHECK(reports[0].mcStdErr[g] == 0.0);
    CHECK(reports[0].mcMean[g] == 3.0);
  }
  CHECK(reports[0].all_pass());
}

TEST_CASE("ensembles of 100 replications run; fewer are refused") {
  EnsembleSettings s;
  s.reps = 100;
  const auto reports = mc_expectation(fixtures::model_a(), {1, 0}, {0.5, 1.0}, s);
  CHECK(reports.size() == 2);
  for (const McReport& r : reports) {
    CHECK(r.reps == 100);
    CHECK(r.excluded == 0);
    CHECK(!r.biased());
  }
  s.reps = 99;
  CHECK_THROWS_AS(mc_expectation(fixtures::model_a(), {1, 0}, {0.5}, s), ArgumentError);
}

TEST_CASE("martingale at time zero is exact") {
  EnsembleSettings s;
  s.reps = 100;
  const McReport r = mc_martingale_drift(fixtures::model_a(), 1, {0.0, 1.0}, s);
  CHECK(r.mcMean[0] == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
  CHECK(r.mcStdErr[0] == 0.0);
  CHECK(r.pass[0]);
}

TEST_CASE("standard error halves when the replication count quadruples") {
  EnsembleSettings small, large;
  small.reps = 500;
  large.reps = 2000;
  large.seed = 7;
  const auto a = mc_expectation(fixtures::model_a(), {1, 0}, {1.0}, small);
  const auto b = mc_expectation(fixtures::model_a(), {1, 0}, {1.0}, large);
  const double ratio = a[1].mcStdErr[0] / b[1].mcStdErr[0];
  CHECK(ratio > 1.7);
  CHECK(ratio < 2.3);
}

TEST_CASE("ensembles are reproducible from the seed") {
  EnsembleSettings s;
  s.reps = 150;
  s.seed = 42;
  const auto a = mc_expectation(fixtures::chain3(), {1, 0, 0}, {0.5, 1.5}, s);
  const auto b = mc_expectation(fixtures::chain3(), {1, 0, 0}, {0.5, 1.5}, s);
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::ostringstream x, y;
    write_report_csv(x, a[i]);
    write_report_csv(y, b[i]);
    CHECK(x.str() == y.str());
  }
}

TEST_CASE("judge applies the three standard error rule") {
  McReport r;
  r.grid = {1.0, 2.0, 3.0};
  r.mcMean = {1.0, 1.0, 1.0};
  r.mcStdErr = {0.1, 0.1, 0.0};
  r.predicted = {1.29, 1.31, 1.0};
  judge(r);
  CHECK(r.pass == std::vector<bool>{true, false, true});
  CHECK(!r.all_pass());
}

TEST_CASE("a single failing point triggers one rerun with the secondary seed") {
  std::vector<std::uint64_t> seeds;
  auto run = [&](std::uint64_t seed) {
    seeds.push_back(seed);
    McReport r;
    r.grid = {1.0, 2.0};
    r.mcMean = {1.0, seeds.size() == 1 ? 5.0 : 1.0};
    r.mcStdErr = {0.1, 0.1};
    r.predicted = {1.0, 1.0};
    return r;
  };
  const McReport r = judged_with_rerun(run, 3);
  REQUIRE(seeds.size() == 2);
  CHECK(seeds[1] == secondary_seed(3));
  CHECK(seeds[1] != 3);
  CHECK(r.reruns == 1);
  CHECK(r.all_pass());
}

TEST_CASE("two failing points are not rerun") {
  int calls = 0;
  auto run = [&](std::uint64_t) {
    ++calls;
    McReport r;
    r.grid = {1.0, 2.0};
    r.mcMean = {5.0, 5.0};
    r.mcStdErr = {0.1, 0.1};
    r.predicted = {1.0, 1.0};
    return r;
  };
  const McReport r = judged_with_rerun(run, 3);
  CHECK(calls == 1);
  CHECK(r.reruns == 0);
}

TEST_CASE("Model A extinction frequency") {
  EnsembleSettings s;
  s.reps = 2000;
  const McReport r = mc_extinction(fixtures::model_a(), {1, 0}, 25.0, s, {true, false});
  CHECK(r.predicted[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(r.all_pass());
}

TEST_CASE("extinction mask must be closed under offspring") {
  EnsembleSettings s;
  s.reps = 100;
  CHECK_THROWS_AS(mc_extinction(fixtures::model_a(), {1, 0}, 5.0, s, {false, true}),
                  ArgumentError);
}

TEST_CASE("exclusive-start shares agree with the closed form") {
  EnsembleSettings s;
  s.reps = 2000;
  TcvdbpModel m;
  m.mixed = 1;
  m.exclusive = 1;
  m.theta = 0.4;
  m.lambdaV = 1.0;
  m.typeChangeMixed = Matrix::Identity(1, 1);
  m.typeChangeExclusive = Matrix::Identity(1, 1);
  m.shareLaws = {fixtures::law_from_means({0.5, 0.5}), fixtures::law_from_means({0.0, 1.9})};
  const McReport r = mc_shares(m, 1, {0.5, 1.0, 2.0}, s);
  CHECK(r.label == "closed form");
  CHECK(r.all_pass());
  for (std::size_t g = 0; g < 3; ++g) {
    CHECK(r.predicted[g] == doctest::Approx(r.reference[g]).epsilon(1e-10));
  }
}

TEST_CASE("share statistic with theta 0 is total progeny") {
  TcvdbpModel m = fixtures::tc_2x2();
  m.theta = 0.0;
  EnsembleSettings s;
  s.reps = 100;
  const McReport r = mc_shares(m, 3, {1.0}, s);
  CHECK(r.quantity == "total progeny");
}

TEST_CASE("KS statistic and p-value") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> samples(2000);
  for (double& x : samples) x = u(rng);
  auto uniform_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const double d = ks_statistic(samples, uniform_cdf);
  CHECK(d < 0.05);
  CHECK(ks_pvalue(d, samples.size()) > 0.001);

  for (double& x : samples) x = x * x;
  const double d2 = ks_statistic(samples, uniform_cdf);
  CHECK(ks_pvalue(d2, samples.size()) < 1e-6);

  CHECK(ks_pvalue(0.0, 100) == 1.0);
  const std::vector<double> one{0.5};
  CHECK(ks_statistic(one, uniform_cdf) == doctest::Approx(0.5));
}

TEST_CASE("exponential waiting times pass a KS test") {
  SdcbpModel m;
  m.rates = {2.0};
  m.laws = {OffspringLaw::deterministic({0})};
  std::vector<double> times;
  SimConfig c;
  c.horizon = 1e6;
  for (std::uint64_t r = 0; r < 2000; ++r) {
    c.seed = r + 1;
    times.push_back(simulate(m, {1}, c).endTime);
  }
  const double d = ks_statistic(times, [](double x) { return 1.0 - std::exp(-2.0 * x); });
  CHECK(ks_pvalue(d, times.size()) > 0.001);
}
